#pragma once

#include <string>
#include <vector>

#include "flagint/domain.hpp"
#include "flagint/kernel.hpp"

namespace flagint {

enum class TestFunctionKind { IndicatorBox, SmoothBump, Atom, CustomSampled };

const char* to_string(TestFunctionKind kind);

/// exp(1 - 1/(1 - s^2)) on (-1, 1), zero outside; equals 1 at s = 0.
double bump_profile(double s);

/// One piece of a test function: `value` on `box`, multiplied by the product
/// bump profile of the box when `smooth` is set.
struct FunctionCell {
  Box box;
  double value = 0.0;
  bool smooth = false;

  /// Profile factor along one axis at coordinate t (1 for flat cells).
  double x_factor(std::size_t axis, double t) const;
  double y_factor(std::size_t axis, double t) const;
};

/// Bounded, compactly supported function on R^n x R^m given as a sum of
/// cells with disjoint interiors. m may be 0 for functions on R^n alone.
class TestFunction {
 public:
  TestFunction(TestFunctionKind kind, int n, int m, std::vector<FunctionCell> cells);

  static TestFunction indicator(const Box& box, double value = 1.0);
  static TestFunction smooth_bump(const Box& box, double height = 1.0);
  /// Piecewise-constant function on a uniform grid over `box`; `values` is in
  /// row-major order with the last y axis fastest. Zero-valued cells are kept.
  static TestFunction sampled(const Box& box, const std::vector<int>& cells_per_axis,
                              const std::vector<double>& values);
  static TestFunction zero(int n, int m);

  TestFunctionKind kind() const { return kind_; }
  int n() const { return n_; }
  int m() const { return m_; }
  const std::vector<FunctionCell>& cells() const { return cells_; }
  bool is_zero() const;
  bool non_negative() const;
  bool piecewise_constant() const;

  double operator()(const PointPair& pt) const;
  double sup_norm() const;
  /// Bounding box of the support (empty function: zero-width box at origin).
  Box support() const;
  /// Largest side of the support bounding box.
  double support_scale() const;

  TestFunction scaled(double factor) const;
  TestFunction translated(const std::vector<double>& dx, const std::vector<double>& dy) const;
  /// (u, v) -> f(u / dx_scale, v / dy_scale).
  TestFunction dilated(double x_scale, double y_scale) const;

  /// Exact integral for piecewise-constant functions (compensated sum).
  double exact_integral() const;

 private:
  TestFunctionKind kind_;
  int n_;
  int m_;
  std::vector<FunctionCell> cells_;
};

}  // namespace flagint
