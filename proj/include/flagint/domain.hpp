#pragma once

#include <string>
#include <variant>
#include <vector>

#include "flagint/exponents.hpp"
#include "flagint/kernel.hpp"

namespace flagint {

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-aligned box in R^n x R^m.
struct Box {
  std::vector<Interval> x;
  std::vector<Interval> y;

  double volume() const;
  bool contains(const PointPair& pt) const;
  friend bool operator==(const Box&, const Box&) = default;
};

/// Cube of side 2^L centered at the origin of R^{n+m}, sup-norm convention.
struct Cube {
  int n = 1;
  int m = 1;
  int L = 0;

  double side() const;
  double half_side() const { return side() / 2; }
  double volume() const;
  bool contains(const PointPair& pt) const;
  Box as_box() const;
  /// The co-centred cube of side 2^{L-1}.
  Cube half() const { return {n, m, L - 1}; }
};

/// { inner <= |z| < outer } in R^dim; inner == 0 gives a ball.
struct RadialBand {
  int dim = 1;
  double inner = 0.0;
  double outer = 1.0;

  double volume() const;
  bool contains(double r) const { return r >= inner && r < outer; }
};

/// Dyadic shell Q_{k,l} around a cube of side 2^L.
///
/// (0,0) is the cube itself. Otherwise the x-band is 2^{L+k-1} <= |x| < 2^{L+k}
/// for k > 0 and |x| < 2^L for k = 0 (likewise for y with l).
struct Shell {
  int k = 0;
  int l = 0;
  int L = 0;

  void validate() const;  // throws ConfigError on negative indices
  bool is_core() const { return k == 0 && l == 0; }
  RadialBand x_band(int n) const;
  RadialBand y_band(int m) const;
  std::string label() const;
};

bool shell_contains(const Shell& s, const PointPair& pt);

/// Part of {|x| < 2^L, |y| < 2^L} not covered by the cube (the annulus/cube
/// mismatch of the shell family).
bool in_shell_gap(int L, const PointPair& pt);

enum class ShellCaseLabel { Case1, Case2, Case3, Case4 };

struct ShellCase {
  ShellCaseLabel label;
  bool rho_k_dominates;    // rho (k + L) >= l + L
  bool k_plus_L_nonneg;    // k + L >= 0
  bool l_at_least_k;       // l >= k
  bool l_at_least_rho1_L;  // l >= (rho - 1) L

  std::string to_string() const;  // "Case2[rk+,kL+,l<k,lrL+]"
};

ShellCase shell_case(const Shell& s, const ExponentConfig& cfg);
const char* to_string(ShellCaseLabel label);

/// U x {|y| <= R} with U = [2, 4]^n.
struct CounterexampleRegion {
  int n = 1;
  int m = 1;
  double R = 10.0;

  bool contains(const PointPair& pt) const;
};

/// One factor of a product region: a box in the coordinates of that factor
/// or a radial band.
using AxisPart = std::variant<std::vector<Interval>, RadialBand>;

/// X-part times Y-part.
struct ProductRegion {
  AxisPart x;
  AxisPart y;
};

/// Integration regions accepted by the quadrature engine.
using Region = std::variant<Shell, CounterexampleRegion, Cube, Box, ProductRegion>;

/// Every region as a product region (shells: radial bands, or the cube).
ProductRegion to_product_region(const Region& region, int n, int m);

}  // namespace flagint
