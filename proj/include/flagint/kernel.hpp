#pragma once

#include <span>
#include <vector>

#include "flagint/exponents.hpp"

namespace flagint {

/// A point (x, y) of R^n x R^m.
struct PointPair {
  std::vector<double> x;
  std::vector<double> y;

  double norm_x() const;
  double norm_y() const;
};

double euclidean_norm(std::span<const double> v);

/// |x| below this is treated as the singular set x = 0.
inline constexpr double kSingularThreshold = 1e-300;

/// The flag kernel |x|^{-(n-alpha)} (|x|^rho + |y|)^{-(m-beta)}, x != 0.
class FlagKernel {
 public:
  explicit FlagKernel(const ExponentConfig& cfg);

  const ExponentConfig& config() const { return cfg_; }
  int n() const { return cfg_.n; }
  int m() const { return cfg_.m; }
  double rho() const { return rho_; }
  double x_decay() const { return x_decay_; }  // n - alpha
  double y_decay() const { return y_decay_; }  // m - beta

  /// Evaluates at a point; throws SingularityError when |x| is ~0 and
  /// ConfigError on a dimension mismatch.
  double operator()(const PointPair& pt) const;

  /// Same kernel as a function of the two norms. No checks; rx > 0.
  double from_norms(double rx, double ry) const noexcept;

  /// Total homogeneity degree under (x, y) -> (d x, d^rho y):
  /// kernel(d x, d^rho y) = d^{-degree()} kernel(x, y).
  double degree() const { return x_decay_ + rho_ * y_decay_; }

 private:
  ExponentConfig cfg_;
  double rho_;
  double x_decay_;
  double y_decay_;
};

/// Product kernel |x|^{-(n-a)} |y|^{-(m-b)} built from derive_ab(cfg). It
/// dominates the flag kernel pointwise.
class DominatingKernel {
 public:
  DominatingKernel(const ExponentConfig& cfg, const DerivedExponents& ab);
  explicit DominatingKernel(const ExponentConfig& cfg);

  const DerivedExponents& exponents() const { return ab_; }
  int n() const { return n_; }
  int m() const { return m_; }
  double x_decay() const { return x_decay_; }  // n - a
  double y_decay() const { return y_decay_; }  // m - b

  /// Throws SingularityError if x = 0 or y = 0.
  double operator()(const PointPair& pt) const;
  double from_norms(double rx, double ry) const noexcept;

 private:
  DerivedExponents ab_;
  int n_;
  int m_;
  double x_decay_;
  double y_decay_;
};

/// kernel_eval / dominating_kernel_eval in free-function form.
double kernel_eval(const FlagKernel& k, const PointPair& pt);
double dominating_kernel_eval(const FlagKernel& k, const DerivedExponents& ab, const PointPair& pt);

/// Default finite-difference step 1e-5 * max(|x|, 1).
double default_gradient_step(const PointPair& pt);

/// |grad K| / (K * max{1/|x|, 1/(|x|^rho + |y|)}) from central differences.
///
/// x-components use step h; y-components use the matching anisotropic step
/// h * (|x|^rho + |y|) / |x| so the ratio is dilation invariant. The gradient
/// is formed at h and h/2 and must agree to 1e-4 relative.
/// Throws AccuracyError if |x| <= 2h or the two steps disagree.
double gradient_bound_ratio(const FlagKernel& k, const PointPair& pt, double h);

struct SplitGradientRatios {
  double x_ratio;  // |grad_x K| / (K * max{1/|x|, |x|^{rho-1}/(|x|^rho+|y|)})
  double y_ratio;  // |grad_y K| / (K / (|x|^rho + |y|))
};

/// The sharper per-factor bounds; same differencing as gradient_bound_ratio.
SplitGradientRatios split_gradient_ratios(const FlagKernel& k, const PointPair& pt, double h);

}  // namespace flagint
