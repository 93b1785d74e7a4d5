#include "flagint/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flagint/errors.hpp"

namespace flagint {

double euclidean_norm(std::span<const double> v) {
  double scale = 0.0;
  for (double c : v) scale = std::max(scale, std::abs(c));
  if (scale == 0.0 || v.size() == 1) return scale;
  double s = 0.0;
  for (double c : v) s += (c / scale) * (c / scale);
  return scale * std::sqrt(s);
}

double PointPair::norm_x() const { return euclidean_norm(x); }
double PointPair::norm_y() const { return euclidean_norm(y); }

namespace {

void check_dims(const PointPair& pt, int n, int m) {
  if (static_cast<int>(pt.x.size()) != n || static_cast<int>(pt.y.size()) != m) {
    throw ConfigError("point has dimensions (" + std::to_string(pt.x.size()) + "," +
                      std::to_string(pt.y.size()) + "), kernel expects (" + std::to_string(n) +
                      "," + std::to_string(m) + ")");
  }
}

}  // namespace

FlagKernel::FlagKernel(const ExponentConfig& cfg)
    : cfg_(cfg),
      rho_(cfg.rho_d()),
      x_decay_(cfg.n - cfg.alpha_d()),
      y_decay_(cfg.m - cfg.beta_d()) {
  cfg_.validate();
}

double FlagKernel::from_norms(double rx, double ry) const noexcept {
  return std::pow(rx, -x_decay_) * std::pow(std::pow(rx, rho_) + ry, -y_decay_);
}

double FlagKernel::operator()(const PointPair& pt) const {
  check_dims(pt, cfg_.n, cfg_.m);
  const double rx = pt.norm_x();
  if (!(rx >= kSingularThreshold)) throw SingularityError("flag kernel evaluated at x = 0");
  return from_norms(rx, pt.norm_y());
}

DominatingKernel::DominatingKernel(const ExponentConfig& cfg, const DerivedExponents& ab)
    : ab_(ab),
      n_(cfg.n),
      m_(cfg.m),
      x_decay_(cfg.n - ab.a_d()),
      y_decay_(cfg.m - ab.b_d()) {
  if (ab.a <= 0 || ab.a > cfg.alpha || ab.b < cfg.beta || ab.b >= cfg.m) {
    throw PreconditionError("derived exponents out of range for " + cfg.describe());
  }
}

DominatingKernel::DominatingKernel(const ExponentConfig& cfg) : DominatingKernel(cfg, derive_ab(cfg)) {}

double DominatingKernel::from_norms(double rx, double ry) const noexcept {
  return std::pow(rx, -x_decay_) * std::pow(ry, -y_decay_);
}

double DominatingKernel::operator()(const PointPair& pt) const {
  check_dims(pt, n_, m_);
  const double rx = pt.norm_x();
  const double ry = pt.norm_y();
  if (!(rx >= kSingularThreshold) || !(ry >= kSingularThreshold)) {
    throw SingularityError("product kernel evaluated on x = 0 or y = 0");
  }
  return from_norms(rx, ry);
}

double kernel_eval(const FlagKernel& k, const PointPair& pt) { return k(pt); }

double dominating_kernel_eval(const FlagKernel& k, const DerivedExponents& ab, const PointPair& pt) {
  return DominatingKernel(k.config(), ab)(pt);
}

double default_gradient_step(const PointPair& pt) { return 1e-5 * std::max(pt.norm_x(), 1.0); }

namespace {

struct Gradient {
  std::vector<double> gx;
  std::vector<double> gy;

  double norm_x() const { return euclidean_norm(gx); }
  double norm_y() const { return euclidean_norm(gy); }
  double norm() const { return std::hypot(norm_x(), norm_y()); }
};

Gradient central_gradient(const FlagKernel& k, const PointPair& pt, double hx, double hy) {
  Gradient g{std::vector<double>(pt.x.size()), std::vector<double>(pt.y.size())};
  PointPair probe = pt;
  for (std::size_t i = 0; i < pt.x.size(); ++i) {
    probe.x[i] = pt.x[i] + hx;
    const double up = k(probe);
    probe.x[i] = pt.x[i] - hx;
    const double down = k(probe);
    probe.x[i] = pt.x[i];
    g.gx[i] = (up - down) / (2 * hx);
  }
  for (std::size_t j = 0; j < pt.y.size(); ++j) {
    probe.y[j] = pt.y[j] + hy;
    const double up = k(probe);
    probe.y[j] = pt.y[j] - hy;
    const double down = k(probe);
    probe.y[j] = pt.y[j];
    g.gy[j] = (up - down) / (2 * hy);
  }
  return g;
}

// Gradient at the finer step, after checking it against the coarser one.
Gradient checked_gradient(const FlagKernel& k, const PointPair& pt, double h) {
  const double rx = pt.norm_x();
  if (!(h > 0) || !(rx > 2 * h)) {
    throw AccuracyError("finite-difference step too large relative to |x|", 0.0, h);
  }
  const double y_scale = (std::pow(rx, k.rho()) + pt.norm_y()) / rx;
  const Gradient coarse = central_gradient(k, pt, h, h * y_scale);
  Gradient fine = central_gradient(k, pt, h / 2, h * y_scale / 2);
  const double a = coarse.norm();
  const double b = fine.norm();
  const double scale = std::max(std::abs(b), k(pt) / rx);
  if (std::abs(a - b) > 1e-4 * scale) {
    throw AccuracyError("finite-difference gradient not converged (h vs h/2)", b, std::abs(a - b));
  }
  return fine;
}

}  // namespace

double gradient_bound_ratio(const FlagKernel& k, const PointPair& pt, double h) {
  const Gradient g = checked_gradient(k, pt, h);
  const double rx = pt.norm_x();
  const double ry = pt.norm_y();
  const double bound = std::max(1.0 / rx, 1.0 / (std::pow(rx, k.rho()) + ry));
  return g.norm() / (k(pt) * bound);
}

SplitGradientRatios split_gradient_ratios(const FlagKernel& k, const PointPair& pt, double h) {
  const Gradient g = checked_gradient(k, pt, h);
  const double rx = pt.norm_x();
  const double ry = pt.norm_y();
  const double value = k(pt);
  const double mixed = std::pow(rx, k.rho()) + ry;
  const double xbound = std::max(1.0 / rx, std::pow(rx, k.rho() - 1) / mixed);
  return {g.norm_x() / (value * xbound), g.norm_y() / (value / mixed)};
}

}  // namespace flagint
