#include "flagint/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flagint/errors.hpp"

namespace flagint {

namespace {

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

double sup_norm(const PointPair& pt) {
  double s = 0.0;
  for (double c : pt.x) s = std::max(s, std::abs(c));
  for (double c : pt.y) s = std::max(s, std::abs(c));
  return s;
}

}  // namespace

double Box::volume() const {
  double v = 1.0;
  for (const auto& i : x) v *= i.width();
  for (const auto& i : y) v *= i.width();
  return v;
}

bool Box::contains(const PointPair& pt) const {
  if (pt.x.size() != x.size() || pt.y.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (pt.x[i] < x[i].lo || pt.x[i] > x[i].hi) return false;
  }
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (pt.y[j] < y[j].lo || pt.y[j] > y[j].hi) return false;
  }
  return true;
}

double Cube::side() const { return std::ldexp(1.0, L); }
double Cube::volume() const { return std::pow(side(), n + m); }

bool Cube::contains(const PointPair& pt) const { return sup_norm(pt) <= half_side(); }

Box Cube::as_box() const {
  const double h = half_side();
  return {std::vector<Interval>(n, {-h, h}), std::vector<Interval>(m, {-h, h})};
}

double RadialBand::volume() const {
  return unit_ball_volume(dim) * (std::pow(outer, dim) - std::pow(inner, dim));
}

void Shell::validate() const {
  if (k < 0 || l < 0) throw ConfigError("shell indices must be non-negative, got " + label());
}

RadialBand Shell::x_band(int n) const {
  if (k == 0) return {n, 0.0, std::ldexp(1.0, L)};
  return {n, std::ldexp(1.0, L + k - 1), std::ldexp(1.0, L + k)};
}

RadialBand Shell::y_band(int m) const {
  if (l == 0) return {m, 0.0, std::ldexp(1.0, L)};
  return {m, std::ldexp(1.0, L + l - 1), std::ldexp(1.0, L + l)};
}

std::string Shell::label() const {
  return "Q(" + std::to_string(k) + "," + std::to_string(l) + ";L=" + std::to_string(L) + ")";
}

bool shell_contains(const Shell& s, const PointPair& pt) {
  s.validate();
  if (s.is_core()) {
    return Cube{static_cast<int>(pt.x.size()), static_cast<int>(pt.y.size()), s.L}.contains(pt);
  }
  const int n = static_cast<int>(pt.x.size());
  const int m = static_cast<int>(pt.y.size());
  return s.x_band(n).contains(pt.norm_x()) && s.y_band(m).contains(pt.norm_y());
}

bool in_shell_gap(int L, const PointPair& pt) {
  const double r = std::ldexp(1.0, L);
  const bool in_core = pt.norm_x() < r && pt.norm_y() < r;
  return in_core && !Cube{static_cast<int>(pt.x.size()), static_cast<int>(pt.y.size()), L}.contains(pt);
}

const char* to_string(ShellCaseLabel label) {
  switch (label) {
    case ShellCaseLabel::Case1: return "Case1";
    case ShellCaseLabel::Case2: return "Case2";
    case ShellCaseLabel::Case3: return "Case3";
    case ShellCaseLabel::Case4: return "Case4";
  }
  return "?";
}

std::string ShellCase::to_string() const {
  std::string s = flagint::to_string(label);
  s += "[rk";
  s += rho_k_dominates ? '+' : '-';
  s += ",kL";
  s += k_plus_L_nonneg ? '+' : '-';
  s += ",lk";
  s += l_at_least_k ? '+' : '-';
  s += ",lrL";
  s += l_at_least_rho1_L ? '+' : '-';
  s += ']';
  return s;
}

ShellCase shell_case(const Shell& s, const ExponentConfig& cfg) {
  ShellCaseLabel label = ShellCaseLabel::Case1;
  if (s.k > 0 && s.l > 0) label = ShellCaseLabel::Case2;
  else if (s.k > 0) label = ShellCaseLabel::Case3;
  else if (s.l > 0) label = ShellCaseLabel::Case4;
  return {label,
          cfg.rho * (s.k + s.L) >= s.l + s.L,
          s.k + s.L >= 0,
          s.l >= s.k,
          Rational(s.l) >= (cfg.rho - 1) * s.L};
}

bool CounterexampleRegion::contains(const PointPair& pt) const {
  for (double c : pt.x) {
    if (c < 2.0 || c > 4.0) return false;
  }
  return pt.norm_y() <= R;
}

ProductRegion to_product_region(const Region& region, int n, int m) {
  struct Visitor {
    int n, m;
    ProductRegion operator()(const Shell& s) const {
      s.validate();
      if (s.is_core()) return (*this)(Cube{n, m, s.L});
      return {s.x_band(n), s.y_band(m)};
    }
    ProductRegion operator()(const CounterexampleRegion& r) const {
      if (r.n != n || r.m != m) throw ConfigError("counterexample region has the wrong dimensions");
      if (!(r.R > 0)) throw ConfigError("counterexample radius must be positive");
      return {std::vector<Interval>(n, {2.0, 4.0}), RadialBand{m, 0.0, r.R}};
    }
    ProductRegion operator()(const Cube& c) const {
      if (c.n != n || c.m != m) throw ConfigError("cube has the wrong dimensions");
      return (*this)(c.as_box());
    }
    ProductRegion operator()(const Box& b) const {
      if (static_cast<int>(b.x.size()) != n || static_cast<int>(b.y.size()) != m) {
        throw ConfigError("box has the wrong dimensions");
      }
      return {b.x, b.y};
    }
    ProductRegion operator()(const ProductRegion& p) const { return p; }
  };
  return std::visit(Visitor{n, m}, region);
}

}  // namespace flagint
