#include "flagint/graded_rule.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include "flagint/errors.hpp"

namespace flagint {

namespace {

constexpr int kMaxOrder = 64;

GaussLegendre build_gauss_legendre(int order) {
  GaussLegendre g;
  const auto zeros = boost::math::legendre_p_zeros<double>(order);
  std::vector<std::pair<double, double>> pts;
  for (double z : zeros) {
    const double d = boost::math::legendre_p_prime<double>(order, z);
    const double w = 2.0 / ((1.0 - z * z) * d * d);
    pts.emplace_back(z, w);
    if (z != 0.0) pts.emplace_back(-z, w);
  }
  std::sort(pts.begin(), pts.end());
  for (auto [z, w] : pts) {
    g.nodes.push_back(0.5 * (z + 1.0));
    g.weights.push_back(0.5 * w);
  }
  return g;
}

struct Piece {
  std::vector<double> lo;
  std::vector<double> hi;
};

double distance_to_origin(const Piece& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.lo.size(); ++i) {
    const double d = p.lo[i] > 0 ? p.lo[i] : (p.hi[i] < 0 ? -p.hi[i] : 0.0);
    s += d * d;
  }
  return std::sqrt(s);
}

double max_side(const Piece& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.lo.size(); ++i) s = std::max(s, p.hi[i] - p.lo[i]);
  return s;
}

void emit_leaf(const Piece& p, bool substituted, std::vector<GradedLeaf>& out) {
  GradedLeaf leaf;
  leaf.substituted = substituted;
  for (std::size_t i = 0; i < p.lo.size(); ++i) {
    const bool lo_near = std::abs(p.lo[i]) <= std::abs(p.hi[i]);
    leaf.near.push_back(lo_near ? p.lo[i] : p.hi[i]);
    leaf.far.push_back(lo_near ? p.hi[i] : p.lo[i]);
  }
  out.push_back(std::move(leaf));
}

constexpr int kMaxDepth = 400;

void subdivide(const Piece& p, double cutoff, int depth, std::vector<GradedLeaf>& out) {
  const double size = max_side(p);
  if (!(size > 0)) return;
  const double dist = distance_to_origin(p);
  if (dist >= size) {
    emit_leaf(p, false, out);
    return;
  }
  if (size <= cutoff || depth > kMaxDepth) {
    emit_leaf(p, true, out);
    return;
  }
  const std::size_t d = p.lo.size();
  std::vector<std::size_t> axes;
  if (dist == 0.0) {
    for (std::size_t i = 0; i < d; ++i) {
      if (2 * (p.hi[i] - p.lo[i]) > size) axes.push_back(i);
    }
  } else {
    std::size_t longest = 0;
    for (std::size_t i = 1; i < d; ++i) {
      if (p.hi[i] - p.lo[i] > p.hi[longest] - p.lo[longest]) longest = i;
    }
    axes.push_back(longest);
  }
  const std::size_t children = std::size_t{1} << axes.size();
  for (std::size_t c = 0; c < children; ++c) {
    Piece child = p;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const std::size_t i = axes[k];
      const double mid = 0.5 * (p.lo[i] + p.hi[i]);
      if (c >> k & 1) child.lo[i] = mid;
      else child.hi[i] = mid;
    }
    subdivide(child, cutoff, depth + 1, out);
  }
}

}  // namespace

const GaussLegendre& gauss_legendre(int order) {
  if (order < 1 || order > kMaxOrder) throw ConfigError("Gauss-Legendre order must be in [1, 64]");
  static std::array<GaussLegendre, kMaxOrder + 1> cache;
  static std::array<std::once_flag, kMaxOrder + 1> once;
  std::call_once(once[order], [order] { cache[order] = build_gauss_legendre(order); });
  return cache[order];
}

const KronrodPair& kronrod15() {
  static const KronrodPair pair = [] {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    const auto& ka = GK::abscissa();
    const auto& kw = GK::weights();
    const auto& ga = G::abscissa();
    const auto& gw = G::weights();
    std::vector<std::array<double, 3>> pts;
    for (std::size_t i = 0; i < ka.size(); ++i) {
      double gweight = 0.0;
      for (std::size_t j = 0; j < ga.size(); ++j) {
        if (std::abs(ga[j] - ka[i]) < 1e-12) gweight = gw[j];
      }
      pts.push_back({ka[i], kw[i], gweight});
      if (ka[i] != 0.0) pts.push_back({-ka[i], kw[i], gweight});
    }
    std::sort(pts.begin(), pts.end());
    KronrodPair kp;
    for (const auto& p : pts) {
      kp.nodes.push_back(0.5 * (p[0] + 1.0));
      kp.kronrod_weights.push_back(0.5 * p[1]);
      kp.gauss_weights.push_back(0.5 * p[2]);
    }
    return kp;
  }();
  return pair;
}

std::vector<GradedLeaf> graded_leaves(std::span<const Interval> box, std::span<const double> s,
                                      double cutoff) {
  if (box.size() != s.size()) throw ConfigError("graded_leaves: box and point dimensions differ");
  if (!(cutoff > 0)) throw ConfigError("graded_leaves: cutoff must be positive");
  std::vector<Piece> pieces{Piece{}};
  for (std::size_t i = 0; i < box.size(); ++i) {
    const double lo = box[i].lo - s[i];
    const double hi = box[i].hi - s[i];
    std::vector<Piece> next;
    for (const Piece& p : pieces) {
      if (lo < 0 && hi > 0) {
        Piece a = p, b = p;
        a.lo.push_back(lo);
        a.hi.push_back(0.0);
        b.lo.push_back(0.0);
        b.hi.push_back(hi);
        next.push_back(std::move(a));
        next.push_back(std::move(b));
      } else {
        Piece a = p;
        a.lo.push_back(lo);
        a.hi.push_back(hi);
        next.push_back(std::move(a));
      }
    }
    pieces = std::move(next);
  }
  std::vector<GradedLeaf> out;
  for (const Piece& p : pieces) subdivide(p, cutoff, 0, out);
  return out;
}

const KronrodPair& kronrod7() {
  static const KronrodPair pair = [] {
    // Kronrod extension of the 3-point Gauss rule on [-1, 1].
    const std::array<std::array<double, 3>, 4> half{{
        {0.0, 0.450916538658474142345110087045571, 8.0 / 9.0},
        {0.434243749346802558002071502844628, 0.401397414775962222905051818618432, 0.0},
        {0.774596669241483377035853079956480, 0.268488089868333440728569280666710, 5.0 / 9.0},
        {0.960491268708020283423507092629080, 0.104656226026467265193823857192073, 0.0},
    }};
    std::vector<std::array<double, 3>> pts;
    for (const auto& p : half) {
      pts.push_back(p);
      if (p[0] != 0.0) pts.push_back({-p[0], p[1], p[2]});
    }
    std::sort(pts.begin(), pts.end());
    KronrodPair kp;
    for (const auto& p : pts) {
      kp.nodes.push_back(0.5 * (p[0] + 1.0));
      kp.kronrod_weights.push_back(0.5 * p[1]);
      kp.gauss_weights.push_back(0.5 * p[2]);
    }
    return kp;
  }();
  return pair;
}

std::vector<double> graded_breakpoints(double a, double b, std::span<const double> features,
                                       double cutoff) {
  std::vector<double> marks{a, b};
  for (double f : features) {
    if (f > a && f < b) marks.push_back(f);
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  auto is_feature = [&](double v) {
    return std::any_of(features.begin(), features.end(), [v](double f) { return f == v; });
  };

  std::vector<double> out{marks.front()};
  for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
    const double lo = marks[i];
    const double hi = marks[i + 1];
    const bool grade_lo = is_feature(lo);
    const bool grade_hi = is_feature(hi);
    std::vector<double> inner;
    if (grade_lo && grade_hi) {
      const double mid = 0.5 * (lo + hi);
      for (double r = 0.5 * (mid - lo); r > cutoff; r /= 2) inner.push_back(lo + r);
      inner.push_back(mid);
      for (double r = 0.5 * (hi - mid); r > cutoff; r /= 2) inner.push_back(hi - r);
    } else if (grade_lo) {
      for (double r = 0.5 * (hi - lo); r > cutoff; r /= 2) inner.push_back(lo + r);
    } else if (grade_hi) {
      for (double r = 0.5 * (hi - lo); r > cutoff; r /= 2) inner.push_back(hi - r);
    }
    std::sort(inner.begin(), inner.end());
    for (double v : inner) {
      if (v > out.back() && v < hi) out.push_back(v);
    }
    out.push_back(hi);
  }
  return out;
}

}  // namespace flagint
