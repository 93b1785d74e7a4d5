#include "flagint/quadrature.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <span>

#include "flagint/errors.hpp"
#include "flagint/graded_rule.hpp"
#include "flagint/parallel.hpp"
#include "flagint/summation.hpp"

namespace flagint {

const char* to_string(QuadratureMethod method) {
  return method == QuadratureMethod::Grid ? "grid" : "monte-carlo";
}

QuadratureMethod parse_quadrature_method(const std::string& text) {
  if (text == "grid") return QuadratureMethod::Grid;
  if (text == "monte-carlo" || text == "mc") return QuadratureMethod::MonteCarlo;
  throw ConfigError("unknown quadrature method '" + text + "' (expected grid or monte-carlo)");
}

void QuadratureSpec::validate() const {
  if (samples <= 0) throw ConfigError("samples must be positive");
  if (points_per_axis < 4 || points_per_axis > 64) throw ConfigError("points_per_axis must be in [4, 64]");
  if (!(target_rel_error > 0)) throw ConfigError("target_rel_error must be positive");
  if (cutoff_exponent > 0 || cutoff_exponent < -60) throw ConfigError("cutoff_exponent must be in [-60, 0]");
  if (outer_depth < 0 || outer_depth > 30) throw ConfigError("outer_depth must be in [0, 30]");
  if (jobs < 0) throw ConfigError("jobs must be non-negative");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t stratum_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index));
}

// Uniform on (0, 1), never exactly 0.
double unit_draw(std::mt19937_64& gen) { return (static_cast<double>(gen() >> 11) + 0.5) * 0x1p-53; }

double clamp_gamma(double g) { return std::clamp(g, 1.0, 16.0); }

// Integrand model for the inner (convolution) integral.
struct InnerModel {
  bool product = false;  // kernel = rx^-xd * ry^-yd, otherwise the flag form
  double x_decay = 0.0;
  double y_decay = 0.0;
  double rho = 1.0;
  double gamma_u = 1.0;
  double gamma_v = 1.0;
  double k0 = 0.0;  // subtracted constant (flag form only)

  double eval(double rx, double ry) const {
    if (product) return std::pow(rx, -x_decay) * (y_decay == 0.0 ? 1.0 : std::pow(ry, -y_decay));
    return std::pow(rx, -x_decay) * std::pow(std::pow(rx, rho) + ry, -y_decay) - k0;
  }
};

InnerModel make_model(const ExponentConfig& cfg, KernelChoice kernel) {
  InnerModel m;
  if (kernel == KernelChoice::Flag) {
    m.x_decay = cfg.n - cfg.alpha_d();
    m.y_decay = cfg.m - cfg.beta_d();
    m.rho = cfg.rho_d();
    m.gamma_u = clamp_gamma(cfg.n / cfg.alpha_d());
    m.gamma_v = clamp_gamma(cfg.m / cfg.beta_d());
  } else {
    const DerivedExponents ab = derive_ab(cfg);
    m.product = true;
    m.x_decay = cfg.n - ab.a_d();
    m.y_decay = cfg.m - ab.b_d();
    m.gamma_u = clamp_gamma(cfg.n / ab.a_d());
    m.gamma_v = clamp_gamma(cfg.m / ab.b_d());
  }
  return m;
}

struct BlockNode {
  double r;  // norm of the offset from the singular point
  double w;  // weight including the cell profile
};
using BlockRule = std::vector<BlockNode>;

struct Cutoffs {
  double x;
  double y;
};

Cutoffs base_cutoffs(const TestFunction& f, const QuadratureSpec& spec) {
  const double c = std::ldexp(f.support_scale(), spec.cutoff_exponent);
  return {c, c};
}

// Tensor rule over the leaves of one coordinate block.
template <class Factor>
BlockRule block_rule(std::span<const Interval> box, std::span<const double> s, double cutoff,
                     double gamma, int order, int panels, Factor&& factor) {
  BlockRule out;
  const std::size_t d = box.size();
  if (d == 0) {
    out.push_back({0.0, 1.0});
    return out;
  }
  const GaussLegendre& gl = gauss_legendre(order);
  const std::size_t q = gl.nodes.size();
  std::vector<double> off(d * q);
  std::vector<double> wt(d * q);
  std::vector<std::size_t> idx(d);
  std::vector<GradedLeaf> leaves;
  std::vector<int> pidx(d, 0);
  std::vector<Interval> sub(d);
  while (true) {
    for (std::size_t i = 0; i < d; ++i) {
      const double h = box[i].width() / panels;
      sub[i] = {box[i].lo + h * pidx[i], pidx[i] + 1 == panels ? box[i].hi : box[i].lo + h * (pidx[i] + 1)};
    }
    for (auto& leaf : graded_leaves(sub, s, cutoff)) leaves.push_back(std::move(leaf));
    std::size_t i = 0;
    while (i < d && ++pidx[i] == panels) pidx[i++] = 0;
    if (i == d) break;
  }
  for (const GradedLeaf& leaf : leaves) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = 0; k < q; ++k) {
        const AxisMap am = map_leaf_axis(leaf.near[i], leaf.far[i], leaf.substituted, gamma, gl.nodes[k]);
        off[i * q + k] = am.offset;
        wt[i * q + k] = am.jacobian * gl.weights[k] * factor(i, s[i] + am.offset);
      }
    }
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      double r2 = 0.0;
      double w = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double o = off[i * q + idx[i]];
        r2 += o * o;
        w *= wt[i * q + idx[i]];
      }
      if (w != 0.0) out.push_back({std::sqrt(r2), w});
      std::size_t i = 0;
      while (i < d && ++idx[i] == q) idx[i++] = 0;
      if (i == d) break;
    }
  }
  return out;
}

constexpr int kSmoothPanels = 4;

struct CellSums {
  double value = 0.0;
  double magnitude = 0.0;
};

// Integral of (A + t)^{-decay} dt over [t0, t1], decay < 1, without
// cancellation when t1 - t0 is small against A + t0.
double power_piece(double A, double t0, double t1, double decay) {
  const double e = 1.0 - decay;
  const double base = A + t0;
  return std::pow(base, e) * std::expm1(e * std::log1p((t1 - t0) / base)) / e;
}

// Integral over [c, d] of (A + |y - v|)^{-decay} dv.
double flag_y_closed_form(double A, double y, double c, double d, double decay) {
  if (y <= c) return power_piece(A, c - y, d - y, decay);
  if (y >= d) return power_piece(A, y - d, y - c, decay);
  return power_piece(A, 0.0, y - c, decay) + power_piece(A, 0.0, d - y, decay);
}

CellSums grid_cell(const InnerModel& model, const FunctionCell& cell, const PointPair& pt,
                   const Cutoffs& cut, int order, bool closed_form_y) {
  auto xf = [&](std::size_t i, double t) { return cell.x_factor(i, t); };
  auto yf = [&](std::size_t j, double t) { return cell.y_factor(j, t); };
  // Smooth cells are split into panels so the bump profile is resolved.
  const int panels = cell.smooth ? kSmoothPanels : 1;
  const BlockRule U = block_rule(cell.box.x, pt.x, cut.x, model.gamma_u, order, panels, xf);

  if (model.product) {
    CompensatedSum xs;
    for (const auto& un : U) xs.add(un.w * std::pow(un.r, -model.x_decay));
    double y = 1.0;
    if (!pt.y.empty()) {
      const BlockRule V = block_rule(cell.box.y, pt.y, cut.y, model.gamma_v, order, panels, yf);
      CompensatedSum ys;
      for (const auto& vn : V) ys.add(vn.w * std::pow(vn.r, -model.y_decay));
      y = ys.value();
    }
    const double v = xs.value() * y;
    return {v, std::abs(v)};
  }

  CompensatedSum total;
  CompensatedSum mag;
  if (closed_form_y && !cell.smooth && pt.y.size() == 1) {
    const Interval& iv = cell.box.y[0];
    for (const auto& un : U) {
      const double a = model.rho == 1.0 ? un.r : std::pow(un.r, model.rho);
      const double vs = flag_y_closed_form(a, pt.y[0], iv.lo, iv.hi, model.y_decay);
      const double px = std::pow(un.r, -model.x_decay);
      total.add(un.w * (px * vs - model.k0 * iv.width()));
      mag.add(std::abs(un.w) * (px * vs + std::abs(model.k0) * iv.width()));
    }
    return {total.value(), mag.value()};
  }

  struct VRule {
    BlockRule nodes;
    double wsum = 0.0;
  };
  std::map<int, VRule> cache;
  for (const auto& un : U) {
    const double a = model.rho == 1.0 ? un.r : std::pow(un.r, model.rho);
    // Below |y - v| ~ |x - u|^rho / 4 the integrand in v is smooth.
    const double smooth = 0.25 * a;
    int key = INT_MIN;
    double vcut = cut.y;
    double gamma = model.gamma_v;
    if (smooth > cut.y) {
      key = std::ilogb(smooth);
      vcut = std::ldexp(1.0, key);
      gamma = 1.0;
    }
    auto it = cache.find(key);
    if (it == cache.end()) {
      VRule vr;
      vr.nodes = block_rule(cell.box.y, pt.y, vcut, gamma, order, panels, yf);
      for (const auto& vn : vr.nodes) vr.wsum += vn.w;
      it = cache.emplace(key, std::move(vr)).first;
    }
    double vs = 0.0;
    for (const auto& vn : it->second.nodes) vs += vn.w * std::pow(a + vn.r, -model.y_decay);
    const double px = std::pow(un.r, -model.x_decay);
    total.add(un.w * (px * vs - model.k0 * it->second.wsum));
    mag.add(std::abs(un.w) * (px * std::abs(vs) + std::abs(model.k0 * it->second.wsum)));
  }
  return {total.value(), mag.value()};
}

struct InnerEstimate {
  Estimate est;
  double magnitude = 0.0;  // integral of |f| times the kernel (roundoff scale)
};

InnerEstimate inner_grid(const InnerModel& model, const TestFunction& f, const PointPair& pt,
                         const QuadratureSpec& spec) {
  const Cutoffs cut = base_cutoffs(f, spec);
  const int hi = spec.points_per_axis;
  const int lo = std::max(2, hi / 2);
  CompensatedSum total;
  CompensatedSum err;
  CompensatedSum mag;
  for (const auto& cell : f.cells()) {
    if (cell.value == 0.0) continue;
    const CellSums h = grid_cell(model, cell, pt, cut, hi, spec.closed_form_y);
    const CellSums l = grid_cell(model, cell, pt, cut, lo, spec.closed_form_y);
    total.add(cell.value * h.value);
    err.add(std::abs(cell.value) * std::abs(h.value - l.value));
    mag.add(std::abs(cell.value) * h.magnitude);
  }
  const double m = mag.value();
  return {{total.value(), err.value() + 64 * 0x1p-52 * m}, m};
}

// Stratified Monte Carlo: strata are (function cell) x (x leaf) x (y leaf).
InnerEstimate inner_mc(const InnerModel& model, const TestFunction& f, const PointPair& pt,
                       const QuadratureSpec& spec) {
  struct Stratum {
    const FunctionCell* cell;
    const GradedLeaf* u;
    const GradedLeaf* v;
  };
  Cutoffs cut = base_cutoffs(f, spec);
  std::vector<std::vector<GradedLeaf>> uleaves;
  std::vector<std::vector<GradedLeaf>> vleaves;
  std::vector<Stratum> strata;
  const GradedLeaf empty_leaf;
  while (true) {
    uleaves.clear();
    vleaves.clear();
    strata.clear();
    for (const auto& cell : f.cells()) {
      uleaves.push_back(graded_leaves(cell.box.x, pt.x, cut.x));
      vleaves.push_back(pt.y.empty() ? std::vector<GradedLeaf>{empty_leaf}
                                     : graded_leaves(cell.box.y, pt.y, cut.y));
    }
    std::size_t count = 0;
    for (std::size_t c = 0; c < f.cells().size(); ++c) {
      if (f.cells()[c].value != 0.0) count += uleaves[c].size() * vleaves[c].size();
    }
    if (count * 4 <= static_cast<std::size_t>(spec.samples) || cut.x > f.support_scale()) {
      for (std::size_t c = 0; c < f.cells().size(); ++c) {
        if (f.cells()[c].value == 0.0) continue;
        for (const auto& u : uleaves[c]) {
          for (const auto& v : vleaves[c]) strata.push_back({&f.cells()[c], &u, &v});
        }
      }
      break;
    }
    cut.x *= 16;
    cut.y *= 16;
  }
  if (strata.empty()) return {};

  const long per = std::max<long>(4, spec.samples / static_cast<long>(strata.size()));
  CompensatedSum total;
  CompensatedSum var;
  CompensatedSum mag;
  std::vector<double> ox(pt.x.size());
  std::vector<double> oy(pt.y.size());
  for (std::size_t s = 0; s < strata.size(); ++s) {
    const Stratum& st = strata[s];
    std::mt19937_64 gen(stratum_seed(spec.seed, s));
    double mean = 0.0;
    double m2 = 0.0;
    double amean = 0.0;
    for (long i = 0; i < per; ++i) {
      double w = st.cell->value;
      double r2 = 0.0;
      for (std::size_t a = 0; a < ox.size(); ++a) {
        const AxisMap am = map_leaf_axis(st.u->near[a], st.u->far[a], st.u->substituted, model.gamma_u,
                                         unit_draw(gen));
        w *= am.jacobian * st.cell->x_factor(a, pt.x[a] + am.offset);
        r2 += am.offset * am.offset;
      }
      const double rx = std::sqrt(r2);
      r2 = 0.0;
      for (std::size_t b = 0; b < oy.size(); ++b) {
        const AxisMap am = map_leaf_axis(st.v->near[b], st.v->far[b], st.v->substituted, model.gamma_v,
                                         unit_draw(gen));
        w *= am.jacobian * st.cell->y_factor(b, pt.y[b] + am.offset);
        r2 += am.offset * am.offset;
      }
      const double g = w * model.eval(rx, std::sqrt(r2));
      const double delta = g - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (g - mean);
      amean += (std::abs(g) - amean) / static_cast<double>(i + 1);
    }
    total.add(mean);
    var.add(m2 / static_cast<double>(per - 1) / static_cast<double>(per));
    mag.add(amean);
  }
  return {{total.value(), 3.0 * std::sqrt(std::max(0.0, var.value()))}, mag.value()};
}

InnerEstimate inner_estimate(const InnerModel& model, const TestFunction& f, const PointPair& pt,
                             const QuadratureSpec& spec) {
  if (f.is_zero()) return {};
  return spec.method == QuadratureMethod::Grid ? inner_grid(model, f, pt, spec) : inner_mc(model, f, pt, spec);
}

void check_grid_dimension(int dims, const QuadratureSpec& spec) {
  if (spec.method == QuadratureMethod::Grid && dims > 4) {
    throw ConfigError("grid quadrature is limited to n + m <= 4; use the monte-carlo method");
  }
}

void check_inputs(const ExponentConfig& cfg, const TestFunction& f, const QuadratureSpec& spec) {
  cfg.validate();
  spec.validate();
  if (f.n() != cfg.n || f.m() != cfg.m) throw ConfigError("test function dimensions do not match the exponents");
  check_grid_dimension(cfg.n + cfg.m, spec);
}

void check_point(const ExponentConfig& cfg, const PointPair& pt) {
  if (static_cast<int>(pt.x.size()) != cfg.n || static_cast<int>(pt.y.size()) != cfg.m) {
    throw ConfigError("evaluation point dimensions do not match the exponents");
  }
}

Estimate checked(const InnerEstimate& r, const QuadratureSpec& spec, const char* what) {
  const Estimate& e = r.est;
  if (!std::isfinite(e.value) || e.error > spec.target_rel_error * std::abs(e.value) + 1e-13 * r.magnitude) {
    throw AccuracyError(std::string(what) + ": error estimate " + std::to_string(e.error) +
                            " exceeds the target for value " + std::to_string(e.value),
                        e.value, e.error);
  }
  return e;
}

}  // namespace

Estimate apply_operator(const ExponentConfig& cfg, const TestFunction& f, const PointPair& pt,
                        const QuadratureSpec& spec, KernelChoice kernel) {
  check_inputs(cfg, f, spec);
  check_point(cfg, pt);
  return checked(inner_estimate(make_model(cfg, kernel), f, pt, spec), spec, "apply_operator");
}

Estimate apply_operator_subtracted(const ExponentConfig& cfg, const TestFunction& f,
                                   const PointPair& pt, const QuadratureSpec& spec) {
  check_inputs(cfg, f, spec);
  check_point(cfg, pt);
  InnerModel model = make_model(cfg, KernelChoice::Flag);
  model.k0 = FlagKernel(cfg)(pt);
  return checked(inner_estimate(model, f, pt, spec), spec, "apply_operator_subtracted");
}

Estimate apply_riesz_1d(const Rational& alpha, const TestFunction& f, double x, const QuadratureSpec& spec) {
  spec.validate();
  if (alpha <= 0 || alpha >= 1) throw ConfigError("Riesz potential needs 0 < alpha < 1");
  if (f.n() != 1 || f.m() != 0) throw ConfigError("Riesz potential needs a function on R (n = 1, m = 0)");
  const double a = to_double(alpha);
  InnerModel model;
  model.product = true;
  model.x_decay = 1.0 - a;
  model.gamma_u = clamp_gamma(1.0 / a);
  return checked(inner_estimate(model, f, PointPair{{x}, {}}, spec), spec, "apply_riesz_1d");
}

// ---------------------------------------------------------------------------
// Outer integrals over regions.

namespace {

// Parameterisation of one factor (x or y) of a product region.
struct PartChart {
  enum class Kind { Cartesian, Mirror, Polar, Spherical } kind = Kind::Cartesian;
  int dim = 1;
  double sign = 1.0;
  std::vector<std::vector<double>> breaks;  // per parameter

  double map(const double* p, double* z) const {
    switch (kind) {
      case Kind::Cartesian:
        for (int i = 0; i < dim; ++i) z[i] = p[i];
        return 1.0;
      case Kind::Mirror:
        z[0] = sign * p[0];
        return 1.0;
      case Kind::Polar:
        z[0] = p[0] * std::cos(p[1]);
        z[1] = p[0] * std::sin(p[1]);
        return p[0];
      case Kind::Spherical: {
        const double st = std::sin(p[1]);
        z[0] = p[0] * st * std::cos(p[2]);
        z[1] = p[0] * st * std::sin(p[2]);
        z[2] = p[0] * std::cos(p[1]);
        return p[0] * p[0] * st;
      }
    }
    return 0.0;
  }
};

std::vector<double> even_breaks(double lo, double hi, int pieces) {
  std::vector<double> b;
  for (int i = 0; i <= pieces; ++i) b.push_back(i == pieces ? hi : lo + (hi - lo) * i / pieces);
  return b;
}

std::vector<PartChart> part_charts(const AxisPart& part, const std::vector<std::vector<double>>& features,
                                   double cutoff) {
  std::vector<PartChart> out;
  if (const auto* box = std::get_if<std::vector<Interval>>(&part)) {
    PartChart c;
    c.kind = PartChart::Kind::Cartesian;
    c.dim = static_cast<int>(box->size());
    for (std::size_t i = 0; i < box->size(); ++i) {
      const Interval& iv = (*box)[i];
      if (!(iv.hi > iv.lo)) return {};
      c.breaks.push_back(graded_breakpoints(iv.lo, iv.hi, features[i], cutoff));
    }
    out.push_back(std::move(c));
    return out;
  }
  const auto& band = std::get<RadialBand>(part);
  if (band.inner < 0 || !(band.outer > band.inner)) return {};
  switch (band.dim) {
    case 1:
      for (double sign : {1.0, -1.0}) {
        std::vector<double> f;
        for (double e : features[0]) f.push_back(sign * e);
        PartChart c;
        c.kind = PartChart::Kind::Mirror;
        c.sign = sign;
        c.breaks.push_back(graded_breakpoints(band.inner, band.outer, f, cutoff));
        out.push_back(std::move(c));
      }
      return out;
    case 2: {
      PartChart c;
      c.kind = PartChart::Kind::Polar;
      c.dim = 2;
      c.breaks = {{band.inner, band.outer}, even_breaks(0.0, 2 * std::numbers::pi, 8)};
      out.push_back(std::move(c));
      return out;
    }
    case 3: {
      PartChart c;
      c.kind = PartChart::Kind::Spherical;
      c.dim = 3;
      c.breaks = {{band.inner, band.outer}, even_breaks(0.0, std::numbers::pi, 4),
                  even_breaks(0.0, 2 * std::numbers::pi, 8)};
      out.push_back(std::move(c));
      return out;
    }
    default:
      throw ConfigError("grid quadrature over radial bands needs dimension <= 3; use monte-carlo");
  }
}

struct OuterCell {
  std::size_t chart = 0;  // index into the combined chart list
  std::vector<double> lo;
  std::vector<double> hi;
  double value = 0.0;
  double err = 0.0;
  double inner_err = 0.0;
  std::size_t split_axis = 0;
};

struct OuterProblem {
  const InnerModel* model;
  const TestFunction* f;
  const QuadratureSpec* spec;
  double q;
  int n;
  int m;
  std::vector<std::pair<const PartChart*, const PartChart*>> charts;
  const KronrodPair* rule;
};

// Coordinates and Jacobian of a parameter point.
double map_point(const OuterProblem& P, const OuterCell& c, const double* param, PointPair& pt) {
  const auto& [cx, cy] = P.charts[c.chart];
  pt.x.resize(P.n);
  pt.y.resize(P.m);
  return cx->map(param, pt.x.data()) * cy->map(param + P.n, pt.y.data());
}

std::size_t points_per_cell(const OuterProblem& P) {
  std::size_t c = 1;
  for (int d = 0; d < P.n + P.m; ++d) c *= P.rule->nodes.size();
  return c;
}

void decode(std::size_t flat, std::size_t base, std::vector<std::size_t>& idx) {
  for (auto& i : idx) {
    i = flat % base;
    flat /= base;
  }
}

void evaluate_cells(const OuterProblem& P, std::vector<OuterCell>& cells, std::size_t first) {
  const std::size_t D = static_cast<std::size_t>(P.n + P.m);
  const std::size_t per = points_per_cell(P);
  const std::size_t nk = P.rule->nodes.size();
  const std::size_t count = (cells.size() - first) * per;
  std::vector<Estimate> values(count);
  std::vector<double> jac(count);

  parallel_for(count, P.spec->jobs == 0 ? default_jobs() : P.spec->jobs, [&](std::size_t t) {
    const OuterCell& c = cells[first + t / per];
    std::vector<std::size_t> idx(D);
    decode(t % per, nk, idx);
    std::vector<double> param(D);
    for (std::size_t d = 0; d < D; ++d) param[d] = c.lo[d] + (c.hi[d] - c.lo[d]) * P.rule->nodes[idx[d]];
    PointPair pt;
    jac[t] = map_point(P, c, param.data(), pt);
    values[t] = jac[t] == 0.0 ? Estimate{} : inner_estimate(*P.model, *P.f, pt, *P.spec).est;
  });

  std::vector<std::size_t> idx(D);
  for (std::size_t ci = first; ci < cells.size(); ++ci) {
    OuterCell& c = cells[ci];
    double vol = 1.0;
    for (std::size_t d = 0; d < D; ++d) vol *= c.hi[d] - c.lo[d];
    std::vector<double> g(per);
    CompensatedSum ik;
    CompensatedSum ig;
    CompensatedSum inner;
    std::vector<CompensatedSum> axis_sums(D);
    for (std::size_t j = 0; j < per; ++j) {
      const std::size_t t = (ci - first) * per + j;
      const double v = std::abs(values[t].value);
      g[j] = std::pow(v, P.q) * jac[t];
      decode(j, nk, idx);
      double wk = 1.0;
      double wg = 1.0;
      for (std::size_t d = 0; d < D; ++d) {
        wk *= P.rule->kronrod_weights[idx[d]];
        wg *= P.rule->gauss_weights[idx[d]];
      }
      ik.add(wk * g[j]);
      ig.add(wg * g[j]);
      inner.add(wk * jac[t] * P.q * std::pow(v, P.q - 1) * values[t].error);
      for (std::size_t a = 0; a < D; ++a) {
        const double wa = P.rule->gauss_weights[idx[a]];
        if (wa == 0.0) continue;
        axis_sums[a].add(wk / P.rule->kronrod_weights[idx[a]] * wa * g[j]);
      }
    }
    const double mean = ik.value();
    CompensatedSum resasc;
    CompensatedSum resabs;
    for (std::size_t j = 0; j < per; ++j) {
      decode(j, nk, idx);
      double wk = 1.0;
      for (std::size_t d = 0; d < D; ++d) wk *= P.rule->kronrod_weights[idx[d]];
      resasc.add(wk * std::abs(g[j] - mean));
      resabs.add(wk * std::abs(g[j]));
    }
    double err = std::abs(ik.value() - ig.value()) * vol;
    const double asc = resasc.value() * vol;
    if (asc > 0 && err > 0) err = asc * std::min(1.0, std::pow(200 * err / asc, 1.5));
    err = std::max(err, 50 * 0x1p-52 * resabs.value() * vol);
    c.value = mean * vol;
    c.err = err;
    c.inner_err = inner.value() * vol;
    double worst = -1.0;
    for (std::size_t a = 0; a < D; ++a) {
      const double e = std::abs(mean - axis_sums[a].value());
      if (e > worst) {
        worst = e;
        c.split_axis = a;
      }
    }
  }
}

constexpr std::size_t kMaxOuterCells = 6000;
constexpr std::size_t kMaxSplitsPerRound = 64;

struct Totals {
  double value;
  double outer_err;
  double inner_err;
};

Totals totals(const std::vector<OuterCell>& cells) {
  CompensatedSum v, e, i;
  for (const auto& c : cells) {
    v.add(c.value);
    e.add(c.err);
    i.add(c.inner_err);
  }
  return {v.value(), e.value(), i.value()};
}

std::vector<std::vector<double>> features_of(const TestFunction& f, bool x_block) {
  const int d = x_block ? f.n() : f.m();
  std::vector<std::vector<double>> out(d);
  for (const auto& c : f.cells()) {
    // I f is smooth across the edges of smooth cells.
    if (c.value == 0.0 || c.smooth) continue;
    for (int i = 0; i < d; ++i) {
      const Interval& iv = x_block ? c.box.x[i] : c.box.y[i];
      out[i].push_back(iv.lo);
      out[i].push_back(iv.hi);
    }
  }
  for (auto& v : out) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return out;
}

Estimate lq_mass_grid(const InnerModel& model, const TestFunction& f, const ProductRegion& region,
                      double q, const QuadratureSpec& spec) {
  const double cutoff = std::ldexp(f.support_scale(), -spec.outer_depth);
  const auto xcharts = part_charts(region.x, features_of(f, true), cutoff);
  const auto ycharts = part_charts(region.y, features_of(f, false), cutoff);

  OuterProblem P{&model, &f, &spec, q, f.n(), f.m(), {}, f.n() + f.m() <= 2 ? &kronrod15() : &kronrod7()};
  for (const auto& cx : xcharts) {
    for (const auto& cy : ycharts) P.charts.emplace_back(&cx, &cy);
  }

  std::vector<OuterCell> cells;
  const std::size_t D = static_cast<std::size_t>(f.n() + f.m());
  for (std::size_t ch = 0; ch < P.charts.size(); ++ch) {
    std::vector<const std::vector<double>*> br;
    for (const auto& b : P.charts[ch].first->breaks) br.push_back(&b);
    for (const auto& b : P.charts[ch].second->breaks) br.push_back(&b);
    std::vector<std::size_t> idx(D, 0);
    while (true) {
      OuterCell c;
      c.chart = ch;
      for (std::size_t d = 0; d < D; ++d) {
        c.lo.push_back((*br[d])[idx[d]]);
        c.hi.push_back((*br[d])[idx[d] + 1]);
      }
      cells.push_back(std::move(c));
      std::size_t d = 0;
      while (d < D && ++idx[d] + 1 == br[d]->size()) idx[d++] = 0;
      if (d == D) break;
    }
  }
  if (cells.empty()) return {};
  evaluate_cells(P, cells, 0);

  while (true) {
    const Totals t = totals(cells);
    const double goal = 0.5 * spec.target_rel_error * std::abs(t.value);
    if (t.outer_err <= goal) break;
    if (cells.size() >= kMaxOuterCells) {
      throw AccuracyError("lq_mass: outer refinement budget exhausted", t.value, t.outer_err + t.inner_err);
    }
    std::vector<std::size_t> order(cells.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cells[a].err > cells[b].err; });
    std::vector<std::size_t> chosen;
    double acc = 0.0;
    for (std::size_t i : order) {
      chosen.push_back(i);
      acc += cells[i].err;
      if (acc >= t.outer_err - goal || chosen.size() >= kMaxSplitsPerRound) break;
    }
    std::sort(chosen.begin(), chosen.end());
    std::vector<OuterCell> next;
    std::vector<OuterCell> children;
    std::size_t k = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (k < chosen.size() && chosen[k] == i) {
        ++k;
        const OuterCell& c = cells[i];
        const std::size_t a = c.split_axis;
        const double mid = 0.5 * (c.lo[a] + c.hi[a]);
        OuterCell left = c, right = c;
        left.hi[a] = mid;
        right.lo[a] = mid;
        children.push_back(std::move(left));
        children.push_back(std::move(right));
      } else {
        next.push_back(std::move(cells[i]));
      }
    }
    const std::size_t first = next.size();
    for (auto& c : children) next.push_back(std::move(c));
    cells = std::move(next);
    evaluate_cells(P, cells, first);
  }

  const Totals t = totals(cells);
  const Estimate e{t.value, t.outer_err + t.inner_err};
  if (e.error > spec.target_rel_error * std::abs(e.value)) {
    throw AccuracyError("lq_mass: error estimate " + std::to_string(e.error) + " exceeds the target for mass " +
                            std::to_string(e.value),
                        e.value, e.error);
  }
  return e;
}

// Monte Carlo outer integral: strata are products of part strata.
struct PartStratum {
  std::vector<Interval> box;  // Cartesian stratum
  RadialBand band;            // used when box is empty
  double volume = 0.0;

  void sample(std::mt19937_64& gen, double* z) const {
    if (!box.empty()) {
      for (std::size_t i = 0; i < box.size(); ++i) z[i] = box[i].lo + box[i].width() * unit_draw(gen);
      return;
    }
    const int d = band.dim;
    const double u = unit_draw(gen);
    const double r = std::pow(std::pow(band.inner, d) + u * (std::pow(band.outer, d) - std::pow(band.inner, d)),
                              1.0 / d);
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      // Box-Muller, one normal per pair of draws.
      const double g = std::sqrt(-2.0 * std::log(unit_draw(gen))) * std::cos(2 * std::numbers::pi * unit_draw(gen));
      z[i] = g;
      s += g * g;
    }
    s = std::sqrt(s);
    for (int i = 0; i < d; ++i) z[i] *= r / s;
  }
};

std::vector<PartStratum> part_strata(const AxisPart& part, const std::vector<std::vector<double>>& features,
                                     double cutoff) {
  std::vector<PartStratum> out;
  if (const auto* box = std::get_if<std::vector<Interval>>(&part)) {
    std::vector<std::vector<double>> br;
    for (std::size_t i = 0; i < box->size(); ++i) {
      if (!((*box)[i].hi > (*box)[i].lo)) return {};
      br.push_back(graded_breakpoints((*box)[i].lo, (*box)[i].hi, features[i], cutoff));
    }
    std::vector<std::size_t> idx(br.size(), 0);
    while (true) {
      PartStratum s;
      s.volume = 1.0;
      for (std::size_t i = 0; i < br.size(); ++i) {
        s.box.push_back({br[i][idx[i]], br[i][idx[i] + 1]});
        s.volume *= s.box.back().width();
      }
      out.push_back(std::move(s));
      std::size_t i = 0;
      while (i < br.size() && ++idx[i] + 1 == br[i].size()) idx[i++] = 0;
      if (i == br.size()) break;
    }
    return out;
  }
  const auto& band = std::get<RadialBand>(part);
  if (band.inner < 0 || !(band.outer > band.inner)) return {};
  // Four radial pieces of equal volume.
  const int d = band.dim;
  const double a = std::pow(band.inner, d);
  const double b = std::pow(band.outer, d);
  double prev = band.inner;
  for (int i = 1; i <= 4; ++i) {
    const double r = i == 4 ? band.outer : std::pow(a + (b - a) * i / 4.0, 1.0 / d);
    PartStratum s;
    s.band = {d, prev, r};
    s.volume = s.band.volume();
    out.push_back(std::move(s));
    prev = r;
  }
  return out;
}

Estimate lq_mass_mc(const InnerModel& model, const TestFunction& f, const ProductRegion& region, double q,
                    const QuadratureSpec& spec) {
  const double cutoff = std::ldexp(f.support_scale(), -spec.outer_depth);
  const auto xs = part_strata(region.x, features_of(f, true), cutoff);
  const auto ys = part_strata(region.y, features_of(f, false), cutoff);
  const std::size_t strata = xs.size() * ys.size();
  if (strata == 0) return {};
  const long outer_total = std::clamp<long>(spec.samples / 500, 256, 8192);
  const long per = std::max<long>(4, outer_total / static_cast<long>(strata));

  struct Sample {
    double g = 0.0;
    double dg = 0.0;
  };
  std::vector<Sample> samples(strata * static_cast<std::size_t>(per));
  parallel_for(strata, spec.jobs == 0 ? default_jobs() : spec.jobs, [&](std::size_t s) {
    const PartStratum& sx = xs[s / ys.size()];
    const PartStratum& sy = ys[s % ys.size()];
    // Outer strata draw from a seed stream disjoint from the inner ones.
    std::mt19937_64 gen(stratum_seed(~spec.seed, s));
    QuadratureSpec inner_spec = spec;
    PointPair pt;
    pt.x.resize(f.n());
    pt.y.resize(f.m());
    for (long i = 0; i < per; ++i) {
      sx.sample(gen, pt.x.data());
      sy.sample(gen, pt.y.data());
      inner_spec.seed = stratum_seed(spec.seed, s * static_cast<std::size_t>(per) + i);
      const Estimate e = inner_estimate(model, f, pt, inner_spec).est;
      const double v = std::abs(e.value);
      samples[s * per + i] = {std::pow(v, q), q * std::pow(v, q - 1) * e.error};
    }
  });

  CompensatedSum total, var, inner;
  for (std::size_t s = 0; s < strata; ++s) {
    const double vol = xs[s / ys.size()].volume * ys[s % ys.size()].volume;
    double mean = 0.0, m2 = 0.0, dmean = 0.0;
    for (long i = 0; i < per; ++i) {
      const Sample& smp = samples[s * per + i];
      const double delta = smp.g - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (smp.g - mean);
      dmean += (smp.dg - dmean) / static_cast<double>(i + 1);
    }
    total.add(vol * mean);
    var.add(vol * vol * m2 / static_cast<double>(per - 1) / static_cast<double>(per));
    inner.add(vol * dmean);
  }
  return {total.value(), 3.0 * std::sqrt(std::max(0.0, var.value())) + inner.value()};
}

}  // namespace

Estimate lq_mass(const ExponentConfig& cfg, const TestFunction& f, const Region& region, const Rational& q,
                 const QuadratureSpec& spec, KernelChoice kernel) {
  check_inputs(cfg, f, spec);
  if (q <= 1) throw ConfigError("lq_mass needs q > 1");
  const ProductRegion pr = to_product_region(region, cfg.n, cfg.m);
  if (f.is_zero()) return {};
  const InnerModel model = make_model(cfg, kernel);
  const double qd = to_double(q);
  if (spec.method == QuadratureMethod::MonteCarlo) return lq_mass_mc(model, f, pr, qd, spec);
  return lq_mass_grid(model, f, pr, qd, spec);
}

double lp_norm(const TestFunction& f, const Rational& p, const QuadratureSpec& spec) {
  spec.validate();
  if (p < 1) throw ConfigError("lp_norm needs p >= 1");
  const double pd = to_double(p);
  // Integral of bump_profile^p over (-1, 1) by composite Gauss-Legendre.
  const GaussLegendre& gl = gauss_legendre(spec.points_per_axis);
  constexpr int kPanels = 64;
  CompensatedSum bump;
  for (int k = 0; k < kPanels; ++k) {
    const double a = -1.0 + 2.0 * k / kPanels;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      bump.add(2.0 / kPanels * gl.weights[i] * std::pow(bump_profile(a + 2.0 / kPanels * gl.nodes[i]), pd));
    }
  }
  CompensatedSum total;
  for (const auto& c : f.cells()) {
    if (c.value == 0.0) continue;
    double v = std::pow(std::abs(c.value), pd);
    for (const auto& iv : c.box.x) v *= c.smooth ? 0.5 * iv.width() * bump.value() : iv.width();
    for (const auto& iv : c.box.y) v *= c.smooth ? 0.5 * iv.width() * bump.value() : iv.width();
    total.add(v);
  }
  return std::pow(total.value(), 1.0 / pd);
}

}  // namespace flagint
