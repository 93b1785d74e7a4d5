#include "flagint/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "flagint/errors.hpp"
#include "flagint/parallel.hpp"

namespace flagint {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string rational_text(const Rational& r) { return to_string(r); }

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Row-level parallelism; each work item integrates on one thread.
QuadratureSpec row_spec(const QuadratureSpec& spec) {
  QuadratureSpec s = spec;
  s.jobs = 1;
  return s;
}

int resolved_jobs(const QuadratureSpec& spec) { return spec.jobs == 0 ? default_jobs() : spec.jobs; }

struct Measured {
  Estimate est;
  bool resolved = true;
};

Measured measure_mass(const ExponentConfig& cfg, const TestFunction& f, const Region& region, const Rational& q,
                      const QuadratureSpec& spec, KernelChoice kernel = KernelChoice::Flag) {
  try {
    return {lq_mass(cfg, f, region, q, spec, kernel), true};
  } catch (const AccuracyError& e) {
    return {{e.best_estimate(), e.error_estimate()}, false};
  }
}

// ||.||_q and its error from the mass integral.
Estimate q_norm(const Estimate& mass, double q) {
  if (mass.value <= 0.0) return {0.0, std::pow(std::max(mass.error, 0.0), 1.0 / q)};
  const double v = std::pow(mass.value, 1.0 / q);
  return {v, v * mass.error / (q * mass.value)};
}

ScanRow make_row(std::vector<std::string> params, const Measured& m, std::string label, std::string case_label) {
  return {std::move(params), m.est.value, m.est.error, m.resolved ? std::move(label) : std::string(kUnresolved),
          std::move(case_label)};
}

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
  double max_abs = 0.0;
};

Line least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw PreconditionError("fit abscissae are all equal");
  Line l;
  l.slope = sxy / sxx;
  l.intercept = my - l.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (l.intercept + l.slope * x[i]);
    ss += r * r;
    l.max_abs = std::max(l.max_abs, std::abs(r));
  }
  l.rms = std::sqrt(ss / n);
  return l;
}

Box scaled_box(const Box& b, double sx, double sy) {
  Box out = b;
  for (auto& iv : out.x) iv = {iv.lo * sx, iv.hi * sx};
  for (auto& iv : out.y) iv = {iv.lo * sy, iv.hi * sy};
  return out;
}

ScanResult new_scan(std::string name, std::vector<std::string> columns, const ExponentConfig* cfg,
                    const QuadratureSpec& spec) {
  ScanResult s;
  s.experiment = std::move(name);
  s.param_columns = std::move(columns);
  if (cfg) s.metadata["config"] = config_to_json(*cfg);
  s.metadata["quadrature"] = spec_to_json(spec);
  s.metadata["seed"] = spec.seed;
  return s;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

std::string ScanResult::csv() const {
  std::string out;
  for (const auto& c : param_columns) out += csv_field(c) + ",";
  out += "value,err,label,case\n";
  for (const auto& r : rows) {
    for (const auto& p : r.params) out += csv_field(p) + ",";
    out += format_double(r.value) + "," + format_double(r.err) + "," + csv_field(r.label) + "," +
           csv_field(r.case_label) + "\n";
  }
  return out;
}

nlohmann::json ScanResult::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json params = nlohmann::json::object();
    for (std::size_t i = 0; i < param_columns.size() && i < r.params.size(); ++i) params[param_columns[i]] = r.params[i];
    rows_json.push_back(
        {{"params", params}, {"value", r.value}, {"err", r.err}, {"label", r.label}, {"case", r.case_label}});
  }
  return {{"experiment", experiment}, {"summary", summary},   {"passed", passed},
          {"unresolved", unresolved}, {"metadata", metadata}, {"rows", rows_json}};
}

std::filesystem::path ScanResult::write(const std::filesystem::path& dir, std::uint64_t seed) const {
  std::filesystem::create_directories(dir);
  const std::string stem = experiment + "-" + std::to_string(seed);
  const auto csv_path = dir / (stem + ".csv");
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + csv_path.string());
    out << csv();
  }
  std::ofstream out(dir / (stem + ".json"), std::ios::binary);
  if (!out) throw ConfigError("cannot write " + (dir / (stem + ".json")).string());
  out << to_json().dump(2) << "\n";
  return csv_path;
}

nlohmann::json config_to_json(const ExponentConfig& cfg) {
  nlohmann::json j = {{"n", cfg.n},
                      {"m", cfg.m},
                      {"alpha", rational_text(cfg.alpha)},
                      {"beta", rational_text(cfg.beta)},
                      {"rho", rational_text(cfg.rho)}};
  j["p"] = cfg.p ? nlohmann::json(rational_text(*cfg.p)) : nlohmann::json(nullptr);
  j["q"] = cfg.q ? nlohmann::json(rational_text(*cfg.q)) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json spec_to_json(const QuadratureSpec& spec) {
  return {{"method", to_string(spec.method)},
          {"points_per_axis", spec.points_per_axis},
          {"samples", spec.samples},
          {"seed", spec.seed},
          {"cutoff_exponent", spec.cutoff_exponent},
          {"target_rel_error", spec.target_rel_error},
          {"outer_depth", spec.outer_depth},
          {"jobs", spec.jobs},
          {"closed_form_y", spec.closed_form_y}};
}

DecayFit fit_decay(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw PreconditionError("fit needs equally many x and y values");
  if (x.size() < 5) throw PreconditionError("fit window too short: need at least 4 points after the first");
  const Line l = least_squares(x.subspan(1), y.subspan(1));
  return {l.slope, l.intercept, l.rms, 1, x.size()};
}

// ---------------------------------------------------------------------------

DilationReport dilation_scan(const ExponentConfig& cfg, const TestFunction& f, const DilationOptions& opt,
                             const QuadratureSpec& spec) {
  const auto t0 = Clock::now();
  cfg.validate();
  spec.validate();
  if (!cfg.p || !cfg.q) throw ConfigError("dilation scan needs p and q");
  if (!f.non_negative()) throw PreconditionError("dilation scan needs f >= 0");
  if (f.n() != cfg.n || f.m() != cfg.m) throw ConfigError("test function dimensions do not match the config");
  for (double d : opt.deltas)
    if (!(d > 0)) throw ConfigError("dilation factors must be positive");
  for (double l : opt.lambdas)
    if (!(l >= 1)) throw ConfigError("lambda factors must be >= 1");

  const Box window = opt.window.value_or(Box{std::vector<Interval>(cfg.n, {-2.0, 2.0}),
                                             std::vector<Interval>(cfg.m, {-2.0, 2.0})});
  const double rho = cfg.rho_d();
  const double q = cfg.q_d();

  std::vector<double> deltas = opt.deltas;
  if (std::find(deltas.begin(), deltas.end(), 1.0) == deltas.end()) deltas.push_back(1.0);
  std::sort(deltas.begin(), deltas.end());
  deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
  std::vector<double> lambdas;
  for (double l : opt.lambdas)
    if (l != 1.0) lambdas.push_back(l);
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

  std::vector<std::pair<double, double>> pairs;
  for (double d : deltas) pairs.emplace_back(d, 1.0);
  for (double l : lambdas) pairs.emplace_back(1.0, l);

  struct Item {
    Measured mass;
    Estimate qn;
    double pn = 0.0;
  };
  std::vector<Item> items(pairs.size());
  const QuadratureSpec inner = row_spec(spec);
  parallel_for(pairs.size(), resolved_jobs(spec), [&](std::size_t i) {
    const auto [d, l] = pairs[i];
    const double sy = std::pow(d, rho) * l;
    const TestFunction fd = f.dilated(d, sy);
    items[i].mass = measure_mass(cfg, fd, scaled_box(window, d, sy), *cfg.q, inner);
    items[i].qn = q_norm(items[i].mass.est, q);
    items[i].pn = lp_norm(fd, *cfg.p, inner);
  });

  DilationReport rep;
  rep.scan = new_scan("dilate", {"delta", "lambda", "quantity"}, &cfg, spec);
  rep.scan.metadata["deltas"] = deltas;
  rep.scan.metadata["lambdas"] = lambdas;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [d, l] = pairs[i];
    const std::string axis = l == 1.0 ? (d == 1.0 ? "baseline" : "delta-axis") : "lambda-axis";
    const Measured qn{items[i].qn, items[i].mass.resolved};
    const double pn = items[i].pn;
    const Measured ratio{{qn.est.value / pn, qn.est.error / pn}, qn.resolved};
    rep.scan.rows.push_back(make_row({format_double(d), format_double(l), "q_norm"}, qn, "measured", axis));
    rep.scan.rows.push_back(make_row({format_double(d), format_double(l), "ratio"}, ratio, "measured", axis));
    if (!qn.resolved) rep.scan.unresolved = true;
  }

  const std::size_t base =
      static_cast<std::size_t>(std::find(pairs.begin(), pairs.end(), std::pair{1.0, 1.0}) - pairs.begin());
  const Estimate q1 = items[base].qn;
  const double ab = cfg.alpha_d() + rho * cfg.beta_d();
  const double hom = cfg.n + rho * cfg.m;

  std::vector<double> log_d, log_r;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double d = deltas[i];
    const double predicted = std::pow(d, ab + hom / q);
    const double measured = items[i].qn.value / q1.value;
    rep.identity_max_deviation = std::max(rep.identity_max_deviation, std::abs(measured / predicted - 1.0));
    log_d.push_back(std::log(d));
    log_r.push_back(std::log(items[i].qn.value / items[i].pn));
  }
  rep.delta_slope_predicted = ab + hom * (1.0 / q - 1.0 / cfg.p_d());
  if (log_d.size() >= 5) {
    rep.delta_fit = fit_decay(log_d, log_r);
    rep.delta_slope = rep.delta_fit->slope;
  } else if (log_d.size() >= 2) {
    rep.delta_slope = least_squares(log_d, log_r).slope;
  }

  const double lam_exp = cfg.beta_d() + cfg.m / q;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    const Estimate& ql = items[deltas.size() + j].qn;
    const double bound = std::pow(lambdas[j], lam_exp);
    if (ql.value < bound * q1.value - (ql.error + bound * q1.error)) rep.lambda_bound_holds = false;
  }

  const bool slope_ok = std::abs(rep.delta_slope - rep.delta_slope_predicted) <= opt.slope_tolerance;
  const bool identity_ok = rep.identity_max_deviation <= opt.identity_tolerance;
  rep.scan.passed = !rep.scan.unresolved && slope_ok && identity_ok && rep.lambda_bound_holds;
  rep.scan.summary = "dilate: delta-slope " + fixed(rep.delta_slope) + " (predicted " +
                     fixed(rep.delta_slope_predicted) + "), identity deviation " +
                     fixed(rep.identity_max_deviation, 3) + ", lambda bound " +
                     (rep.lambda_bound_holds ? "holds" : "violated") + ": " + (rep.scan.passed ? "PASS" : "FAIL");
  rep.scan.metadata["delta_slope"] = rep.delta_slope;
  rep.scan.metadata["delta_slope_predicted"] = rep.delta_slope_predicted;
  rep.scan.metadata["identity_max_deviation"] = rep.identity_max_deviation;
  if (rep.delta_fit)
    rep.scan.metadata["delta_fit"] = {{"slope", rep.delta_fit->slope},
                                      {"intercept", rep.delta_fit->intercept},
                                      {"residual", rep.delta_fit->residual},
                                      {"window", {rep.delta_fit->window_begin, rep.delta_fit->window_end}}};
  rep.scan.metadata["wall_time_s"] = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------

ExponentConfig critical_config(int n, int m, const Rational& rho, const Rational& q) {
  ExponentConfig cfg;
  cfg.n = n;
  cfg.m = m;
  cfg.rho = rho;
  cfg.q = q;
  cfg.beta = Rational(m) - Rational(m) / q;
  cfg.alpha = Rational(n) * cfg.beta / Rational(m);
  cfg.validate();
  return cfg;
}

GrowthReport counterexample_scan(const ExponentConfig& cfg, const std::vector<double>& radii,
                                 const QuadratureSpec& spec) {
  const auto t0 = Clock::now();
  cfg.validate();
  spec.validate();
  if (!cfg.q) throw ConfigError("counterexample scan needs q");
  if (radii.empty()) throw ConfigError("counterexample scan needs at least one radius");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0)) throw ConfigError("radii must be positive");
    if (i > 0 && !(radii[i] >= radii[i - 1])) throw ConfigError("radii must be non-decreasing");
  }

  const TestFunction atom = make_signum_atom(cfg.n, cfg.m).payload;
  GrowthReport rep;
  rep.radii = radii;
  rep.scan = new_scan("counterexample", {"R"}, &cfg, spec);
  rep.scan.metadata["radii"] = radii;

  double total = 0.0, total_err = 0.0, prev = 0.0;
  bool resolved = true;
  for (double r : radii) {
    Measured band{{0.0, 0.0}, true};
    if (r > prev) {
      const ProductRegion region{std::vector<Interval>(cfg.n, {2.0, 4.0}), RadialBand{cfg.m, prev, r}};
      band = measure_mass(cfg, atom, region, *cfg.q, spec);
    }
    resolved = resolved && band.resolved;
    total += band.est.value;
    total_err += band.est.error;
    rep.mass.push_back(total);
    rep.mass_err.push_back(total_err);
    rep.scan.rows.push_back(make_row({format_double(r)}, {{total, total_err}, resolved}, "F", "growth"));
    prev = r;
  }
  rep.scan.unresolved = !resolved;

  rep.increasing = true;
  for (std::size_t i = 1; i < rep.mass.size(); ++i) {
    rep.increments.push_back(rep.mass[i] - rep.mass[i - 1]);
    if (!(rep.increments.back() > 0)) rep.increasing = false;
  }
  if (!rep.increments.empty()) {
    const auto [lo, hi] = std::minmax_element(rep.increments.begin(), rep.increments.end());
    rep.increment_spread = *lo > 0 ? *hi / *lo - 1.0 : std::numeric_limits<double>::infinity();
    rep.last_increment_share = rep.increments.back() / rep.mass.back();
  }
  if (radii.size() >= 2 && radii.front() < radii.back()) {
    std::vector<double> lr;
    for (double r : radii) lr.push_back(std::log(r));
    const Line l = least_squares(lr, rep.mass);
    rep.log_slope = l.slope;
    rep.log_intercept = l.intercept;
    const auto [lo, hi] = std::minmax_element(rep.mass.begin(), rep.mass.end());
    rep.log_fit_residual_share = *hi > *lo ? l.max_abs / (*hi - *lo) : 0.0;
  }

  const bool critical = cfg.alpha * Rational(cfg.m) == cfg.beta * Rational(cfg.n);
  bool ok = rep.increasing;
  std::string verdict;
  if (critical) {
    ok = ok && rep.log_fit_residual_share < 0.1;
    verdict = "growth c = " + fixed(rep.log_slope) + ", increment spread " + fixed(rep.increment_spread, 3);
  } else if (check_formula_two(cfg)) {
    ok = rep.last_increment_share < 0.05;
    verdict = "last increment share " + fixed(rep.last_increment_share, 3);
  } else {
    verdict = "growth c = " + fixed(rep.log_slope);
  }
  rep.scan.passed = ok && resolved;
  rep.scan.summary = std::string("counterexample: F(") + format_double(radii.back()) + ") = " + fixed(rep.mass.back()) +
                     ", " + verdict + ": " + (rep.scan.passed ? "PASS" : "FAIL");
  rep.scan.metadata["log_slope"] = rep.log_slope;
  rep.scan.metadata["log_intercept"] = rep.log_intercept;
  rep.scan.metadata["log_fit_residual_share"] = rep.log_fit_residual_share;
  rep.scan.metadata["increment_spread"] = rep.increment_spread;
  rep.scan.metadata["last_increment_share"] = rep.last_increment_share;
  rep.scan.metadata["wall_time_s"] = seconds_since(t0);
  return rep;
}

GrowthReport counterexample_growth(int n, int m, const Rational& rho, const Rational& q,
                                   const std::vector<double>& radii, const QuadratureSpec& spec) {
  return counterexample_scan(critical_config(n, m, rho, q), radii, spec);
}

// ---------------------------------------------------------------------------

ShellReport shell_decay_profile(const ExponentConfig& cfg, const TestFunction& f, const ShellOptions& opt,
                                const QuadratureSpec& spec) {
  const auto t0 = Clock::now();
  cfg.validate();
  spec.validate();
  if (!cfg.q || !check_formula_two(cfg)) throw PreconditionError("shell profile needs a formula-two config");
  if (opt.k_max < 1 || opt.l_max < 1 || opt.burn_in < 0) throw ConfigError("shell ranges must be positive");
  if (f.n() != cfg.n || f.m() != cfg.m) throw ConfigError("test function dimensions do not match the config");

  std::vector<Shell> shells;
  for (int k = 0; k <= opt.k_max; ++k)
    for (int l = 0; l <= opt.l_max; ++l)
      if (opt.include_core || (k > 0 && l > 0)) shells.push_back({k, l, opt.L});

  // Slot shells.size() holds the ball-product {|x| < 2^L, |y| < 2^L} for the gap.
  const std::size_t jobs_count = shells.size() + (opt.include_core ? 1 : 0);
  std::vector<Measured> masses(jobs_count);
  const QuadratureSpec inner = row_spec(spec);
  const double R = std::ldexp(1.0, opt.L);
  parallel_for(jobs_count, resolved_jobs(spec), [&](std::size_t i) {
    if (i < shells.size()) {
      masses[i] = measure_mass(cfg, f, shells[i], *cfg.q, inner);
    } else {
      masses[i] = measure_mass(cfg, f, ProductRegion{RadialBand{cfg.n, 0.0, R}, RadialBand{cfg.m, 0.0, R}}, *cfg.q,
                               inner);
    }
  });

  ShellReport rep;
  rep.scan = new_scan("shells", {"k", "l", "L"}, &cfg, spec);
  rep.scan.metadata["options"] = {{"L", opt.L},
                                  {"k_max", opt.k_max},
                                  {"l_max", opt.l_max},
                                  {"burn_in", opt.burn_in},
                                  {"epsilon", opt.epsilon},
                                  {"include_core", opt.include_core}};
  rep.case2_by_k.assign(opt.k_max + 1, 0.0);
  std::vector<double> case2_err(opt.k_max + 1, 0.0);
  double k_tail = 0.0, l_tail = 0.0, core = 0.0, core_err = 0.0;
  for (std::size_t i = 0; i < shells.size(); ++i) {
    const Shell& s = shells[i];
    const Measured& m = masses[i];
    rep.scan.unresolved = rep.scan.unresolved || !m.resolved;
    rep.scan.rows.push_back(make_row({std::to_string(s.k), std::to_string(s.l), std::to_string(s.L)}, m, "mass",
                                     to_string(shell_case(s, cfg).label)));
    rep.total += m.est.value;
    if (s.k > 0 && s.l > 0) {
      rep.case2_by_k[s.k] += m.est.value;
      case2_err[s.k] += m.est.error;
    }
    if (s.k == opt.k_max) k_tail += m.est.value;
    if (s.l == opt.l_max) l_tail += m.est.value;
    if (s.is_core()) {
      core = m.est.value;
      core_err = m.est.error;
    }
  }
  for (int k = 1; k <= opt.k_max; ++k)
    rep.scan.rows.push_back(make_row({std::to_string(k), "sum", std::to_string(opt.L)},
                                     {{rep.case2_by_k[k], case2_err[k]}, true}, "case2-sum", "Case2"));
  if (opt.include_core) {
    const Measured& ball = masses.back();
    rep.gap_mass = ball.est.value - core;
    rep.gap_err = ball.est.error + core_err;
    rep.scan.unresolved = rep.scan.unresolved || !ball.resolved;
    rep.scan.rows.push_back(make_row({"gap", "gap", std::to_string(opt.L)},
                                     {{rep.gap_mass, rep.gap_err}, ball.resolved}, "gap", "gap"));
  }
  rep.k_tail_share = rep.total > 0 ? k_tail / rep.total : 0.0;
  rep.l_tail_share = rep.total > 0 ? l_tail / rep.total : 0.0;
  rep.cauchy = rep.k_tail_share < opt.tail_tolerance && rep.l_tail_share < opt.tail_tolerance;

  std::vector<double> ks, logs;
  for (int k = std::max(opt.burn_in, 1); k <= opt.k_max; ++k) {
    if (!(rep.case2_by_k[k] > 0)) continue;
    ks.push_back(k);
    logs.push_back(std::log2(rep.case2_by_k[k]));
  }
  if (ks.size() < 5) throw PreconditionError("fit window too short: raise k_max or lower burn_in");
  rep.k_fit = fit_decay(ks, logs);
  const double q = cfg.q_d();
  rep.slope_ok = rep.k_fit->slope <= -q + opt.epsilon;

  rep.scan.passed = !rep.scan.unresolved && rep.slope_ok && rep.cauchy;
  rep.scan.summary = "shells: case-2 k-slope " + fixed(rep.k_fit->slope) + " (bound " + fixed(-q + opt.epsilon) +
                     "), tail share " + fixed(std::max(rep.k_tail_share, rep.l_tail_share), 3) + ": " +
                     (rep.scan.passed ? "PASS" : "FAIL");
  rep.scan.metadata["k_fit"] = {{"slope", rep.k_fit->slope},
                                {"intercept", rep.k_fit->intercept},
                                {"residual", rep.k_fit->residual},
                                {"k_first", ks[rep.k_fit->window_begin]},
                                {"k_last", ks[rep.k_fit->window_end - 1]}};
  rep.scan.metadata["total"] = rep.total;
  rep.scan.metadata["gap_mass"] = rep.gap_mass;
  rep.scan.metadata["k_tail_share"] = rep.k_tail_share;
  rep.scan.metadata["l_tail_share"] = rep.l_tail_share;
  rep.scan.metadata["wall_time_s"] = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------

FrontierReport frontier_map(int n, int m, const Rational& rho, const Rational& q, const FrontierOptions& opt,
                            const QuadratureSpec& spec) {
  const auto t0 = Clock::now();
  spec.validate();
  if (opt.alphas.empty() || opt.betas.empty()) throw ConfigError("frontier grids must not be empty");
  for (const auto& a : opt.alphas)
    if (!(a > 0 && a < n)) throw ConfigError("alpha grid must lie in (0, n)");
  for (const auto& b : opt.betas)
    if (!(b > 0 && b < m)) throw ConfigError("beta grid must lie in (0, m)");

  struct Cell {
    ExponentConfig cfg;
    bool theorem_bounded = false;
    bool on_line = false;
    bool resolved = true;
    bool empirical_bounded = false;
    double measured = 0.0;
    double err = 0.0;
  };
  std::vector<Cell> cells;
  for (const auto& a : opt.alphas) {
    for (const auto& b : opt.betas) {
      Cell c;
      c.cfg.n = n;
      c.cfg.m = m;
      c.cfg.alpha = a;
      c.cfg.beta = b;
      c.cfg.rho = rho;
      c.cfg.p = Rational(1);
      c.cfg.q = q;
      c.cfg.validate();
      c.theorem_bounded = check_formula_two(c.cfg);
      c.on_line = c.cfg.homogeneity() == Rational(1) - Rational(1) / q;
      cells.push_back(std::move(c));
    }
  }

  const QuadratureSpec inner = row_spec(spec);
  const Atom atom = make_signum_atom(n, m);
  parallel_for(cells.size(), resolved_jobs(spec), [&](std::size_t i) {
    Cell& c = cells[i];
    try {
      if (c.on_line) {
        const GrowthReport g = counterexample_scan(c.cfg, opt.radii, inner);
        // Bounded masses show geometrically shrinking decade increments.
        const std::size_t k = g.increments.size();
        if (k < 2) throw ConfigError("frontier growth test needs at least three radii");
        c.measured = g.increments[k - 1] / g.increments[k - 2];
        c.err = (g.mass_err.back() + g.mass_err[g.mass_err.size() - 2]) / std::abs(g.increments[k - 2]);
        c.resolved = !g.scan.unresolved;
        c.empirical_bounded = !g.increasing || c.measured < opt.growth_ratio;
      } else {
        // Dilation slope of ||I a_delta||_q / ||a_delta||_1 on U x [-2, 2]^m.
        const Box window{std::vector<Interval>(n, {2.0, 4.0}), std::vector<Interval>(m, {-2.0, 2.0})};
        std::vector<double> log_d, log_r;
        bool resolved = true;
        for (double delta : opt.deltas) {
          const double sy = std::pow(delta, c.cfg.rho_d());
          const TestFunction ad = atom.payload.dilated(delta, sy);
          const Measured mm = measure_mass(c.cfg, ad, scaled_box(window, delta, sy), q, inner);
          resolved = resolved && mm.resolved;
          const Estimate qn = q_norm(mm.est, c.cfg.q_d());
          log_d.push_back(std::log(delta));
          log_r.push_back(std::log(qn.value / lp_norm(ad, Rational(1), inner)));
          c.err = std::max(c.err, qn.error / qn.value);
        }
        c.measured = log_d.size() >= 5 ? fit_decay(log_d, log_r).slope : least_squares(log_d, log_r).slope;
        c.resolved = resolved;
        c.empirical_bounded = std::abs(c.measured) <= opt.slope_tolerance;
      }
    } catch (const AccuracyError&) {
      c.resolved = false;
    }
  });

  FrontierReport rep;
  rep.scan = new_scan("frontier", {"alpha", "beta"}, nullptr, spec);
  rep.scan.metadata["config"] = {{"n", n}, {"m", m}, {"rho", rational_text(rho)}, {"p", "1"}, {"q", rational_text(q)}};
  rep.scan.metadata["radii"] = opt.radii;
  rep.scan.metadata["deltas"] = opt.deltas;
  for (const Cell& c : cells) {
    const std::string theorem = c.theorem_bounded ? "THEOREM-BOUNDED" : "THEOREM-UNBOUNDED";
    std::string label;
    if (!c.resolved) {
      ++rep.unresolved;
      label = theorem + "/" + kUnresolved;
    } else {
      label = theorem + (c.empirical_bounded ? "/EMPIRICAL-BOUNDED" : "/EMPIRICAL-UNBOUNDED");
      ++rep.confusion[c.theorem_bounded ? 1 : 0][c.empirical_bounded ? 1 : 0];
    }
    rep.scan.rows.push_back({{rational_text(c.cfg.alpha), rational_text(c.cfg.beta)},
                             c.measured,
                             c.err,
                             label,
                             c.on_line ? "growth-ratio" : "dilation-slope"});
  }
  rep.scan.unresolved = rep.unresolved > 0;
  rep.diagonal = rep.confusion[0][1] == 0 && rep.confusion[1][0] == 0;
  rep.scan.passed = rep.diagonal && rep.unresolved <= 2;
  rep.scan.metadata["confusion"] = {{"theorem_unbounded", {rep.confusion[0][0], rep.confusion[0][1]}},
                                    {"theorem_bounded", {rep.confusion[1][0], rep.confusion[1][1]}}};
  rep.scan.metadata["unresolved_cells"] = rep.unresolved;
  rep.scan.summary = "frontier: confusion [[" + std::to_string(rep.confusion[0][0]) + "," +
                     std::to_string(rep.confusion[0][1]) + "],[" + std::to_string(rep.confusion[1][0]) + "," +
                     std::to_string(rep.confusion[1][1]) + "]], unresolved " + std::to_string(rep.unresolved) + ": " +
                     (rep.scan.passed ? "PASS" : "FAIL");
  rep.scan.metadata["wall_time_s"] = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------

HlsReport hls_iteration_check(const ExponentConfig& cfg, const TestFunction& f, const Box& window,
                              const QuadratureSpec& spec) {
  const auto t0 = Clock::now();
  cfg.validate();
  spec.validate();
  if (!check_formula_one(cfg)) throw PreconditionError("hls check needs a formula-one config");
  if (cfg.n + cfg.m > 3) throw PreconditionError("hls check supports n + m <= 3");
  if (!f.non_negative()) throw PreconditionError("hls check needs f >= 0");

  HlsReport rep;
  rep.scan = new_scan("hls", {"kernel"}, &cfg, spec);
  const double q = cfg.q_d();
  Measured left{{0.0, 0.0}, true}, right{{0.0, 0.0}, true};
  if (!f.is_zero()) {
    left = measure_mass(cfg, f, window, *cfg.q, spec, KernelChoice::Flag);
    right = measure_mass(cfg, f, window, *cfg.q, spec, KernelChoice::Dominating);
  }
  const Estimate ln = q_norm(left.est, q);
  const Estimate rn = q_norm(right.est, q);
  rep.left = ln.value;
  rep.left_err = ln.error;
  rep.right = rn.value;
  rep.right_err = rn.error;
  rep.holds = rep.left <= rep.right + rep.left_err + rep.right_err;
  rep.scan.rows.push_back(make_row({"flag"}, {ln, left.resolved}, "q_norm", "left"));
  rep.scan.rows.push_back(make_row({"dominating"}, {rn, right.resolved}, "q_norm", "right"));
  rep.scan.unresolved = !left.resolved || !right.resolved;
  rep.scan.passed = rep.holds && !rep.scan.unresolved;
  rep.scan.summary = "hls: " + fixed(rep.left) + " <= " + fixed(rep.right) + ": " + (rep.scan.passed ? "PASS" : "FAIL");
  rep.scan.metadata["wall_time_s"] = seconds_since(t0);
  return rep;
}

}  // namespace flagint
