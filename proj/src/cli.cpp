#include "flagint/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "flagint/atoms.hpp"
#include "flagint/errors.hpp"
#include "flagint/experiments.hpp"
#include "flagint/kernel.hpp"
#include "flagint/parallel.hpp"

namespace flagint {

namespace {

const std::vector<std::string> kExperiments = {"check",  "kernel",         "apply",    "atom-validate", "shells",
                                               "dilate", "counterexample", "frontier", "hls"};

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

std::string as_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

[[noreturn]] void field_error(const std::string& key, const std::string& what) {
  throw ConfigError("field '" + key + "': " + what);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> list_items(const std::string& key, const nlohmann::json& v) {
  if (v.is_array()) {
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(as_text(e));
    return out;
  }
  if (v.is_string()) return split_list(v.get<std::string>());
  if (v.is_number()) return {v.dump()};
  field_error(key, "expected a list");
}

double parse_real(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used != s.size()) field_error(key, "'" + s + "' is not a number");
    return d;
  } catch (const std::logic_error&) {
    // A p/q rational is accepted wherever a real is.
    try {
      return to_double(parse_rational(s));
    } catch (const ConfigError&) {
      field_error(key, "'" + s + "' is not a number");
    }
  }
}

}  // namespace

const std::vector<std::string>& RunConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "experiment", "n",         "m",       "alpha",          "beta",          "rho",          "p",
      "q",          "method",    "samples", "points_per_axis", "seed",         "target_rel_error",
      "cutoff_exponent", "outer_depth", "jobs", "closed_form_y", "output",    "function",     "L",
      "atom_file",  "normalization", "x",   "y",              "deltas",        "lambdas",      "radii",
      "alphas",     "betas",     "k_max",   "l_max",          "burn_in",       "epsilon",      "include_core",
      "window"};
  return keys;
}

std::optional<Rational> RunConfig::rational(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  try {
    return parse_rational(as_text(values.at(key)));
  } catch (const ConfigError& e) {
    field_error(key, e.what());
  }
}

std::optional<long> RunConfig::integer(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  const auto r = rational(key);
  if (denominator(*r) != 1) field_error(key, "expected an integer");
  return static_cast<long>(numerator(*r));
}

std::optional<double> RunConfig::real(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return parse_real(key, as_text(values.at(key)));
}

std::optional<bool> RunConfig::boolean(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  const auto& v = values.at(key);
  if (v.is_boolean()) return v.get<bool>();
  const std::string s = as_text(v);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  field_error(key, "expected true or false");
}

std::optional<std::string> RunConfig::text(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return as_text(values.at(key));
}

std::optional<std::vector<double>> RunConfig::reals(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  std::vector<double> out;
  for (const auto& s : list_items(key, values.at(key))) out.push_back(parse_real(key, s));
  if (out.empty()) field_error(key, "list is empty");
  return out;
}

std::optional<std::vector<Rational>> RunConfig::rationals(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  std::vector<Rational> out;
  for (const auto& s : list_items(key, values.at(key))) {
    try {
      out.push_back(parse_rational(s));
    } catch (const ConfigError& e) {
      field_error(key, e.what());
    }
  }
  if (out.empty()) field_error(key, "list is empty");
  return out;
}

ExponentConfig RunConfig::exponents(bool exponents_optional) const {
  ExponentConfig cfg;
  const long n = integer("n").value_or(1);
  const long m = integer("m").value_or(1);
  if (n < 1 || n > 64) field_error("n", "must be in [1, 64]");
  if (m < 1 || m > 64) field_error("m", "must be in [1, 64]");
  cfg.n = static_cast<int>(n);
  cfg.m = static_cast<int>(m);
  cfg.rho = rational("rho").value_or(Rational(1));
  if (!exponents_optional) {
    if (!has("alpha")) field_error("alpha", "required");
    if (!has("beta")) field_error("beta", "required");
  }
  cfg.alpha = rational("alpha").value_or(Rational(0));
  cfg.beta = rational("beta").value_or(Rational(0));
  cfg.p = rational("p");
  cfg.q = rational("q");
  if (!exponents_optional || (has("alpha") && has("beta"))) cfg.validate();
  return cfg;
}

QuadratureSpec RunConfig::quadrature() const {
  QuadratureSpec s;
  if (auto v = text("method")) s.method = parse_quadrature_method(*v);
  if (auto v = integer("samples")) s.samples = *v;
  if (auto v = integer("points_per_axis")) s.points_per_axis = static_cast<int>(*v);
  if (auto v = integer("seed")) {
    if (*v < 0) field_error("seed", "must be non-negative");
    s.seed = static_cast<std::uint64_t>(*v);
  }
  if (auto v = real("target_rel_error")) s.target_rel_error = *v;
  if (auto v = integer("cutoff_exponent")) s.cutoff_exponent = static_cast<int>(*v);
  if (auto v = integer("outer_depth")) s.outer_depth = static_cast<int>(*v);
  s.jobs = static_cast<int>(integer("jobs").value_or(0));
  if (s.jobs < 0) field_error("jobs", "must be >= 0");
  if (s.jobs == 0) s.jobs = default_jobs();
  if (auto v = boolean("closed_form_y")) s.closed_form_y = *v;
  s.validate();
  return s;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  RunConfig rc;
  const auto& keys = RunConfig::known_keys();
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
      throw ConfigError("config file: unknown key '" + it.key() + "'");
    rc.values[it.key()] = it.value();
  }
  if (rc.has("experiment")) rc.experiment = as_text(rc.values.at("experiment"));
  return rc;
}

// ---------------------------------------------------------------------------

namespace {

Box cube_box(int n, int m, double h) {
  return {std::vector<Interval>(n, {-h, h}), std::vector<Interval>(m, {-h, h})};
}

TestFunction build_function(const RunConfig& rc, const std::string& fallback, int n, int m,
                            const QuadratureSpec& spec) {
  const std::string kind = rc.text("function").value_or(fallback);
  const int L = static_cast<int>(rc.integer("L").value_or(0));
  if (kind == "bump") return TestFunction::smooth_bump(cube_box(n, m, 1.0));
  if (kind == "indicator") return TestFunction::indicator(cube_box(n, m, 1.0));
  if (kind == "signum-atom") return make_signum_atom(n, m).payload;
  if (kind == "strict-atom") return make_signum_atom_on(Cube{n, m, L}).payload;
  if (kind == "random-atom") return make_random_atom(Cube{n, m, L}, spec.seed).payload;
  if (kind == "abs-atom") return non_cancelling_bump(make_signum_atom_on(Cube{n, m, L}));
  if (kind == "atom-file") {
    const auto path = rc.text("atom_file");
    if (!path) field_error("atom_file", "required for function atom-file");
    std::ifstream in(*path);
    if (!in) field_error("atom_file", "cannot open '" + *path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      field_error("atom_file", e.what());
    }
    return atom_from_json(j).payload;
  }
  field_error("function", "unknown function '" + kind +
                              "' (bump, indicator, signum-atom, strict-atom, random-atom, abs-atom, atom-file)");
}

PointPair point_of(const RunConfig& rc, int n, int m) {
  const auto x = rc.reals("x");
  const auto y = rc.reals("y");
  if (!x) field_error("x", "required");
  if (!y) field_error("y", "required");
  if (static_cast<int>(x->size()) != n) field_error("x", "needs " + std::to_string(n) + " coordinates");
  if (static_cast<int>(y->size()) != m) field_error("y", "needs " + std::to_string(m) + " coordinates");
  return {*x, *y};
}

ScanResult plain_scan(const std::string& name, std::vector<std::string> columns, const QuadratureSpec& spec) {
  ScanResult s;
  s.experiment = name;
  s.param_columns = std::move(columns);
  s.metadata["quadrature"] = spec_to_json(spec);
  s.metadata["seed"] = spec.seed;
  return s;
}

std::string status(bool ok) { return ok ? "SATISFIED" : "NOT SATISFIED"; }

ScanResult run_check(const RunConfig& rc, const QuadratureSpec& spec) {
  const ExponentConfig cfg = rc.exponents();
  ScanResult s = plain_scan("check", {"condition"}, spec);
  s.metadata["config"] = config_to_json(cfg);
  std::vector<std::string> parts;
  auto row = [&](const std::string& name, bool ok) {
    s.rows.push_back({{name}, ok ? 1.0 : 0.0, 0.0, status(ok), "exponents"});
  };
  s.rows.push_back({{"homogeneity"}, to_double(cfg.homogeneity()), 0.0, to_string(cfg.homogeneity()), "exponents"});
  if (cfg.q) {
    const bool two = check_formula_two(cfg);
    row("formula-two", two);
    parts.push_back("formula-two: " + status(two));
  }
  if (cfg.p && cfg.q) {
    const bool one = check_formula_one(cfg);
    row("formula-one", one);
    parts.push_back("formula-one: " + status(one));
  }
  if (cfg.alpha * cfg.m >= cfg.beta * cfg.n) {
    const DerivedExponents ab = derive_ab(cfg);
    s.rows.push_back({{"a"}, ab.a_d(), 0.0, to_string(ab.a), "derived"});
    s.rows.push_back({{"b"}, ab.b_d(), 0.0, to_string(ab.b), "derived"});
    if (parts.empty()) parts.push_back("a = " + to_string(ab.a) + ", b = " + to_string(ab.b));
  }
  if (parts.empty()) parts.push_back("homogeneity " + to_string(cfg.homogeneity()));
  std::string line;
  for (std::size_t i = 0; i < parts.size(); ++i) line += (i ? ", " : "") + parts[i];
  s.summary = line;
  return s;
}

ScanResult run_kernel(const RunConfig& rc, const QuadratureSpec& spec) {
  const ExponentConfig cfg = rc.exponents();
  const PointPair pt = point_of(rc, cfg.n, cfg.m);
  ScanResult s = plain_scan("kernel", {"kernel"}, spec);
  s.metadata["config"] = config_to_json(cfg);
  const double k = FlagKernel(cfg)(pt);
  s.rows.push_back({{"flag"}, k, 0.0, "value", "kernel"});
  std::string line = "kernel: flag " + format_double(k);
  if (cfg.alpha * cfg.m >= cfg.beta * cfg.n && pt.norm_y() > 0) {
    const double d = DominatingKernel(cfg)(pt);
    s.rows.push_back({{"dominating"}, d, 0.0, "value", "kernel"});
    line += ", dominating " + format_double(d);
    s.passed = k <= d * (1 + 1e-12);
  }
  s.summary = line;
  return s;
}

ScanResult run_apply(const RunConfig& rc, const QuadratureSpec& spec) {
  const ExponentConfig cfg = rc.exponents();
  const PointPair pt = point_of(rc, cfg.n, cfg.m);
  const TestFunction f = build_function(rc, "indicator", cfg.n, cfg.m, spec);
  ScanResult s = plain_scan("apply", {"function"}, spec);
  s.metadata["config"] = config_to_json(cfg);
  const std::string fname = rc.text("function").value_or("indicator");
  try {
    const Estimate e = apply_operator(cfg, f, pt, spec);
    s.rows.push_back({{fname}, e.value, e.error, "value", "apply"});
    s.summary = "apply: " + format_double(e.value) + " +- " + format_double(e.error);
  } catch (const AccuracyError& e) {
    s.rows.push_back({{fname}, e.best_estimate(), e.error_estimate(), kUnresolved, "apply"});
    s.unresolved = true;
    s.passed = false;
    s.summary = std::string("apply: ") + kUnresolved + " (" + e.what() + ")";
  }
  return s;
}

Atom build_atom(const RunConfig& rc, const QuadratureSpec& spec) {
  const std::string kind = rc.text("function").value_or(rc.has("atom_file") ? "atom-file" : "strict-atom");
  const int n = static_cast<int>(rc.integer("n").value_or(1));
  const int m = static_cast<int>(rc.integer("m").value_or(1));
  const int L = static_cast<int>(rc.integer("L").value_or(0));
  if (kind == "signum-atom") return make_signum_atom(n, m);
  if (kind == "strict-atom") return make_signum_atom_on(Cube{n, m, L});
  if (kind == "random-atom") return make_random_atom(Cube{n, m, L}, spec.seed);
  if (kind != "atom-file") field_error("function", "atom-validate takes signum-atom, strict-atom, random-atom or atom-file");
  const auto path = rc.text("atom_file");
  if (!path) field_error("atom_file", "required");
  std::ifstream in(*path);
  if (!in) field_error("atom_file", "cannot open '" + *path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    field_error("atom_file", e.what());
  }
  return atom_from_json(j);
}

ScanResult run_atom_validate(const RunConfig& rc, const QuadratureSpec& spec) {
  const Atom atom = build_atom(rc, spec);
  std::optional<AtomNormalization> norm;
  if (auto t = rc.text("normalization")) norm = parse_atom_normalization(*t);
  const AtomReport r = validate_atom(atom, spec, norm);
  ScanResult s = plain_scan("atom-validate", {"condition"}, spec);
  s.metadata["atom"] = atom_to_json(atom);
  s.rows.push_back({{"support"}, r.support_ok ? 1.0 : 0.0, 0.0, r.support_ok ? "ok" : "violated", "atom"});
  s.rows.push_back({{"sup"}, r.sup, r.bound, r.bound_ok ? "ok" : "violated", "atom"});
  s.rows.push_back({{"mean"}, r.mean, 0.0, r.mean_ok ? "ok" : "violated", "atom"});
  s.passed = r.ok();
  s.summary = std::string("atom-validate: ") + (r.ok() ? "VALID" : "INVALID") + " (" +
              to_string(norm.value_or(atom.normalization)) + ")";
  return s;
}

ScanResult run_shells(const RunConfig& rc, const QuadratureSpec& spec) {
  const ExponentConfig cfg = rc.exponents();
  ShellOptions opt;
  opt.L = static_cast<int>(rc.integer("L").value_or(opt.L));
  opt.k_max = static_cast<int>(rc.integer("k_max").value_or(opt.k_max));
  opt.l_max = static_cast<int>(rc.integer("l_max").value_or(opt.l_max));
  opt.burn_in = static_cast<int>(rc.integer("burn_in").value_or(opt.burn_in));
  opt.epsilon = rc.real("epsilon").value_or(opt.epsilon);
  opt.include_core = rc.boolean("include_core").value_or(opt.include_core);
  const TestFunction f = build_function(rc, "strict-atom", cfg.n, cfg.m, spec);
  return shell_decay_profile(cfg, f, opt, spec).scan;
}

ScanResult run_dilate(const RunConfig& rc, const QuadratureSpec& spec) {
  const ExponentConfig cfg = rc.exponents();
  DilationOptions opt;
  if (auto v = rc.reals("deltas")) opt.deltas = *v;
  if (auto v = rc.reals("lambdas")) opt.lambdas = *v;
  if (auto h = rc.real("window")) opt.window = cube_box(cfg.n, cfg.m, *h);
  const TestFunction f = build_function(rc, "bump", cfg.n, cfg.m, spec);
  return dilation_scan(cfg, f, opt, spec).scan;
}

ScanResult run_counterexample(const RunConfig& rc, const QuadratureSpec& spec) {
  const std::vector<double> radii = rc.reals("radii").value_or(std::vector<double>{10, 100, 1000, 10000});
  ExponentConfig cfg = rc.exponents(true);
  if (!cfg.q) field_error("q", "required");
  if (rc.has("alpha") != rc.has("beta")) field_error(rc.has("alpha") ? "beta" : "alpha", "give both or neither");
  if (!rc.has("alpha")) cfg = critical_config(cfg.n, cfg.m, cfg.rho, *cfg.q);
  return counterexample_scan(cfg, radii, spec).scan;
}

ScanResult run_frontier(const RunConfig& rc, const QuadratureSpec& spec) {
  const ExponentConfig base = rc.exponents(true);
  if (!base.q) field_error("q", "required");
  FrontierOptions opt;
  auto grid = [&](const std::string& key, int dim) {
    if (auto v = rc.rationals(key)) return *v;
    std::vector<Rational> g;
    for (int i : {1, 3, 5, 7, 9}) g.push_back(Rational(i * dim) / 10);
    return g;
  };
  opt.alphas = grid("alphas", base.n);
  opt.betas = grid("betas", base.m);
  if (auto v = rc.reals("radii")) opt.radii = *v;
  if (auto v = rc.reals("deltas")) opt.deltas = *v;
  return frontier_map(base.n, base.m, base.rho, *base.q, opt, spec).scan;
}

ScanResult run_hls(const RunConfig& rc, const QuadratureSpec& spec) {
  ExponentConfig cfg = rc.exponents();
  if (cfg.q && !cfg.p) cfg = with_p_from_q(cfg);
  if (cfg.p && !cfg.q) cfg = with_q_from_p(cfg);
  const TestFunction f = build_function(rc, "bump", cfg.n, cfg.m, spec);
  const double h = rc.real("window").value_or(2.0);
  return hls_iteration_check(cfg, f, cube_box(cfg.n, cfg.m, h), spec).scan;
}

ScanResult dispatch(const RunConfig& rc, const QuadratureSpec& spec) {
  const std::string& e = rc.experiment;
  if (e == "check") return run_check(rc, spec);
  if (e == "kernel") return run_kernel(rc, spec);
  if (e == "apply") return run_apply(rc, spec);
  if (e == "atom-validate") return run_atom_validate(rc, spec);
  if (e == "shells") return run_shells(rc, spec);
  if (e == "dilate") return run_dilate(rc, spec);
  if (e == "counterexample") return run_counterexample(rc, spec);
  if (e == "frontier") return run_frontier(rc, spec);
  if (e == "hls") return run_hls(rc, spec);
  field_error("experiment", "unknown experiment '" + e + "'");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical experiments for fractional integrals with flag kernels", "flagint"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (keys as below, with underscores)");
  std::map<std::string, std::string> raw;
  for (const auto& key : RunConfig::known_keys()) {
    if (key == "experiment") continue;
    app.add_option("--" + dashed(key), raw[key]);
  }
  for (const auto& name : kExperiments) app.add_subcommand(name, "run the " + name + " experiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  const auto t0 = std::chrono::steady_clock::now();
  ScanResult result;
  std::string output_dir = ".";
  std::uint64_t seed = 0;
  try {
    RunConfig rc = config_path.empty() ? RunConfig{} : load_config_file(config_path);
    if (const char* env = std::getenv("FLAGINT_SEED"); env && *env) rc.values["seed"] = std::string(env);
    for (const auto& key : RunConfig::known_keys()) {
      if (key != "experiment" && app.count("--" + dashed(key)) > 0) rc.values[key] = raw[key];
    }
    const auto subs = app.get_subcommands();
    if (!subs.empty()) rc.experiment = subs.front()->get_name();
    if (rc.experiment.empty()) field_error("experiment", "name an experiment (" + kExperiments.front() + ", ...)");
    rc.values["experiment"] = rc.experiment;
    const QuadratureSpec spec = rc.quadrature();
    seed = spec.seed;
    output_dir = rc.text("output").value_or(".");

    result = dispatch(rc, spec);
    result.metadata["run_config"] = rc.values;
    if (!result.metadata.contains("wall_time_s"))
      result.metadata["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.write(output_dir, seed);
  } catch (const AccuracyError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  out << result.summary << "\n";
  if (result.unresolved) return kExitUsage;
  return result.passed ? kExitPass : kExitViolation;
}

}  // namespace flagint
