#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "flagint/atoms.hpp"
#include "flagint/domain.hpp"
#include "flagint/exponents.hpp"
#include "flagint/quadrature.hpp"
#include "flagint/test_function.hpp"

namespace flagint {

inline constexpr const char* kUnresolved = "UNRESOLVED";

struct ScanRow {
  std::vector<std::string> params;  // one entry per ScanResult::param_columns
  double value = 0.0;
  double err = 0.0;
  std::string label;
  std::string case_label;
};

/// Rows of one experiment plus metadata. CSV columns are
/// params..., value, err, label, case; the wall time lives only in the JSON.
struct ScanResult {
  std::string experiment;
  std::vector<std::string> param_columns;
  std::vector<ScanRow> rows;
  nlohmann::json metadata = nlohmann::json::object();
  std::string summary;
  bool passed = true;
  bool unresolved = false;

  std::string csv() const;
  nlohmann::json to_json() const;
  /// Writes {experiment}-{seed}.csv and .json into `dir`; returns the CSV path.
  std::filesystem::path write(const std::filesystem::path& dir, std::uint64_t seed) const;
};

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

nlohmann::json config_to_json(const ExponentConfig& cfg);
nlohmann::json spec_to_json(const QuadratureSpec& spec);

/// Least-squares line through (x, y) after dropping the first point.
struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square residual
  std::size_t window_begin = 0;
  std::size_t window_end = 0;  // one past the last point used
};

/// Throws PreconditionError if fewer than 4 points remain after the drop.
DecayFit fit_decay(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------

struct DilationOptions {
  std::vector<double> deltas{0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> lambdas{1.0};
  /// Window W for the q-norm; defaults to [-2, 2]^{n+m}. Row (delta, lambda)
  /// uses W scaled by delta in x and delta^rho lambda in y.
  std::optional<Box> window;
  double identity_tolerance = 0.01;
  double slope_tolerance = 0.05;
};

struct DilationReport {
  ScanResult scan;
  double delta_slope = 0.0;            // fitted d log r / d log delta at lambda = 1
  double delta_slope_predicted = 0.0;  // (alpha + rho beta) + (n + rho m)(1/q - 1/p)
  std::optional<DecayFit> delta_fit;
  double identity_max_deviation = 0.0;  // max |measured / predicted - 1| over delta rows
  bool lambda_bound_holds = true;
};

/// Ratios r(delta, lambda) = ||I f_{delta,lambda}||_{q,W_{delta,lambda}} / ||f_{delta,lambda}||_p
/// with f_{delta,lambda}(u, v) = f(u / delta, v / (delta^rho lambda)), scanned along the
/// delta axis (lambda = 1) and the lambda axis (delta = 1).
/// Requires p and q in cfg and f >= 0.
DilationReport dilation_scan(const ExponentConfig& cfg, const TestFunction& f, const DilationOptions& opt,
                             const QuadratureSpec& spec);

// ---------------------------------------------------------------------------

struct GrowthReport {
  ScanResult scan;
  std::vector<double> radii;
  std::vector<double> mass;  // F(R)
  std::vector<double> mass_err;
  std::vector<double> increments;  // F(R_k) - F(R_{k-1})
  bool increasing = false;
  double increment_spread = 0.0;       // max / min increment - 1
  double last_increment_share = 0.0;   // last increment / F(R_max)
  double log_slope = 0.0;              // c in F ~ c ln R + d
  double log_intercept = 0.0;
  double log_fit_residual_share = 0.0;  // max |residual| / (F_max - F_min)
};

/// alpha/n = beta/m with beta = m - m/q.
ExponentConfig critical_config(int n, int m, const Rational& rho, const Rational& q);

/// F(R) = integral over [2, 4]^n x {|y| <= R} of |I a|^q for the signum atom on
/// [-1, 1]^{n+m}, accumulated band by band. Requires q in cfg.
GrowthReport counterexample_scan(const ExponentConfig& cfg, const std::vector<double>& radii,
                                 const QuadratureSpec& spec);

GrowthReport counterexample_growth(int n, int m, const Rational& rho, const Rational& q,
                                   const std::vector<double>& radii, const QuadratureSpec& spec);

// ---------------------------------------------------------------------------

struct ShellOptions {
  int L = 0;
  int k_max = 8;
  int l_max = 40;
  int burn_in = 3;
  double epsilon = 0.5;
  bool include_core = true;  // shells with k = 0 or l = 0, and the gap
  double tail_tolerance = 0.01;
};

struct ShellReport {
  ScanResult scan;
  std::vector<double> case2_by_k;  // index k: sum over 1 <= l <= l_max (entry 0 unused)
  std::optional<DecayFit> k_fit;   // log2 case2_by_k against k, k >= burn_in
  double total = 0.0;
  double gap_mass = 0.0;
  double gap_err = 0.0;
  double k_tail_share = 0.0;  // column k = k_max over the total
  double l_tail_share = 0.0;  // row l = l_max over the total
  bool slope_ok = false;
  bool cauchy = false;
};

/// Masses of |I f|^q over every shell Q_{kl}, 0 <= k <= k_max, 0 <= l <= l_max.
/// Requires formula two.
ShellReport shell_decay_profile(const ExponentConfig& cfg, const TestFunction& f, const ShellOptions& opt,
                                const QuadratureSpec& spec);

// ---------------------------------------------------------------------------

struct FrontierOptions {
  std::vector<Rational> alphas;
  std::vector<Rational> betas;
  std::vector<double> radii{10.0, 100.0, 1000.0, 10000.0};
  std::vector<double> deltas{0.25, 0.5, 1.0, 2.0, 4.0};
  double slope_tolerance = 0.05;
  double growth_ratio = 0.7;  // on the line: bounded iff last / previous decade increment < this
};

struct FrontierReport {
  ScanResult scan;
  // [theorem bounded?][empirical bounded?], index 0 = unbounded.
  std::array<std::array<int, 2>, 2> confusion{};
  int unresolved = 0;
  bool diagonal = false;
};

/// Theorem labels from formula two; empirical labels from the measured
/// dilation slope of the signum atom (off the homogeneity line, p = 1) or
/// from the decay of counterexample decade increments (on the line).
FrontierReport frontier_map(int n, int m, const Rational& rho, const Rational& q, const FrontierOptions& opt,
                            const QuadratureSpec& spec);

// ---------------------------------------------------------------------------

struct HlsReport {
  ScanResult scan;
  double left = 0.0;  // ||I f||_{q,W}
  double left_err = 0.0;
  double right = 0.0;  // same with the dominating product kernel
  double right_err = 0.0;
  bool holds = false;
};

/// Requires formula one, n + m <= 3 and f >= 0.
HlsReport hls_iteration_check(const ExponentConfig& cfg, const TestFunction& f, const Box& window,
                              const QuadratureSpec& spec);

}  // namespace flagint
