#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flagint/exponents.hpp"
#include "flagint/quadrature.hpp"

namespace flagint {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitPass = 0, kExitUsage = 1, kExitViolation = 2 };

/// Merged run configuration: config-file values overridden by flags. Keys use
/// underscores (points_per_axis); values are strings, numbers, booleans or
/// arrays exactly as given.
struct RunConfig {
  std::string experiment;
  nlohmann::json values = nlohmann::json::object();

  /// Keys accepted in config files and, with dashes, as flags.
  static const std::vector<std::string>& known_keys();

  bool has(const std::string& key) const { return values.contains(key); }
  std::optional<Rational> rational(const std::string& key) const;
  std::optional<long> integer(const std::string& key) const;
  std::optional<double> real(const std::string& key) const;
  std::optional<bool> boolean(const std::string& key) const;
  std::optional<std::string> text(const std::string& key) const;
  /// Arrays, or comma-separated strings.
  std::optional<std::vector<double>> reals(const std::string& key) const;
  std::optional<std::vector<Rational>> rationals(const std::string& key) const;

  /// n, m, alpha, beta, rho, p, q. alpha and beta are required unless
  /// `exponents_optional`; the result is validated.
  ExponentConfig exponents(bool exponents_optional = false) const;
  /// Quadrature fields; jobs defaults to all cores.
  QuadratureSpec quadrature() const;
};

/// Parses a JSON config file; unknown keys raise ConfigError naming the key.
RunConfig load_config_file(const std::string& path);

/// Full front end: parse, dispatch, write artifacts, print the summary.
/// FLAGINT_SEED (if set) replaces a seed from the config file; a --seed flag
/// wins over both.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flagint
