#pragma once

#include <optional>
#include <string>

#include "flagint/rational.hpp"

namespace flagint {

/// Exponent tuple (n, m, alpha, beta, rho, p, q) of the flag-kernel operator.
///
/// n, m are the dimensions of the x and y factors. The standing hypotheses are
/// 0 < alpha < n, 0 < beta < m and rho >= 1; when both p and q are present they
/// must satisfy 1 <= p < q < infinity. All arithmetic is exact.
struct ExponentConfig {
  int n = 1;
  int m = 1;
  Rational alpha;
  Rational beta;
  Rational rho{1};
  std::optional<Rational> p;
  std::optional<Rational> q;

  /// Throws ConfigError if any standing hypothesis fails.
  void validate() const;

  /// (alpha + rho*beta) / (n + rho*m), the exponent fixed by dilation invariance.
  Rational homogeneity() const;

  double alpha_d() const;
  double beta_d() const;
  double rho_d() const;
  double q_d() const;  // throws ConfigError if q is absent
  double p_d() const;  // throws ConfigError if p is absent

  std::string describe() const;

  friend bool operator==(const ExponentConfig&, const ExponentConfig&) = default;
};

/// Exponents a, b with a/n = b/m and a + rho*b = alpha + rho*beta.
struct DerivedExponents {
  Rational a;
  Rational b;

  double a_d() const;
  double b_d() const;
};

/// alpha/n >= beta/m and homogeneity() == 1/p - 1/q.
/// Throws ConfigError when p or q is missing.
bool check_formula_one(const ExponentConfig& cfg);

/// alpha/n > beta/m (strict) and homogeneity() == 1 - 1/q.
/// Throws ConfigError when q is missing.
bool check_formula_two(const ExponentConfig& cfg);

/// Solves the 2x2 system for (a, b). Throws RegionError if alpha/n < beta/m.
DerivedExponents derive_ab(const ExponentConfig& cfg);

struct StrictConsequences {
  bool alpha_above;  // alpha/n > 1 - 1/q
  bool beta_below;   // beta/m  < 1 - 1/q
};

/// The two strict inequalities implied by formula two.
/// Throws PreconditionError unless check_formula_two(cfg) holds.
StrictConsequences strict_consequences(const ExponentConfig& cfg);

/// Exponents of L^{-a} T^{-b} on the Heisenberg group H^d:
/// n = 2d, m = 1, alpha = 2a, beta = b, rho = 2.
/// Throws ConfigError unless 0 < a < d and 0 < b < 1.
ExponentConfig heisenberg_map(int d, const Rational& a, const Rational& b);

/// Returns cfg with p set so that homogeneity() == 1/p - 1/q (q required).
/// Throws RegionError if the resulting p is not in [1, q).
ExponentConfig with_p_from_q(ExponentConfig cfg);

/// Returns cfg with q set so that homogeneity() == 1/p - 1/q (p required).
/// Throws RegionError if 1/p - homogeneity() <= 0.
ExponentConfig with_q_from_p(ExponentConfig cfg);

/// Returns cfg with p = 1 and q set so that homogeneity() == 1 - 1/q.
ExponentConfig with_h1_q(ExponentConfig cfg);

}  // namespace flagint
