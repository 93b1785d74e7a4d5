#include "flagint/exponents.hpp"

#include <sstream>

#include "flagint/errors.hpp"

namespace flagint {

void ExponentConfig::validate() const {
  if (n < 1 || m < 1) throw ConfigError("dimensions n and m must be positive");
  if (alpha <= 0 || alpha >= n) throw ConfigError("alpha must lie in (0, n), got " + to_string(alpha));
  if (beta <= 0 || beta >= m) throw ConfigError("beta must lie in (0, m), got " + to_string(beta));
  if (rho < 1) throw ConfigError("rho must be >= 1, got " + to_string(rho));
  if (p && *p < 1) throw ConfigError("p must be >= 1, got " + to_string(*p));
  if (q && *q <= 1) throw ConfigError("q must be > 1, got " + to_string(*q));
  if (p && q && !(*p < *q)) throw ConfigError("p < q required");
}

Rational ExponentConfig::homogeneity() const {
  return (alpha + rho * beta) / (Rational(n) + rho * m);
}

double ExponentConfig::alpha_d() const { return to_double(alpha); }
double ExponentConfig::beta_d() const { return to_double(beta); }
double ExponentConfig::rho_d() const { return to_double(rho); }

double ExponentConfig::q_d() const {
  if (!q) throw ConfigError("configuration incomplete: q is required");
  return to_double(*q);
}

double ExponentConfig::p_d() const {
  if (!p) throw ConfigError("configuration incomplete: p is required");
  return to_double(*p);
}

std::string ExponentConfig::describe() const {
  std::ostringstream os;
  os << "n=" << n << " m=" << m << " alpha=" << to_string(alpha) << " beta=" << to_string(beta)
     << " rho=" << to_string(rho);
  if (p) os << " p=" << to_string(*p);
  if (q) os << " q=" << to_string(*q);
  return os.str();
}

double DerivedExponents::a_d() const { return to_double(a); }
double DerivedExponents::b_d() const { return to_double(b); }

bool check_formula_one(const ExponentConfig& cfg) {
  if (!cfg.p || !cfg.q) throw ConfigError("configuration incomplete: formula one needs p and q");
  cfg.validate();
  const bool ordered = cfg.alpha / cfg.n >= cfg.beta / cfg.m;
  return ordered && cfg.homogeneity() == 1 / *cfg.p - 1 / *cfg.q;
}

bool check_formula_two(const ExponentConfig& cfg) {
  if (!cfg.q) throw ConfigError("configuration incomplete: formula two needs q");
  cfg.validate();
  const bool strict = cfg.alpha / cfg.n > cfg.beta / cfg.m;
  return strict && cfg.homogeneity() == 1 - 1 / *cfg.q;
}

DerivedExponents derive_ab(const ExponentConfig& cfg) {
  cfg.validate();
  if (cfg.alpha / cfg.n < cfg.beta / cfg.m) {
    throw RegionError("alpha/n < beta/m: a <= alpha cannot hold (" + cfg.describe() + ")");
  }
  const Rational s = cfg.alpha + cfg.rho * cfg.beta;
  const Rational n(cfg.n), m(cfg.m);
  return {s / (1 + cfg.rho * m / n), s / (n / m + cfg.rho)};
}

StrictConsequences strict_consequences(const ExponentConfig& cfg) {
  if (!check_formula_two(cfg)) {
    throw PreconditionError("formula two does not hold for " + cfg.describe());
  }
  const Rational t = 1 - 1 / *cfg.q;
  return {cfg.alpha / cfg.n > t, cfg.beta / cfg.m < t};
}

ExponentConfig heisenberg_map(int d, const Rational& a, const Rational& b) {
  if (d < 1) throw ConfigError("d must be a positive integer");
  if (a <= 0 || a >= d) throw ConfigError("a must lie in (0, d)");
  if (b <= 0 || b >= 1) throw ConfigError("b must lie in (0, 1)");
  ExponentConfig cfg;
  cfg.n = 2 * d;
  cfg.m = 1;
  cfg.alpha = 2 * a;
  cfg.beta = b;
  cfg.rho = 2;
  return cfg;
}

ExponentConfig with_p_from_q(ExponentConfig cfg) {
  if (!cfg.q) throw ConfigError("configuration incomplete: q is required to derive p");
  const Rational inv_p = cfg.homogeneity() + 1 / *cfg.q;
  if (inv_p > 1) throw RegionError("derived p would be < 1 for " + cfg.describe());
  cfg.p = 1 / inv_p;
  cfg.validate();
  return cfg;
}

ExponentConfig with_q_from_p(ExponentConfig cfg) {
  if (!cfg.p) throw ConfigError("configuration incomplete: p is required to derive q");
  const Rational inv_q = 1 / *cfg.p - cfg.homogeneity();
  if (inv_q <= 0) throw RegionError("no finite q > p exists for " + cfg.describe());
  cfg.q = 1 / inv_q;
  cfg.validate();
  return cfg;
}

ExponentConfig with_h1_q(ExponentConfig cfg) {
  cfg.p = Rational(1);
  cfg.q.reset();
  return with_q_from_p(std::move(cfg));
}

}  // namespace flagint
