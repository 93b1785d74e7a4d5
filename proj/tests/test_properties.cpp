#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "flagint/atoms.hpp"
#include "flagint/experiments.hpp"
#include "flagint/graded_rule.hpp"
#include "flagint/kernel.hpp"
#include "flagint/quadrature.hpp"
#include "support/gen.hpp"

using namespace flagint;

namespace {

PointPair random_point(testgen::Gen& g, int n, int m, double scale) {
  PointPair p;
  for (int i = 0; i < n; ++i) p.x.push_back(g.real(-scale, scale));
  for (int j = 0; j < m; ++j) p.y.push_back(g.real(-scale, scale));
  return p;
}

PointPair dilate(const PointPair& p, double d, double rho) {
  PointPair q = p;
  for (double& v : q.x) v *= d;
  for (double& v : q.y) v *= std::pow(d, rho);
  return q;
}

}  // namespace

TEST_CASE("property: flag kernel is homogeneous of its degree") {
  testgen::Gen g(1);
  for (int i = 0; i < 2000; ++i) {
    const ExponentConfig cfg = g.config(4);
    const FlagKernel k(cfg);
    const PointPair p = random_point(g, cfg.n, cfg.m, 3.0);
    if (p.norm_x() < 1e-6) continue;
    const double d = g.log_real(1e-3, 1e3);
    const double lhs = k(dilate(p, d, k.rho()));
    const double rhs = std::pow(d, -k.degree()) * k(p);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("property: the product kernel dominates the flag kernel") {
  testgen::Gen g(2);
  for (int i = 0; i < 2000; ++i) {
    const ExponentConfig cfg = g.config(3);
    if (cfg.alpha * cfg.m < cfg.beta * cfg.n) continue;
    const FlagKernel k(cfg);
    const DominatingKernel d(cfg);
    const PointPair p = random_point(g, cfg.n, cfg.m, g.log_real(1e-3, 1e3));
    if (p.norm_x() < 1e-300 || p.norm_y() < 1e-300) continue;
    CHECK(k(p) <= d(p) * (1 + 1e-12));
  }
}

TEST_CASE("property: derived exponents solve their defining system exactly") {
  testgen::Gen g(3);
  int tested = 0;
  for (int i = 0; i < 500; ++i) {
    const ExponentConfig cfg = g.config(5);
    if (cfg.alpha * cfg.m < cfg.beta * cfg.n) continue;
    const DerivedExponents ab = derive_ab(cfg);
    CHECK(ab.a * cfg.m == ab.b * cfg.n);
    CHECK(ab.a + cfg.rho * ab.b == cfg.alpha + cfg.rho * cfg.beta);
    CHECK(ab.a <= cfg.alpha);
    CHECK(ab.b >= cfg.beta);
    ++tested;
  }
  CHECK(tested > 100);
}

TEST_CASE("property: graded leaves tile random boxes") {
  testgen::Gen g(4);
  for (int i = 0; i < 200; ++i) {
    const int dim = static_cast<int>(g.integer(1, 3));
    std::vector<Interval> box;
    std::vector<double> s;
    double vol = 1.0;
    for (int a = 0; a < dim; ++a) {
      const double lo = g.real(-2, 1);
      const double hi = lo + g.log_real(1e-2, 3);
      box.push_back({lo, hi});
      vol *= hi - lo;
      s.push_back(g.coin() ? g.real(lo, hi) : g.real(-4, 4));
    }
    double total = 0.0;
    for (const auto& leaf : graded_leaves(box, s, g.log_real(1e-8, 1e-2))) {
      double v = 1.0;
      for (int a = 0; a < dim; ++a) v *= std::abs(leaf.far[a] - leaf.near[a]);
      total += v;
    }
    CHECK(total == doctest::Approx(vol).epsilon(1e-11));
  }
}

TEST_CASE("property: operator dilation identity") {
  // I(f_delta)(delta x, delta^rho y) = delta^{alpha + rho beta} I f(x, y).
  testgen::Gen g(5);
  QuadratureSpec spec;
  spec.target_rel_error = 1e-6;
  spec.points_per_axis = 12;
  const auto f = TestFunction::indicator(Box{{{-1.0, 1.0}}, {{-1.0, 1.0}}});
  for (int i = 0; i < 12; ++i) {
    ExponentConfig cfg = g.config(1);
    cfg.rho = Rational(g.integer(4, 12), 4);
    const PointPair p{{g.real(1.5, 4.0) * (g.coin() ? 1 : -1)}, {g.real(-3.0, 3.0)}};
    const double d = g.log_real(0.25, 4.0);
    const double rho = to_double(cfg.rho);
    const double base = apply_operator(cfg, f, p, spec).value;
    const double scaled = apply_operator(cfg, f.dilated(d, std::pow(d, rho)), dilate(p, d, rho), spec).value;
    CHECK(scaled == doctest::Approx(std::pow(d, to_double(cfg.alpha + cfg.rho * cfg.beta)) * base).epsilon(1e-6));
  }
}

TEST_CASE("property: the operator is linear") {
  testgen::Gen g(6);
  QuadratureSpec spec;
  spec.target_rel_error = 1e-6;
  spec.points_per_axis = 12;
  for (int i = 0; i < 8; ++i) {
    const ExponentConfig cfg = g.config(1);
    const Atom a = make_random_atom(Cube{1, 1, 0}, g.next());
    const auto ind = TestFunction::indicator(Box{{{-0.25, 0.25}}, {{-0.25, 0.25}}});
    const double c = g.real(-3, 3);
    std::vector<FunctionCell> cells = a.payload.scaled(c).cells();
    const PointPair p{{g.real(1.0, 3.0)}, {g.real(-2.0, 2.0)}};
    // The atom's cells tile the indicator's box, so the sum is cellwise.
    const double ia = apply_operator(cfg, a.payload, p, spec).value;
    const double ii = apply_operator(cfg, ind, p, spec).value;
    for (auto& cell : cells) cell.value += 1.0;
    const TestFunction sum(TestFunctionKind::CustomSampled, 1, 1, cells);
    const double is = apply_operator(cfg, sum, p, spec).value;
    CHECK(is == doctest::Approx(c * ia + ii).epsilon(1e-6).scale(1e-8));
  }
}

TEST_CASE("property: random atoms are valid for every seed and scale") {
  testgen::Gen g(7);
  QuadratureSpec spec;
  for (int i = 0; i < 300; ++i) {
    const Cube q{static_cast<int>(g.integer(1, 3)), static_cast<int>(g.integer(1, 3)),
                 static_cast<int>(g.integer(-6, 6))};
    const Atom a = make_random_atom(q, g.next());
    const AtomReport r = validate_atom(a, spec);
    CHECK(r.ok());
    CHECK(r.mean == 0.0);
  }
}

TEST_CASE("property: results do not depend on the worker count") {
  const ExponentConfig cfg = critical_config(1, 1, Rational(2), Rational(2));
  QuadratureSpec one;
  QuadratureSpec four = one;
  four.jobs = 4;
  const Atom a = make_signum_atom(1, 1);
  const Region region = CounterexampleRegion{1, 1, 30.0};
  const Estimate e1 = lq_mass(cfg, a.payload, region, Rational(2), one);
  const Estimate e4 = lq_mass(cfg, a.payload, region, Rational(2), four);
  CHECK(e1.value == e4.value);
  CHECK(e1.error == e4.error);

  QuadratureSpec mc1;
  mc1.method = QuadratureMethod::MonteCarlo;
  mc1.samples = 20000;
  mc1.target_rel_error = 1.0;
  QuadratureSpec mc3 = mc1;
  mc3.jobs = 3;
  const Estimate m1 = lq_mass(cfg, a.payload, Shell{1, 1, 0}, Rational(2), mc1);
  const Estimate m3 = lq_mass(cfg, a.payload, Shell{1, 1, 0}, Rational(2), mc3);
  CHECK(m1.value == m3.value);
}
