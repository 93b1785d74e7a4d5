#include <doctest.h>

#include <cmath>
#include <numbers>

#include "flagint/domain.hpp"
#include "flagint/errors.hpp"

using namespace flagint;

TEST_CASE("cube geometry") {
  const Cube c{1, 1, 0};
  CHECK(c.side() == 1.0);
  CHECK(c.volume() == 1.0);
  CHECK(c.half().side() == 0.5);
  CHECK(c.contains({{0.5}, {-0.5}}));
  CHECK_FALSE(c.contains({{0.51}, {0.0}}));
  CHECK(Cube{2, 1, 1}.volume() == 8.0);
}

TEST_CASE("shell bands") {
  const Shell s{2, 3, 0};
  const RadialBand x = s.x_band(1);
  const RadialBand y = s.y_band(1);
  CHECK(x.inner == 2.0);
  CHECK(x.outer == 4.0);
  CHECK(y.inner == 4.0);
  CHECK(y.outer == 8.0);
  const Shell core_x{0, 2, 1};
  CHECK(core_x.x_band(1).inner == 0.0);
  CHECK(core_x.x_band(1).outer == 2.0);
  CHECK_THROWS_AS(Shell({-1, 0, 0}).validate(), ConfigError);
  CHECK(shell_contains(s, {{3.0}, {-5.0}}));
  CHECK_FALSE(shell_contains(s, {{3.0}, {8.0}}));
}

TEST_CASE("radial band volumes") {
  CHECK(RadialBand{1, 1.0, 2.0}.volume() == doctest::Approx(2.0));
  CHECK(RadialBand{2, 0.0, 1.0}.volume() == doctest::Approx(std::numbers::pi));
  CHECK(RadialBand{3, 0.0, 1.0}.volume() == doctest::Approx(4.0 * std::numbers::pi / 3.0));
}

TEST_CASE("shell case labels") {
  ExponentConfig cfg;
  cfg.alpha = Rational(9, 10);
  cfg.beta = Rational(3, 10);
  cfg.rho = Rational(2);
  CHECK(shell_case({0, 0, 0}, cfg).label == ShellCaseLabel::Case1);
  CHECK(shell_case({2, 3, 0}, cfg).label == ShellCaseLabel::Case2);
  CHECK(shell_case({2, 0, 0}, cfg).label == ShellCaseLabel::Case3);
  CHECK(shell_case({0, 5, 0}, cfg).label == ShellCaseLabel::Case4);
  const ShellCase c = shell_case({2, 5, 0}, cfg);
  CHECK(c.rho_k_dominates == false);
  CHECK(c.l_at_least_k);
}

TEST_CASE("gap between cube and core annuli") {
  CHECK(in_shell_gap(0, {{0.75}, {0.1}}));
  CHECK_FALSE(in_shell_gap(0, {{0.25}, {0.1}}));
  CHECK_FALSE(in_shell_gap(0, {{1.5}, {0.1}}));
}

TEST_CASE("product regions") {
  const ProductRegion r = to_product_region(CounterexampleRegion{1, 1, 10.0}, 1, 1);
  const auto& x = std::get<std::vector<Interval>>(r.x);
  CHECK(x[0].lo == 2.0);
  CHECK(x[0].hi == 4.0);
  CHECK(std::get<RadialBand>(r.y).outer == 10.0);
  const ProductRegion core = to_product_region(Shell{0, 0, 0}, 1, 1);
  CHECK(std::get<std::vector<Interval>>(core.x)[0].hi == 0.5);
  CHECK_THROWS_AS(to_product_region(CounterexampleRegion{2, 1, 10.0}, 1, 1), ConfigError);
  CHECK(CounterexampleRegion{1, 1, 10.0}.contains({{3.0}, {-9.0}}));
}
