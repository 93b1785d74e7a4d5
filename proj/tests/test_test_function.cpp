#include <doctest.h>

#include <cmath>

#include "flagint/errors.hpp"
#include "flagint/test_function.hpp"

using namespace flagint;

namespace {

Box square(double lo, double hi) { return Box{{{lo, hi}}, {{lo, hi}}}; }

}  // namespace

TEST_CASE("bump profile") {
  CHECK(bump_profile(0.0) == 1.0);
  CHECK(bump_profile(1.0) == 0.0);
  CHECK(bump_profile(-1.5) == 0.0);
  CHECK(bump_profile(0.5) == doctest::Approx(std::exp(1.0 - 4.0 / 3.0)));
  CHECK(bump_profile(0.3) == bump_profile(-0.3));
}

TEST_CASE("indicator evaluation and integral") {
  const auto f = TestFunction::indicator(square(-1.0, 1.0), 2.5);
  CHECK(f({{0.0}, {0.9}}) == 2.5);
  CHECK(f({{1.2}, {0.0}}) == 0.0);
  CHECK(f.exact_integral() == 10.0);
  CHECK(f.sup_norm() == 2.5);
  CHECK(f.non_negative());
  CHECK(f.support_scale() == 2.0);
}

TEST_CASE("smooth bump evaluates the product profile") {
  const auto f = TestFunction::smooth_bump(square(-1.0, 1.0));
  CHECK(f({{0.0}, {0.0}}) == 1.0);
  CHECK(f({{0.5}, {0.0}}) == doctest::Approx(bump_profile(0.5)));
  CHECK(f({{0.5}, {-0.5}}) == doctest::Approx(bump_profile(0.5) * bump_profile(0.5)));
  CHECK_FALSE(f.piecewise_constant());
  CHECK_THROWS_AS(f.exact_integral(), PreconditionError);
}

TEST_CASE("dilation, translation and scaling") {
  const auto f = TestFunction::indicator(square(0.0, 1.0));
  const auto d = f.dilated(2.0, 4.0);
  CHECK(d.exact_integral() == 8.0);
  CHECK(d({{1.9}, {3.9}}) == 1.0);
  CHECK(d({{2.1}, {1.0}}) == 0.0);
  const auto t = f.translated({1.0}, {-1.0});
  CHECK(t({{1.5}, {-0.5}}) == 1.0);
  CHECK(f.scaled(-3.0).exact_integral() == -3.0);
  CHECK_THROWS_AS(f.dilated(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(f.translated({1.0, 2.0}, {0.0}), ConfigError);

  const auto b = TestFunction::smooth_bump(square(-1.0, 1.0)).dilated(0.5, 0.25);
  CHECK(b({{0.25}, {0.0}}) == doctest::Approx(bump_profile(0.5)));
}

TEST_CASE("sampled grid") {
  const auto f = TestFunction::sampled(square(0.0, 2.0), {2, 2}, {1.0, 2.0, 3.0, 4.0});
  // Last axis fastest.
  CHECK(f({{0.5}, {0.5}}) == 1.0);
  CHECK(f({{0.5}, {1.5}}) == 2.0);
  CHECK(f({{1.5}, {0.5}}) == 3.0);
  CHECK(f.exact_integral() == 10.0);
  CHECK_THROWS_AS(TestFunction::sampled(square(0.0, 2.0), {2, 2}, {1.0}), ConfigError);
}

TEST_CASE("zero function and malformed cells") {
  const auto z = TestFunction::zero(2, 1);
  CHECK(z.is_zero());
  CHECK(z.exact_integral() == 0.0);
  CHECK_THROWS_AS(TestFunction(TestFunctionKind::IndicatorBox, 1, 1, {FunctionCell{square(1.0, 1.0), 1.0, false}}),
                  ConfigError);
  CHECK_THROWS_AS(TestFunction(TestFunctionKind::IndicatorBox, 0, 1, {}), ConfigError);
}
