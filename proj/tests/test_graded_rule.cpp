#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "flagint/errors.hpp"
#include "flagint/graded_rule.hpp"

using namespace flagint;

namespace {

// Integral of t^k over [0, 1] from nodes and weights.
double moment(const std::vector<double>& nodes, const std::vector<double>& weights, int k) {
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * std::pow(nodes[i], k);
  return s;
}

double leaf_volume(const GradedLeaf& leaf) {
  double v = 1.0;
  for (std::size_t i = 0; i < leaf.near.size(); ++i) v *= std::abs(leaf.far[i] - leaf.near[i]);
  return v;
}

}  // namespace

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2N-1 exactly") {
  for (int order : {1, 2, 4, 8, 16, 33}) {
    const GaussLegendre& gl = gauss_legendre(order);
    REQUIRE(gl.nodes.size() == static_cast<std::size_t>(order));
    for (int k = 0; k <= 2 * order - 1; ++k) {
      CHECK(moment(gl.nodes, gl.weights, k) == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
    for (double t : gl.nodes) {
      CHECK(t > 0.0);
      CHECK(t < 1.0);
    }
  }
  CHECK_THROWS_AS(gauss_legendre(0), ConfigError);
  CHECK_THROWS_AS(gauss_legendre(65), ConfigError);
}

TEST_CASE("Kronrod pairs: exactness of both members") {
  const KronrodPair& k7 = kronrod7();
  REQUIRE(k7.nodes.size() == 7);
  for (int k = 0; k <= 9; ++k) {
    CHECK(moment(k7.nodes, k7.kronrod_weights, k) == doctest::Approx(1.0 / (k + 1)).epsilon(1e-14));
  }
  for (int k = 0; k <= 5; ++k) {
    CHECK(moment(k7.nodes, k7.gauss_weights, k) == doctest::Approx(1.0 / (k + 1)).epsilon(1e-14));
  }
  // The embedded rule is not exact one degree higher.
  CHECK(std::abs(moment(k7.nodes, k7.gauss_weights, 6) - 1.0 / 7) > 1e-6);

  const KronrodPair& k15 = kronrod15();
  REQUIRE(k15.nodes.size() == 15);
  for (int k = 0; k <= 21; ++k) {
    CHECK(moment(k15.nodes, k15.kronrod_weights, k) == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
  }
  for (int k = 0; k <= 13; ++k) {
    CHECK(moment(k15.nodes, k15.gauss_weights, k) == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
  }
  for (double t : k15.nodes) {
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
  }
}

TEST_CASE("graded leaves tile the box") {
  const std::vector<Interval> box{{-1.0, 2.0}, {0.5, 1.5}};
  for (const std::vector<double>& s : {std::vector<double>{0.0, 1.0}, std::vector<double>{5.0, 1.0},
                                       std::vector<double>{-1.0, 0.5}, std::vector<double>{0.3, -2.0}}) {
    const auto leaves = graded_leaves(box, s, 1e-6);
    double v = 0.0;
    for (const auto& leaf : leaves) v += leaf_volume(leaf);
    CHECK(v == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("graded leaves reach the cutoff only next to the point") {
  const std::vector<Interval> box{{-1.0, 1.0}};
  const std::vector<double> s{0.0};
  const auto leaves = graded_leaves(box, s, 1e-3);
  int substituted = 0;
  for (const auto& leaf : leaves) {
    if (leaf.substituted) {
      ++substituted;
      CHECK(leaf.near[0] == 0.0);
      CHECK(std::abs(leaf.far[0]) <= 1e-3);
    } else {
      CHECK(std::abs(leaf.near[0]) >= std::abs(leaf.far[0] - leaf.near[0]) * (1 - 1e-12));
    }
  }
  CHECK(substituted == 2);
  CHECK_THROWS_AS(graded_leaves(box, s, 0.0), ConfigError);
}

TEST_CASE("leaf axis map: Jacobian integrates to the width") {
  const GaussLegendre& gl = gauss_legendre(16);
  for (double gamma : {1.0, 2.0, 3.0}) {
    double total = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      total += gl.weights[i] * map_leaf_axis(0.0, -0.25, true, gamma, gl.nodes[i]).jacobian;
    }
    CHECK(total == doctest::Approx(0.25).epsilon(1e-12));
  }
  const AxisMap m = map_leaf_axis(1.0, 3.0, true, 2.0, 0.5);
  CHECK(m.offset == doctest::Approx(1.5));
  CHECK(m.jacobian == doctest::Approx(2.0));
}

TEST_CASE("substitution absorbs an integrable power singularity") {
  // Integral of t^{-1/2} over (0, 1] = 2.
  const GaussLegendre& gl = gauss_legendre(8);
  double total = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const AxisMap m = map_leaf_axis(0.0, 1.0, true, 2.0, gl.nodes[i]);
    total += gl.weights[i] * m.jacobian / std::sqrt(m.offset);
  }
  CHECK(total == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("graded breakpoints cover the interval and include the features") {
  const std::vector<double> features{0.0, 1.0, 7.0};
  const auto marks = graded_breakpoints(-2.0, 4.0, features, 1e-3);
  REQUIRE(marks.size() >= 3);
  CHECK(marks.front() == -2.0);
  CHECK(marks.back() == 4.0);
  CHECK(std::is_sorted(marks.begin(), marks.end()));
  CHECK(std::find(marks.begin(), marks.end(), 0.0) != marks.end());
  CHECK(std::find(marks.begin(), marks.end(), 1.0) != marks.end());
  for (std::size_t i = 1; i < marks.size(); ++i) CHECK(marks[i] > marks[i - 1]);
  // The smallest piece next to a feature is at the cutoff scale.
  double smallest = 1e9;
  for (std::size_t i = 1; i < marks.size(); ++i) smallest = std::min(smallest, marks[i] - marks[i - 1]);
  CHECK(smallest <= 2e-3);
}
