#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "flagint/domain.hpp"

namespace flagint {

/// Gauss-Legendre nodes and weights on [0, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached rule of the given order (1..64).
const GaussLegendre& gauss_legendre(int order);

/// Kronrod nodes on [0, 1] with the weights of the embedded Gauss rule
/// (zero on the Kronrod-only nodes).
struct KronrodPair {
  std::vector<double> nodes;
  std::vector<double> kronrod_weights;
  std::vector<double> gauss_weights;
};

const KronrodPair& kronrod15();  // embedded 7-point Gauss
const KronrodPair& kronrod7();   // embedded 3-point Gauss

/// A leaf box of a dyadic decomposition around a point s, stored as offsets
/// t - s so that |t - s| stays exact far below ulp(s). Per axis, `near` is the
/// end closest to s.
struct GradedLeaf {
  std::vector<double> near;
  std::vector<double> far;
  bool substituted = false;  // near end within the cutoff ball of s
};

/// Splits a box into leaves graded towards s.
///
/// The box is first cut at s along every axis. A piece whose distance to s is
/// at least its largest side is a leaf. A piece touching s is halved along its
/// long sides; any other piece is halved along its longest side. Pieces no
/// larger than `cutoff` become substituted leaves, integrated with
/// t - near = (far - near) w^gamma to absorb the power singularity at s.
std::vector<GradedLeaf> graded_leaves(std::span<const Interval> box, std::span<const double> s,
                                      double cutoff);

/// Maps a Gauss node w in [0, 1] to the offset along one leaf axis and the
/// corresponding weight factor (the Jacobian).
struct AxisMap {
  double offset;
  double jacobian;
};

inline AxisMap map_leaf_axis(double near, double far, bool substituted, double gamma, double w) {
  const double width = far - near;
  if (!substituted || gamma == 1.0) return {near + width * w, std::abs(width)};
  const double wg1 = std::pow(w, gamma - 1.0);
  const double j = width * gamma * wg1;
  return {near + width * wg1 * w, std::abs(j)};
}

/// Cell breakpoints for the outer (region) rules: [a, b] is split at every
/// feature point inside it and each piece is graded dyadically towards the
/// features at its ends, down to `cutoff`. Returned as sorted breakpoints.
std::vector<double> graded_breakpoints(double a, double b, std::span<const double> features,
                                       double cutoff);

}  // namespace flagint
