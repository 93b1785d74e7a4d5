#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "flagint/domain.hpp"
#include "flagint/exponents.hpp"
#include "flagint/kernel.hpp"
#include "flagint/test_function.hpp"

namespace flagint {

enum class QuadratureMethod { Grid, MonteCarlo };

const char* to_string(QuadratureMethod method);
QuadratureMethod parse_quadrature_method(const std::string& text);

/// Accuracy controls shared by every integration routine.
struct QuadratureSpec {
  QuadratureMethod method = QuadratureMethod::Grid;
  int points_per_axis = 8;            // Gauss-Legendre order of each inner cell
  long samples = 200000;              // Monte Carlo samples per operator evaluation
  std::uint64_t seed = 20240601;
  int cutoff_exponent = -20;          // innermost cell: 2^e * support scale of f
  double target_rel_error = 1e-3;
  int outer_depth = 8;                // outer grading levels towards features
  int jobs = 1;                       // worker threads for outer integrals; 0 = all cores
  bool closed_form_y = true;          // flat cells, m = 1: exact y-integral of the flag kernel

  void validate() const;
};

/// Value with an a-posteriori error estimate.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Which kernel an integral is taken against.
enum class KernelChoice {
  Flag,        // |x|^{-(n-alpha)} (|x|^rho + |y|)^{-(m-beta)}
  Dominating,  // |x|^{-(n-a)} |y|^{-(m-b)}
};

/// Integral of f(u, v) K(x - u, y - v) du dv over the support of f.
///
/// Each cell of f is integrated by nested graded Gauss rules: dyadic cells in
/// |x_i - u_i| down to the cutoff, and for every u node dyadic cells in
/// |y_j - v_j| down to max(cutoff, |x - u|^rho / 4). The innermost cells use
/// power substitutions matched to the kernel exponents. The error estimate is
/// the difference against a half-order pass.
///
/// Throws AccuracyError (carrying the estimate) if the error estimate exceeds
/// target_rel_error relative to |value| plus a roundoff floor.
Estimate apply_operator(const ExponentConfig& cfg, const TestFunction& f, const PointPair& pt,
                        const QuadratureSpec& spec, KernelChoice kernel = KernelChoice::Flag);

/// Same integral with the kernel replaced by K(x-u, y-v) - K(x, y)
/// (requires x != 0). Equal to apply_operator for mean-zero f.
Estimate apply_operator_subtracted(const ExponentConfig& cfg, const TestFunction& f,
                                   const PointPair& pt, const QuadratureSpec& spec);

/// One-variable Riesz potential: integral of f(u) |x - u|^{alpha - 1} du.
/// f must have n = 1, m = 0. Requires 0 < alpha < 1.
Estimate apply_riesz_1d(const Rational& alpha, const TestFunction& f, double x,
                        const QuadratureSpec& spec);

/// Integral over the region of |I f|^q (I taken with the chosen kernel).
///
/// Outer rule: tensor 15-point Kronrod cells (embedded 7-point Gauss for the
/// error estimate), graded towards the cell edges of f. Radial parts of
/// dimension 2 or 3 use polar / spherical coordinates. Inner error estimates
/// are propagated through d|g|^q = q |g|^{q-1} dg.
/// Throws AccuracyError if the total error exceeds target_rel_error * value.
Estimate lq_mass(const ExponentConfig& cfg, const TestFunction& f, const Region& region,
                 const Rational& q, const QuadratureSpec& spec,
                 KernelChoice kernel = KernelChoice::Flag);

/// (integral of |f|^p)^{1/p}.
double lp_norm(const TestFunction& f, const Rational& p, const QuadratureSpec& spec);

}  // namespace flagint
