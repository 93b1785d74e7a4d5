#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "flagint/domain.hpp"
#include "flagint/quadrature.hpp"
#include "flagint/test_function.hpp"

namespace flagint {

/// Which size conditions an atom is held to.
///
/// Strict: support in (1/2)Q and |a| <= 1/vol(Q).
/// Lenient: support in Q and |a| <= 2^{n+m}/vol(Q).
enum class AtomNormalization { Strict, Lenient };

const char* to_string(AtomNormalization norm);
AtomNormalization parse_atom_normalization(const std::string& text);

struct Atom {
  Cube cube;
  int L = 0;  // same as cube.L
  TestFunction payload;
  AtomNormalization normalization = AtomNormalization::Strict;
};

/// sgn(x_1) on Q_o = [-1, 1]^{n+m}. Its cube is Q_o itself, so it is an atom
/// only under the lenient normalization.
Atom make_signum_atom(int n, int m);

/// sgn(x_1) / vol(Q) on (1/2)Q: the strict atom with the same sign pattern.
Atom make_signum_atom_on(const Cube& cube);

/// Piecewise constant on the 2 x ... x 2 split of (1/2)Q. Values are drawn on
/// a dyadic grid so the mean subtraction is exact in floating point.
Atom make_random_atom(const Cube& cube, std::uint64_t seed);

/// |a| for a given atom: same support and sup, no cancellation.
TestFunction non_cancelling_bump(const Atom& atom);

struct AtomReport {
  bool support_ok = false;
  bool bound_ok = false;
  bool mean_ok = false;
  double sup = 0.0;
  double bound = 0.0;
  double mean = 0.0;  // integral of the payload

  bool ok() const { return support_ok && bound_ok && mean_ok; }
};

/// Checks the three atom conditions. The mean is summed exactly in rational
/// arithmetic and must satisfy |mean| <= 1e-10 vol(Q) sup|a|.
/// `normalization` overrides the one recorded in the atom.
/// Throws PreconditionError for payloads with smooth cells.
AtomReport validate_atom(const Atom& atom, const QuadratureSpec& spec,
                         std::optional<AtomNormalization> normalization = std::nullopt);

/// {n, m, L, normalization, cells: [{box: {x: [[lo, hi], ...], y: [...]}, value}]}
nlohmann::json atom_to_json(const Atom& atom);
Atom atom_from_json(const nlohmann::json& j);

}  // namespace flagint
