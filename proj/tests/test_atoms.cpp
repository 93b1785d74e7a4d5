#include <doctest.h>

#include <cmath>

#include "flagint/atoms.hpp"
#include "flagint/errors.hpp"

using namespace flagint;

TEST_CASE("signum atom on the unit cube needs the lenient normalization") {
  const Atom a = make_signum_atom(1, 1);
  QuadratureSpec spec;
  CHECK(a.normalization == AtomNormalization::Lenient);
  CHECK(validate_atom(a, spec).ok());
  const AtomReport strict = validate_atom(a, spec, AtomNormalization::Strict);
  CHECK_FALSE(strict.support_ok);
  CHECK_FALSE(strict.bound_ok);
  CHECK(strict.mean_ok);
}

TEST_CASE("strict signum atom") {
  QuadratureSpec spec;
  for (int L : {-2, 0, 3}) {
    const Atom a = make_signum_atom_on(Cube{2, 1, L});
    const AtomReport r = validate_atom(a, spec);
    CHECK(r.ok());
    CHECK(r.sup == doctest::Approx(1.0 / Cube{2, 1, L}.volume()));
    CHECK(r.mean == 0.0);
  }
}

TEST_CASE("random atoms have exactly zero mean") {
  QuadratureSpec spec;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Atom a = make_random_atom(Cube{1, 2, static_cast<int>(seed % 5) - 2}, seed);
    const AtomReport r = validate_atom(a, spec);
    CHECK(r.ok());
    CHECK(r.mean == 0.0);
    CHECK(a.payload.cells().size() == 8);
  }
  const Atom x = make_random_atom(Cube{1, 1, 0}, 5);
  const Atom y = make_random_atom(Cube{1, 1, 0}, 5);
  CHECK(atom_to_json(x) == atom_to_json(y));
}

TEST_CASE("violations are detected") {
  QuadratureSpec spec;
  const Cube q{1, 1, 0};
  auto shifted = make_signum_atom_on(q);
  shifted.payload = shifted.payload.translated({0.1}, {0.0});
  CHECK_FALSE(validate_atom(shifted, spec).support_ok);

  auto loud = make_signum_atom_on(q);
  loud.payload = loud.payload.scaled(1.5);
  CHECK_FALSE(validate_atom(loud, spec).bound_ok);

  Atom biased = make_signum_atom_on(q);
  biased.payload = non_cancelling_bump(biased);
  const AtomReport r = validate_atom(biased, spec);
  CHECK_FALSE(r.mean_ok);
  CHECK(r.mean == doctest::Approx(0.25));
}

TEST_CASE("smooth payloads are rejected") {
  Atom a = make_signum_atom_on(Cube{1, 1, 0});
  a.payload = TestFunction::smooth_bump(Box{{{-0.25, 0.25}}, {{-0.25, 0.25}}});
  CHECK_THROWS_AS(validate_atom(a, QuadratureSpec{}), PreconditionError);
}

TEST_CASE("JSON round trip") {
  const Atom a = make_random_atom(Cube{2, 1, 1}, 42);
  const Atom b = atom_from_json(atom_to_json(a));
  CHECK(b.L == 1);
  CHECK(b.cube.n == 2);
  CHECK(b.normalization == AtomNormalization::Strict);
  REQUIRE(b.payload.cells().size() == a.payload.cells().size());
  for (std::size_t i = 0; i < a.payload.cells().size(); ++i) {
    CHECK(b.payload.cells()[i].value == a.payload.cells()[i].value);
    CHECK(b.payload.cells()[i].box == a.payload.cells()[i].box);
  }
  CHECK(to_string(parse_atom_normalization(to_string(AtomNormalization::Lenient))) ==
        std::string(to_string(AtomNormalization::Lenient)));
}

TEST_CASE("malformed atom JSON") {
  CHECK_THROWS_AS(atom_from_json(nlohmann::json::parse(R"({"n": 1})")), ConfigError);
  CHECK_THROWS_AS(atom_from_json(nlohmann::json::parse(R"({"n": 1, "m": 1, "L": 0, "cells": [{"box": {"x": [[0]]}}]})")),
                  ConfigError);
  CHECK_THROWS_AS(atom_from_json(nlohmann::json::parse(R"({"n": 0, "m": 1, "L": 0, "cells": []})")), ConfigError);
  CHECK_THROWS_AS(
      atom_from_json(nlohmann::json::parse(R"({"n": 1, "m": 1, "L": 0, "normalization": "loose", "cells": []})")),
      ConfigError);
}
