#include "flagint/atoms.hpp"

#include <cmath>
#include <random>

#include "flagint/errors.hpp"
#include "flagint/rational.hpp"

namespace flagint {

const char* to_string(AtomNormalization norm) {
  return norm == AtomNormalization::Strict ? "strict" : "lenient";
}

AtomNormalization parse_atom_normalization(const std::string& text) {
  if (text == "strict") return AtomNormalization::Strict;
  if (text == "lenient") return AtomNormalization::Lenient;
  throw ConfigError("unknown atom normalization '" + text + "'");
}

namespace {

void check_dims(int n, int m) {
  if (n < 1 || m < 1) throw ConfigError("atoms need n >= 1 and m >= 1");
}

// Cells of the sign split along x_1 of the cube [-h, h]^{n+m}.
std::vector<FunctionCell> signum_cells(int n, int m, double h, double value) {
  Box neg{std::vector<Interval>(n, {-h, h}), std::vector<Interval>(m, {-h, h})};
  Box pos = neg;
  neg.x[0].hi = 0.0;
  pos.x[0].lo = 0.0;
  return {FunctionCell{neg, -value, false}, FunctionCell{pos, value, false}};
}

}  // namespace

Atom make_signum_atom(int n, int m) {
  check_dims(n, m);
  const Cube q{n, m, 1};
  return {q, 1, TestFunction(TestFunctionKind::Atom, n, m, signum_cells(n, m, 1.0, 1.0)),
          AtomNormalization::Lenient};
}

Atom make_signum_atom_on(const Cube& cube) {
  check_dims(cube.n, cube.m);
  const double h = cube.half().half_side();
  return {cube, cube.L,
          TestFunction(TestFunctionKind::Atom, cube.n, cube.m, signum_cells(cube.n, cube.m, h, 1.0 / cube.volume())),
          AtomNormalization::Strict};
}

Atom make_random_atom(const Cube& cube, std::uint64_t seed) {
  check_dims(cube.n, cube.m);
  const int d = cube.n + cube.m;
  const std::size_t count = std::size_t{1} << d;
  constexpr std::int64_t kGrid = std::int64_t{1} << 19;

  std::mt19937_64 gen(seed);
  std::vector<std::int64_t> k(count);
  std::int64_t sum = 0;
  for (auto& v : k) {
    v = static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(2 * kGrid + 1)) - kGrid;
    sum += v;
  }
  // k_i - sum / 2^d is a dyadic rational with |.| <= 2^20, so every step
  // below is exact in double precision.
  const double mean = static_cast<double>(sum) / static_cast<double>(count);
  const double scale = 1.0 / (static_cast<double>(2 * kGrid) * cube.volume());

  const double h = cube.half().half_side();
  std::vector<FunctionCell> cells;
  for (std::size_t c = 0; c < count; ++c) {
    Box b;
    for (int a = 0; a < d; ++a) {
      const Interval iv = (c >> a & 1) ? Interval{0.0, h} : Interval{-h, 0.0};
      (a < cube.n ? b.x : b.y).push_back(iv);
    }
    cells.push_back({std::move(b), (static_cast<double>(k[c]) - mean) * scale, false});
  }
  return {cube, cube.L, TestFunction(TestFunctionKind::Atom, cube.n, cube.m, std::move(cells)),
          AtomNormalization::Strict};
}

TestFunction non_cancelling_bump(const Atom& atom) {
  auto cells = atom.payload.cells();
  for (auto& c : cells) c.value = std::abs(c.value);
  return {TestFunctionKind::IndicatorBox, atom.payload.n(), atom.payload.m(), std::move(cells)};
}

AtomReport validate_atom(const Atom& atom, const QuadratureSpec& spec,
                         std::optional<AtomNormalization> normalization) {
  spec.validate();
  const TestFunction& f = atom.payload;
  if (!f.piecewise_constant()) throw PreconditionError("atom validation needs a piecewise-constant payload");
  if (f.n() != atom.cube.n || f.m() != atom.cube.m) throw ConfigError("atom payload and cube dimensions differ");

  const AtomNormalization norm = normalization.value_or(atom.normalization);
  const bool strict = norm == AtomNormalization::Strict;
  const double h = strict ? atom.cube.half().half_side() : atom.cube.half_side();
  const double vol = atom.cube.volume();

  AtomReport r;
  r.sup = f.sup_norm();
  r.bound = (strict ? 1.0 : std::ldexp(1.0, atom.cube.n + atom.cube.m)) / vol;
  r.bound_ok = r.sup <= r.bound * (1 + 1e-12);

  r.support_ok = true;
  Rational mean = 0;
  for (const auto& c : f.cells()) {
    if (c.value == 0.0) continue;
    for (const auto& iv : c.box.x) r.support_ok = r.support_ok && iv.lo >= -h && iv.hi <= h;
    for (const auto& iv : c.box.y) r.support_ok = r.support_ok && iv.lo >= -h && iv.hi <= h;
    Rational term = Rational(c.value);
    for (const auto& iv : c.box.x) term *= Rational(iv.hi) - Rational(iv.lo);
    for (const auto& iv : c.box.y) term *= Rational(iv.hi) - Rational(iv.lo);
    mean += term;
  }
  r.mean = to_double(mean);
  r.mean_ok = std::abs(r.mean) <= 1e-10 * vol * r.sup;
  return r;
}

nlohmann::json atom_to_json(const Atom& atom) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : atom.payload.cells()) {
    nlohmann::json x = nlohmann::json::array();
    nlohmann::json y = nlohmann::json::array();
    for (const auto& iv : c.box.x) x.push_back({iv.lo, iv.hi});
    for (const auto& iv : c.box.y) y.push_back({iv.lo, iv.hi});
    cells.push_back({{"box", {{"x", x}, {"y", y}}}, {"value", c.value}});
  }
  return {{"n", atom.cube.n},
          {"m", atom.cube.m},
          {"L", atom.L},
          {"normalization", to_string(atom.normalization)},
          {"cells", cells}};
}

Atom atom_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    const int m = j.at("m").get<int>();
    const int L = j.at("L").get<int>();
    check_dims(n, m);
    std::vector<FunctionCell> cells;
    for (const auto& c : j.at("cells")) {
      Box b;
      for (const auto& iv : c.at("box").at("x")) b.x.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
      for (const auto& iv : c.at("box").at("y")) b.y.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
      cells.push_back({std::move(b), c.at("value").get<double>(), false});
    }
    const auto norm = j.contains("normalization") ? parse_atom_normalization(j.at("normalization").get<std::string>())
                                                  : AtomNormalization::Strict;
    return {Cube{n, m, L}, L, TestFunction(TestFunctionKind::Atom, n, m, std::move(cells)), norm};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed atom JSON: ") + e.what());
  }
}

}  // namespace flagint
