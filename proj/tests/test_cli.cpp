#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flagint/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::initializer_list<std::string> args) {
  std::vector<std::string> storage{"flagint"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = flagint::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("flagint_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("check reports formula two") {
  const fs::path dir = fresh_dir("check");
  const Run r = run({"check", "--n", "1", "--m", "1", "--rho", "2", "--alpha", "9/10", "--beta", "3/10", "--q", "2",
                     "--seed", "5", "--output", dir.string()});
  CHECK(r.code == flagint::kExitPass);
  CHECK(r.out.find("formula-two: SATISFIED") != std::string::npos);
  CHECK(fs::exists(dir / "check-5.csv"));
  const auto meta = read_json(dir / "check-5.json");
  CHECK(meta["metadata"]["run_config"]["alpha"] == "9/10");
  CHECK(meta["metadata"].contains("wall_time_s"));
  CHECK(slurp(dir / "check-5.csv").find("wall") == std::string::npos);
}

TEST_CASE("decimal inputs are accepted as exact rationals") {
  const fs::path dir = fresh_dir("decimal");
  const Run r = run({"check", "--alpha", "0.9", "--beta", "0.3", "--rho", "2", "--q", "2", "--output", dir.string()});
  CHECK(r.code == flagint::kExitPass);
  CHECK(r.out.find("formula-two: SATISFIED") != std::string::npos);
}

TEST_CASE("usage errors exit 1 with a field-level message") {
  const fs::path dir = fresh_dir("usage");
  const Run beta = run({"check", "--alpha", "1/2", "--beta", "1", "--q", "2", "--output", dir.string()});
  CHECK(beta.code == flagint::kExitUsage);
  CHECK(beta.err.find("beta") != std::string::npos);

  const Run missing = run({"check", "--beta", "1/2", "--output", dir.string()});
  CHECK(missing.code == flagint::kExitUsage);
  CHECK(missing.err.find("field 'alpha'") != std::string::npos);

  const Run bad = run({"check", "--alpha", "x/2", "--beta", "1/2", "--output", dir.string()});
  CHECK(bad.code == flagint::kExitUsage);
  CHECK(bad.err.find("field 'alpha'") != std::string::npos);

  const Run unknown_flag = run({"check", "--gamma", "1"});
  CHECK(unknown_flag.code == flagint::kExitUsage);

  const Run none = run({"--alpha", "1/2"});
  CHECK(none.code == flagint::kExitUsage);
}

TEST_CASE("config file: unknown keys rejected, flags override file values") {
  const fs::path dir = fresh_dir("file");
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << R"({"experiment": "check", "alpha": "1/2", "beta": "1/2", "colour": "red"})";
  const Run r = run({"--config", bad.string()});
  CHECK(r.code == flagint::kExitUsage);
  CHECK(r.err.find("colour") != std::string::npos);

  const fs::path good = dir / "good.json";
  std::ofstream(good) << R"({"experiment": "check", "alpha": "1/2", "beta": "3/10", "rho": 2, "q": "2",
                            "seed": 11, "output": ")"
                      << dir.string() << R"("})";
  const Run a = run({"--config", good.string()});
  CHECK(a.code == flagint::kExitPass);
  CHECK(a.out.find("formula-two: NOT SATISFIED") != std::string::npos);
  const Run b = run({"--config", good.string(), "--alpha", "9/10"});
  CHECK(b.code == flagint::kExitPass);
  CHECK(b.out.find("formula-two: SATISFIED") != std::string::npos);
  const auto meta = read_json(dir / "check-11.json");
  CHECK(meta["metadata"]["run_config"]["alpha"] == "9/10");
  CHECK(meta["metadata"]["run_config"]["beta"] == "3/10");
}

TEST_CASE("FLAGINT_SEED overrides the file seed but not the flag") {
  const fs::path dir = fresh_dir("seed");
  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"experiment": "check", "alpha": "9/10", "beta": "3/10", "rho": 2, "q": 2, "seed": 3,
                           "output": ")"
                     << dir.string() << R"("})";
  ::setenv("FLAGINT_SEED", "7", 1);
  CHECK(run({"--config", cfg.string()}).code == flagint::kExitPass);
  CHECK(fs::exists(dir / "check-7.csv"));
  CHECK(run({"--config", cfg.string(), "--seed", "9"}).code == flagint::kExitPass);
  CHECK(fs::exists(dir / "check-9.csv"));
  ::unsetenv("FLAGINT_SEED");
  CHECK(run({"--config", cfg.string()}).code == flagint::kExitPass);
  CHECK(fs::exists(dir / "check-3.csv"));
}

TEST_CASE("kernel and apply subcommands") {
  const fs::path dir = fresh_dir("kernel");
  const Run k = run({"kernel", "--alpha", "1/2", "--beta", "1/2", "--rho", "2", "--x", "2", "--y", "3", "--output",
                     dir.string()});
  CHECK(k.code == flagint::kExitPass);
  CHECK(k.out.find("flag 0.2672612419124244") != std::string::npos);
  const Run wrong = run({"kernel", "--alpha", "1/2", "--beta", "1/2", "--x", "2,1", "--y", "3", "--output",
                         dir.string()});
  CHECK(wrong.code == flagint::kExitUsage);
  CHECK(wrong.err.find("field 'x'") != std::string::npos);
  const Run a = run({"apply", "--alpha", "1/2", "--beta", "1/2", "--rho", "2", "--x", "10", "--y", "0", "--output",
                     dir.string()});
  CHECK(a.code == flagint::kExitPass);
  CHECK(a.out.find("apply: 0.12696") != std::string::npos);
}

TEST_CASE("atom-validate") {
  const fs::path dir = fresh_dir("atom");
  CHECK(run({"atom-validate", "--n", "1", "--m", "1", "--function", "random-atom", "--L", "1", "--output",
             dir.string()})
            .code == flagint::kExitPass);
  const Run lenient = run({"atom-validate", "--function", "signum-atom", "--normalization", "strict", "--output",
                           dir.string()});
  CHECK(lenient.code == flagint::kExitViolation);
  const Run bump = run({"atom-validate", "--function", "abs-atom", "--output", dir.string()});
  CHECK(bump.code == flagint::kExitUsage);
  CHECK(bump.err.find("field 'function'") != std::string::npos);
  const Run missing = run({"atom-validate", "--function", "atom-file", "--output", dir.string()});
  CHECK(missing.code == flagint::kExitUsage);
  CHECK(missing.err.find("atom_file") != std::string::npos);
}

TEST_CASE("counterexample example writes an increasing F column") {
  const fs::path dir = fresh_dir("counterexample");
  const Run r = run({"counterexample", "--n", "1", "--m", "1", "--rho", "2", "--q", "2", "--radii", "10,100,1000",
                     "--seed", "1", "--output", dir.string()});
  CHECK(r.code == flagint::kExitPass);
  std::istringstream csv(slurp(dir / "counterexample-1.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "R,value,err,label,case");
  double prev = 0.0;
  int rows = 0;
  while (std::getline(csv, line)) {
    const auto c1 = line.find(',');
    const double v = std::stod(line.substr(c1 + 1, line.find(',', c1 + 1) - c1 - 1));
    CHECK(v > prev);
    prev = v;
    ++rows;
  }
  CHECK(rows == 3);
}
