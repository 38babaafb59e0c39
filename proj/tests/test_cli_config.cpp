#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "levymfg/config.hpp"
#include "levymfg/errors.hpp"
#include "levymfg/levy.hpp"

using namespace levymfg;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  CliResult res;
  const std::string cmd = std::string(LEVYMFG_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[512];
  while (fgets(buf, sizeof(buf), pipe) != nullptr) res.output += buf;
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return text;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
}

}  // namespace

TEST_CASE("flat config text parses values and comments") {
  ExperimentConfig cfg = parse_config_text(
      "# experiment\n"
      "grid.n = 64\n"
      "grid.T = 0.25   # quarter horizon\n"
      "levy.two_sigma = 1/2\n"
      "solver.tol = 1e-9\n"
      "hamiltonian.tag = e\n");
  CHECK(cfg.grid_n == 64);
  CHECK(cfg.grid_T == 0.25);
  CHECK(cfg.levy_two_sigma == 0.5);
  CHECK(cfg.levy_two_sigma_raw == "1/2");
  CHECK(cfg.solver_tol == 1e-9);
  CHECK(cfg.ham_tag == "e");
  // Untouched keys keep their defaults.
  CHECK(cfg.grid_nt == 128);
}

TEST_CASE("config parsing reports the offending line") {
  try {
    parse_config_text("grid.n = 64\nnot a key value line\n");
    FAIL("expected a parse error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("grid.unknown = 3\n"), ValidationError);
  CHECK_THROWS_AS(parse_config_text("grid.n = banana\n"), ValidationError);
}

TEST_CASE("json config accepts nested and flat forms") {
  ExperimentConfig nested = parse_config_text(
      R"({"grid": {"n": 64, "T": 0.25}, "levy": {"two_sigma": "1/2"}})");
  CHECK(nested.grid_n == 64);
  CHECK(nested.levy_two_sigma == 0.5);

  ExperimentConfig flat = parse_config_text(
      R"({"grid.n": 64, "grid.T": 0.25, "levy.two_sigma": "1/2"})");
  CHECK(flat.hash() == nested.hash());

  CHECK_THROWS_AS(parse_config_text("{\"grid\": "), ValidationError);
}

TEST_CASE("hash is canonical across formats and sensitive to values") {
  ExperimentConfig a = parse_config_text("grid.n = 64\nsolver.tol = 0.001\n");
  ExperimentConfig b = parse_config_text(R"({"solver": {"tol": 1e-3}, "grid": {"n": 64}})");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  ExperimentConfig c = parse_config_text("grid.n = 128\nsolver.tol = 0.001\n");
  CHECK(a.hash() != c.hash());
}

TEST_CASE("validation names the grid constraint") {
  ExperimentConfig cfg;
  cfg.grid_n = 48;
  try {
    cfg.validate();
    FAIL("expected validation to reject n = 48");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("power of two") != std::string::npos);
  }
}

TEST_CASE("atom lists round trip through the canonical form") {
  ExperimentConfig cfg;
  cfg.apply("levy.atoms", "0.25:0.3, -0.5:0.7");
  REQUIRE(cfg.levy_atoms.size() == 2);
  CHECK(cfg.levy_atoms[0].location == 0.25);
  CHECK(cfg.levy_atoms[1].mass == 0.7);

  std::string line;
  for (const std::string& l : cfg.canonical_lines()) {
    if (l.rfind("levy.atoms = ", 0) == 0) line = l.substr(std::string("levy.atoms = ").size());
  }
  REQUIRE(!line.empty());
  ExperimentConfig rt;
  rt.apply("levy.atoms", line);
  REQUIRE(rt.levy_atoms.size() == 2);
  CHECK(rt.levy_atoms[0].location == cfg.levy_atoms[0].location);
  CHECK(rt.levy_atoms[0].mass == cfg.levy_atoms[0].mass);
  CHECK(rt.levy_atoms[1].location == cfg.levy_atoms[1].location);
  CHECK(rt.levy_atoms[1].mass == cfg.levy_atoms[1].mass);

  CHECK_THROWS_AS(cfg.apply("levy.atoms", "0.25"), ValidationError);
  CHECK_THROWS_AS(cfg.apply("levy.atoms", ""), ValidationError);
}

TEST_CASE("levy spec builder covers every kind") {
  ExperimentConfig cfg;
  CHECK(build_levy_spec(cfg).kind() == LevyKind::Stable);
  cfg.levy_kind = "tempered";
  CHECK(build_levy_spec(cfg).kind() == LevyKind::TemperedStable);
  cfg.levy_kind = "bounded";
  CHECK(build_levy_spec(cfg).kind() == LevyKind::BoundedUniform);
  cfg.levy_kind = "atomic";
  CHECK(build_levy_spec(cfg).kind() == LevyKind::Atomic);
  cfg.levy_kind = "weird";
  CHECK_THROWS_AS(build_levy_spec(cfg), ValidationError);
}

TEST_CASE("cli diagnose writes a report with the config hash") {
  const std::string cfg_path = std::string(LEVYMFG_CONFIG_DIR) + "/quick.cfg";
  CliResult res = run_cli("diagnose --config " + cfg_path + " --out cli-unit-diag");
  CHECK(res.exit_code == 0);
  const std::string json = slurp("cli-unit-diag/diagnose.json");
  CHECK(json.find("config_hash") != std::string::npos);
  CHECK(json.find("thresholds") != std::string::npos);
  CHECK(json.find("bootstrap") != std::string::npos);
}

TEST_CASE("cli hjb solve writes stamped artifacts") {
  write_file("cli-unit.cfg",
             "grid.n = 32\n"
             "grid.n_t = 8\n"
             "grid.T = 0.25\n"
             "levy.two_sigma = 1/2\n"
             "problem.f_amplitude = 0.3\n"
             "problem.g_amplitude = 0.2\n"
             "output.dir = cli-unit-hjb\n");
  CliResult res = run_cli("solve-hjb --config cli-unit.cfg");
  CHECK(res.exit_code == 0);
  const std::string csv = slurp("cli-unit-hjb/u.csv");
  CHECK(csv.find("# config_hash:") != std::string::npos);
  const std::string json = slurp("cli-unit-hjb/hjb.json");
  CHECK(json.find("substeps") != std::string::npos);
}

TEST_CASE("cli rejects malformed configs with the input error code") {
  write_file("cli-unit-bad.cfg", "grid.n = 48\n");
  CliResult res = run_cli("solve-hjb --config cli-unit-bad.cfg");
  CHECK(res.exit_code == 2);
  CliResult missing = run_cli("solve-hjb --config no-such-file.cfg");
  CHECK(missing.exit_code == 2);
}
