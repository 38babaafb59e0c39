// Acceptance gate: one line per criterion, full problem scales, pinned
// tolerances. Criteria 1-10 run in process; criterion 11 exercises the
// installed CLI end to end and checks byte-stable reruns.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "levymfg/verify.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) return {};
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

int run_quiet(const std::string& cmd, const std::string& log) {
  const std::string full = cmd + " > " + log + " 2>&1";
  const int status = std::system(full.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

levymfg::CriterionResult cli_determinism_criterion() {
  const auto start = std::chrono::steady_clock::now();
  levymfg::CriterionResult res;
  res.index = 11;
  res.name = "cli-determinism";
  struct Timer {
    const std::chrono::steady_clock::time_point& t0;
    levymfg::CriterionResult& r;
    ~Timer() {
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  } timer{start, res};

  const std::string cli = LEVYMFG_CLI_PATH;
  const std::string cfg = std::string(LEVYMFG_CONFIG_DIR) + "/quick.cfg";
  const std::string base =
      cli + " verify-all --config " + cfg + " --stable-output --out ";

  const int code_a = run_quiet(base + "acc-c11-a", "acc-c11-a.log");
  const int code_b = run_quiet(base + "acc-c11-b", "acc-c11-b.log");
  if (code_a != 0 || code_b != 0) {
    res.passed = false;
    res.detail = "verify-all exit codes " + std::to_string(code_a) + ", " +
                 std::to_string(code_b) + " (want 0, 0)";
    return res;
  }
  const std::string a = slurp("acc-c11-a/verify.json");
  const std::string b = slurp("acc-c11-b/verify.json");
  if (a.empty() || b.empty()) {
    res.passed = false;
    res.detail = "verify.json missing from a rerun";
    return res;
  }
  res.passed = (a == b);
  res.detail = res.passed
                   ? "two stable-output runs produced byte-identical reports (" +
                         std::to_string(a.size()) + " bytes)"
                   : "stable-output reruns differ";
  return res;
}

}  // namespace

int main() {
  levymfg::VerifyOptions opts;
  opts.quick = false;
  opts.seed = 1;

  std::vector<levymfg::CriterionResult> results = levymfg::run_criteria(opts);
  results.push_back(cli_determinism_criterion());

  int failed = 0;
  for (const levymfg::CriterionResult& r : results) {
    if (!r.passed) ++failed;
    std::printf("[%s] criterion %2d %s: %s (%.2fs)\n", r.passed ? "PASS" : "FAIL",
                r.index, r.name.c_str(), r.detail.c_str(), r.seconds);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed,
              results.size());
  return failed == 0 ? 0 : 1;
}
