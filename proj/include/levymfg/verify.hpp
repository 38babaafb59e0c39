#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace levymfg {

/**
 * One verification criterion: a self-contained numerical experiment with a
 * hard pass/fail verdict. The detail string is deterministic for a fixed
 * configuration (no timings, no addresses) so that repeated runs byte-match.
 */
struct CriterionResult {
  int index = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;  // filled by run_criteria, never part of detail
};

struct VerifyOptions {
  bool quick = false;     // reduced grids and path counts for smoke runs
  std::uint64_t seed = 1;
};

// 1. Closed-form threshold crossings, critical exponents, rational-mode
//    agreement.
CriterionResult criterion_threshold_arithmetic();
// 2. Bootstrap recursion converges with monotone exponents across the regime.
CriterionResult criterion_bootstrap_recursion();
// 3. Spectral accuracy of the discretized operator and exactness on atoms.
CriterionResult criterion_operator_convergence(const VerifyOptions& opts);
// 4. Sup-norm and seminorm bounds for the split operator on smooth fields.
CriterionResult criterion_operator_bounds(const VerifyOptions& opts);
// 5. Backward solver: comparison, stability, constant shifts, propagation.
CriterionResult criterion_hjb_contract(const VerifyOptions& opts);
// 6. Forward solver: mass/positivity and a dense matrix-exponential oracle.
CriterionResult criterion_fp_contract(const VerifyOptions& opts);
// 7. Duality pairing: exact-transpose residual at rounding level and O(dt)
//    decay for the independently discretized dual.
CriterionResult criterion_holmgren_duality(const VerifyOptions& opts);
// 8. Regularity gain of the dual flow over rough terminal data.
CriterionResult criterion_dual_regularity(const VerifyOptions& opts);
// 9. Coupled fixed point: convergence, residuals, initial-guess agreement.
CriterionResult criterion_mfg_example(const VerifyOptions& opts);
// 10. Particle histograms against the forward solver and the dynamic
//     programming upper bound for sampled policies.
CriterionResult criterion_monte_carlo(const VerifyOptions& opts);

// Runs all ten criteria in order and records wall-clock seconds per entry.
std::vector<CriterionResult> run_criteria(const VerifyOptions& opts);

// JSON summary of a run. Timings are attached only when requested so that
// stable output stays byte-reproducible.
nlohmann::ordered_json criteria_json(const std::vector<CriterionResult>& results,
                                     bool include_timings);

}  // namespace levymfg
