#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace levymfg {

// Exact rational input for threshold arithmetic. Parsed from "3/10" or "0.3"
// (decimals are exact by construction). Comparisons against the polynomial
// threshold conditions are then performed in exact arithmetic.
struct Fraction {
  long long num = 0;
  long long den = 1;

  static Fraction parse(const std::string& text);
  static Fraction from_double(double x);  // exact binary expansion
  double value() const;
};

// Strict inequalities with a guard band: values within 1e-12 of the boundary
// (or exactly on it, in rational mode) are reported as Boundary, never as a
// pass or fail.
enum class Verdict { Pass, Fail, Boundary };

std::string verdict_name(Verdict v);

/**
 * Exponent bootstrap
 *
 *   omega_0 = 2,  omega_{n+1} = 2 omega_n / ((beta + omega_n)(1 - 2s) + 2s),
 *   C_0 given,    C_{n+1} = max{1, 32 C T C_n^(1/omega_n)},
 *
 * with fixed point omega_inf = (2 - 2s)/(1 - 2s) - beta and the dual Hölder
 * exponent beta_0 = 2 - omega_inf = beta - 2s/(1 - 2s). The contraction is
 * geometric, so a few dozen iterations reach 1e-10. The proven regime needs
 * 2s in (0, 1/2) and beta > 2s/(1 - 2s); outside it the sequences are still
 * computed but flagged, and omega_n may leave (1, 2].
 */
struct BootstrapResult {
  double two_sigma = 0;
  double beta = 0;
  std::vector<double> omega;      // omega_0 .. omega_n
  std::vector<double> constants;  // C_0 .. C_n
  double omega_limit = 0;         // closed form
  double beta0 = 0;               // closed form
  double final_gap = 0;           // |omega_back - omega_limit|
  double sum_bound = 0;           // 1 + (1-2s)/(1 - beta(1-2s)), when in regime
  bool in_regime = false;
  bool monotone = false;          // omega non-increasing up to roundoff
  bool constants_cauchy = false;  // log increments contract at rate 1/omega, capped
};

BootstrapResult bootstrap_recursion(double two_sigma, double beta, double C = 1.0,
                                    double T = 1.0, int n_max = 200, double c0 = 1.0);

/**
 * Uniqueness thresholds. The coupling-regularity condition for the MFG system
 * reads
 *
 *   (2s/(alpha - 2s)) (1 + 1/(1 - 2s)) < gamma     (general measures)
 *   (2s/(alpha - 2s)) (1 + 1/(1 - s))  < gamma     (symmetric-at-origin)
 *
 * and the dual-equation uniqueness window for the FP drift exponent is
 *
 *   beta in (2s + 2s/(1 - 2s), 1]                  (general)
 *   beta in (2s + 2s/(1 - s),  1]                  (symmetric),
 *
 * nonempty exactly when 2s < (3 - sqrt 5)/2, resp. (5 - sqrt 17)/2.
 */
struct ThresholdReport {
  double two_sigma = 0, alpha = 0, gamma = 0;
  bool symmetric = false;

  double mfg_lhs = 0;          // left side of the gamma condition
  double mfg_margin = 0;       // gamma - mfg_lhs (positive = unique)
  Verdict mfg_unique = Verdict::Fail;

  double fp_beta_lower = 0;    // lower end of the admissible beta interval
  double fp_interval_margin = 0;  // 1 - fp_beta_lower
  Verdict fp_interval_nonempty = Verdict::Fail;

  bool exact = false;          // computed in rational arithmetic
};

ThresholdReport uniqueness_thresholds(double two_sigma, double alpha, double gamma,
                                      bool symmetric);
ThresholdReport uniqueness_thresholds(const Fraction& two_sigma, const Fraction& alpha,
                                      const Fraction& gamma, bool symmetric);

// Verdict for a specific drift exponent beta against the FP window.
Verdict fp_beta_verdict(double two_sigma, double beta, bool symmetric);

// Critical cost exponent q_c(s) = (1 + s)/(2 s (2 - s)) for s in (0, 1/2].
// q_c(1/2) evaluates to exactly 1.
double critical_q(double sigma);

/**
 * The three affine-in-a exponent functions of the covering argument,
 *
 *   e1(a) = (2 - 2s) a - 1
 *   e2(a) = (1 - 2s) a + 1/omega_n - 1
 *   e3(a) = -2s a + beta/omega_n,
 *
 * and the max-min-optimal scale exponent
 *
 *   a* = max{ (beta + omega_n - 1)/omega_n, (beta + omega_n)/(2 omega_n) },
 *
 * the first branch being active when beta + omega_n > 2. Also evaluates the
 * side constraint pair beta/(4s) >= a >= 1/(2(1 - 2s)), which admits some a
 * exactly when beta >= 2s/(1 - 2s).
 */
struct ScalingReport {
  double two_sigma = 0, beta = 0, omega_n = 0;
  double e1_slope = 0, e1_icept = 0;
  double e2_slope = 0, e2_icept = 0;
  double e3_slope = 0, e3_icept = 0;
  double a_star = 0;             // closed form
  double a_star_scan = 0;        // brute-force max-min over an a-grid
  double min_exponent_at_star = 0;
  bool first_branch = false;     // beta + omega_n > 2
  double constraint_lo = 0;      // 1/(2(1-2s))
  double constraint_hi = 0;      // beta/(4s)
  bool constraint_nonempty = false;
};

ScalingReport optimal_scaling_exponents(double two_sigma, double beta, double omega_n);

}  // namespace levymfg
