#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace levymfg {

// Catalog of conjugate cost/Hamiltonian pairs. Config files select them by
// letter (a-f) or by the descriptive name below.
enum class PairKind {
  Linear,               // (a) L = chi_{kappa},      F(z) = kappa z
  PositivePartLinear,   // (b) L = chi_[0,kappa],    F(z) = kappa z+   (F not C^1)
  SmoothedPositivePart, // (c) quadratic smoothing of (b) with width epsilon
  Power,                // (d) L = zeta^q / q,       F(z) = (q-1)/q (z+)^(q/(q-1))
  Exponential,          // (e) L = zeta log zeta - zeta,  F(z) = e^z
  Shifted,              // (f) L0(zeta - kappa) on [kappa, inf),  F = F0 + kappa z
  Numeric,              // tabulated cost, conjugate by brute-force sup
};

struct PairParams {
  double kappa = 1.0;
  double epsilon = 0.1;
  double q = 2.0;
};

/**
 * A cost function L: [0, inf) -> R u {+inf} together with its
 * Legendre-Fenchel transform F(z) = sup_{zeta >= 0} (zeta z - L(zeta)) and
 * the derivative F'. F is convex and F' is nonnegative and nondecreasing for
 * every pair constructed here, so sup of F' over [lo, hi] is F'(hi).
 *
 * gamma is the Hölder exponent of F' (min(1, 1/(q-1)) for the power pair,
 * 1 otherwise). differentiable is false only for PositivePartLinear, whose
 * F has a kink at 0; solvers refuse that pair and point at the smoothed one.
 * a1prime_global records whether inf_R F' > 0 (only the linear and shifted
 * pairs; the exponential has F' > 0 pointwise but infimum 0).
 */
struct ConjugatePair {
  PairKind kind = PairKind::Linear;
  std::string name;
  PairParams params;
  double gamma = 1.0;
  bool differentiable = true;
  bool a1prime_global = false;

  std::function<double(double)> L;       // +inf outside the effective domain
  std::function<double(double)> F;
  std::function<double(double)> Fprime;
};

ConjugatePair make_pair(PairKind kind, const PairParams& params = {});

// (f): adjusts the lower bound of F' by kappa while keeping the base shape.
ConjugatePair make_shifted_pair(const ConjugatePair& base, double kappa);

// Accepts "a".."f" or the long names ("linear", "positive-part",
// "smoothed-positive-part", "power", "exponential", "shifted").
PairKind parse_pair_kind(const std::string& token);
std::string pair_kind_name(PairKind kind);

/**
 * Brute-force conjugate of a sampled function: given samples (x_i, v_i),
 * returns G(y_j) = max_i (x_i y_j - v_i) on the requested y-grid. Entries
 * where the max sits on the last x sample are flagged truncated: the true
 * sup may live beyond the sampled domain there.
 *
 * The same routine computes both directions of the transform (conjugating the
 * conjugate recovers the convex envelope of the original samples).
 */
struct NumericConjugate {
  std::vector<double> grid;      // y-grid
  std::vector<double> values;    // G(y)
  std::vector<char> truncated;   // 1 where the optimizer hit the upper boundary
  std::vector<double> optimizer; // argmax x for each y
};

NumericConjugate numeric_conjugate(std::span<const double> xs, std::span<const double> vs,
                                   std::span<const double> y_grid);

// Wraps a sampled cost table into a usable pair: F from the brute-force
// conjugate on the z-range implied by the cost slopes, F' by secant slopes of
// the (convex) result, L by linear interpolation (+inf outside the table).
ConjugatePair make_numeric_pair(std::vector<double> zeta, std::vector<double> cost,
                                double z_lo, double z_hi, int z_samples = 2001);

struct AssumptionReport {
  double range_lo = 0.0, range_hi = 0.0;
  double gamma_claimed = 1.0;
  double gamma_measured = 1.0;
  double gamma_r2 = 1.0;
  bool gamma_degenerate = false;   // F' constant on the range; gamma reported as 1
  double fprime_min = 0.0;         // sampled minimum of F' over the range
  double fprime_max = 0.0;
  double fprime_seminorm = 0.0;    // [F']_gamma over the range, at the claimed gamma
  bool a1_ok = false;              // differentiable, F' >= 0 sampled
  bool a1prime_on_range = false;   // fprime_min > 0
  bool a1prime_global = false;     // from the pair; false means it fails globally
  bool convex = false;             // midpoint test over all sampled triples
};

// Samples F and F' over [lo, hi] and evaluates the regularity assumptions the
// solvers rely on. gamma is measured by log-log regression of the maximal
// increment of F' against pair distance, distances restricted to [1e-3, 1].
AssumptionReport check_assumptions(const ConjugatePair& pair, double lo, double hi,
                                   int samples = 512);

}  // namespace levymfg
