#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "levymfg/fp.hpp"
#include "levymfg/grid.hpp"
#include "levymfg/hamiltonian.hpp"
#include "levymfg/hjb.hpp"
#include "levymfg/levy.hpp"
#include "levymfg/regularity.hpp"

namespace levymfg {

/**
 * Monotone smoothing coupling
 *
 *   f(m)(x)  = A_f (K * m)(x) + c_f,     K = h (rho * rho),
 *   g(m_T)(x) = A_g (K * m_T)(x) + c_g,
 *
 * with rho an even probability mollifier on the grid. For any two measures,
 * <f(m1) - f(m2), m1 - m2> = A_f h ||rho * (m1 - m2)||_2^2 >= 0, so
 * monotonicity is an algebraic identity rather than a tuning goal. The
 * coupling is certified Lipschitz in space: ||f(m)||_1 <= A_f (||K||_inf +
 * [K]_1) + |c_f| uniformly over probability measures.
 */
struct Coupling {
  Grid grid;
  std::vector<double> rho;     // even, nonnegative, h * sum == 1
  std::vector<double> kernel;  // K, even
  double amplitude_f = 1.0, offset_f = 0.0;
  double amplitude_g = 1.0, offset_g = 0.0;
  double alpha = 1.0;          // certified data exponent
  double bound_f = 0.0;        // sup_m ||f(m)||_1 certificate
  double bound_g = 0.0;
  double data_bound = 0.0;     // bound_f + bound_g, the M for the HJB theory
  double min_kernel_dft = 0.0;

  std::vector<double> convolve(std::span<const double> mass) const;
  std::vector<double> apply_f(std::span<const double> mass) const;
  std::vector<double> apply_g(std::span<const double> mass) const;
};

// Gaussian-shaped mollifier of the given width (standard deviation in torus
// units). Rejects kernels whose Fourier coefficients dip negative.
Coupling make_coupling(const Grid& grid, double width, double amplitude_f,
                       double offset_f, double amplitude_g, double offset_g);

// <f(m1) - f(m2), m1 - m2>, which the construction keeps nonnegative.
double coupling_pairing(const Coupling& c, const DiscreteMeasure& m1,
                        const DiscreteMeasure& m2);

enum class MfgAveraging { Damped, FictitiousPlay };

struct MfgOptions {
  double damping = 0.5;     // tau for the damped update
  double tol = 1e-7;        // sup-t TV increment stopping threshold
  int max_iters = 200;
  MfgAveraging averaging = MfgAveraging::Damped;
  HjbOptions hjb;
};

struct MfgSolution {
  SpaceTimeField u;
  SpaceTimeField m;          // mass vectors per macro node
  SpaceTimeField b;          // drift F'(L_h u)
  std::vector<double> increments;  // per-iteration sup-t TV change
  int iterations = 0;
  bool converged = false;
  double residual_hjb = 0;   // re-solve gap against the final coupling data
  double residual_fp = 0;    // structural, re-run gap
  double sup_b = 0;
  HjbSolution hjb_info;      // from the final consistency pass
  ThresholdReport thresholds;  // uniqueness verdict metadata for the run
};

/**
 * Damped Picard iteration on the distribution trajectory: from the current
 * guess build the coupling data, solve the backward equation, extract the
 * drift, push the initial measure forward, and average. After the loop a
 * final consistency pass recomputes (u, b, m) from the converged trajectory,
 * so the stored m is an exact fixed output of the stored b, and the reported
 * residuals measure only the remaining coupling gap.
 */
MfgSolution solve_mfg(const DiscreteOperator& op, const ConjugatePair& pair,
                      const Coupling& coupling, const DiscreteMeasure& m0,
                      const MfgOptions& opts = {});

enum class InitialGuess { Frozen, Uniform, PointMass, RandomMixture };

struct UniquenessExperiment {
  int runs = 0;
  bool all_converged = false;
  double max_pairwise_tv = 0;   // sup over t, max over run pairs
  double max_pairwise_u = 0;    // sup-norm gap of value functions
  Verdict regime = Verdict::Fail;
  bool agreement = false;       // distances < 10 * tol (only claimed in regime)
  std::vector<std::string> labels;
};

// Runs solve_mfg from several initial trajectory guesses and compares the
// converged solutions pairwise. Informational outside the uniqueness regime
// or when any run fails to converge.
UniquenessExperiment uniqueness_experiment(const DiscreteOperator& op,
                                           const ConjugatePair& pair,
                                           const Coupling& coupling,
                                           const DiscreteMeasure& m0,
                                           const MfgOptions& opts, std::uint64_t seed);

struct SConditionsReport {
  double s1_residual = 0;       // solvability: consistency residual of u
  bool s1_ok = false;
  std::vector<double> s2_gaps;  // ||L u_eps - L u||_inf for shrinking eps
  bool s2_ok = false;           // monotone decrease
  double s3_sup_b = 0;          // measured sup F'(L u)
  double s3_bound = 0;          // F' at the certified working range
  bool s3_ok = false;
  double s4_dt_bound = 0;       // max |u^{k+1} - u^k| / dt
  bool s4_ok = false;
  bool s5_contracting = false;  // delegated FP uniqueness probe
  Verdict s5_regime = Verdict::Fail;
};

SConditionsReport check_S_conditions(const DiscreteOperator& op,
                                     const ConjugatePair& pair,
                                     const Coupling& coupling,
                                     const DiscreteMeasure& m0,
                                     const MfgSolution& sol);

}  // namespace levymfg
