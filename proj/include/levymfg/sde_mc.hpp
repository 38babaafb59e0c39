#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "levymfg/fp.hpp"
#include "levymfg/grid.hpp"
#include "levymfg/hamiltonian.hpp"
#include "levymfg/levy.hpp"
#include "levymfg/numerics.hpp"

namespace levymfg {

/**
 * How a path realizes the controlled time change of rate zeta >= 0 over a
 * step of length dt:
 *
 *  - DurationScaling: draw one increment of the driving process over the
 *    rescaled duration zeta * dt. Exact for self-similar (stable) specs and
 *    for compound-Poisson specs alike.
 *  - Thinning: draw candidate jumps at the capped rate B >= sup zeta and keep
 *    each with probability zeta / B. Compound-Poisson specs only.
 *
 * Both produce the same law; on atomic specs this is cross-checked in tests.
 */
enum class TimeChangeMode { DurationScaling, Thinning };

/**
 * Increment sampler for the driving process X with generator matching a
 * LevyMeasureSpec.
 *
 * Stable specs use the Chambers-Mallows-Stuck construction for symmetric
 * 2*sigma-stable laws; self-similarity turns a duration-d increment into
 * d^(1/(2 sigma)) times a unit draw. Atomic and bounded specs are sampled as
 * compound Poisson processes with the exact jump law. Tempered specs are
 * compound Poisson on a discretized jump table (log-spaced bins away from a
 * small-jump cutoff), so their sampling is approximate by construction.
 */
struct JumpSampler {
  LevyMeasureSpec spec;
  bool compound_poisson = false;
  bool discretized = false;      // true for the tempered jump table
  double intensity = 0.0;        // total jump rate; compound-Poisson kinds only
  double small_jump_cutoff = 0.0;
  std::vector<double> jump_values;
  std::vector<double> jump_cum;  // cumulative masses; back() == intensity

  static JumpSampler make(const LevyMeasureSpec& spec);

  // One jump drawn from the (possibly discretized) jump law.
  double sample_jump(SplitMix64& rng) const;

  // Total displacement of X over the given duration >= 0.
  double increment(double duration, SplitMix64& rng) const;
};

struct SdeSimulation {
  Grid grid;
  std::vector<int> time_indices;            // macro time indices recorded
  std::vector<DiscreteMeasure> histograms;  // one per recorded index
  std::vector<std::vector<long long>> counts;
  int n_paths = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  TimeChangeMode mode = TimeChangeMode::DurationScaling;
};

/**
 * Euler simulation of dZ = (time change of rate b(t, Z)) applied to X,
 * Z(0) ~ m0, wrapped to the torus. The rate is frozen at the left endpoint of
 * every macro step, matching the forward scheme in solve_fp. Histograms bin
 * paths into the grid cells [x_i - h/2, x_i + h/2).
 *
 * Empty time_indices defaults to {0, time_steps}. Paths use per-path RNG
 * streams derived from (seed, path index) and integer bin counts, so results
 * are bitwise independent of the worker count. LEVY_MFG_THREADS caps workers.
 */
SdeSimulation simulate_sde(const Grid& grid, const JumpSampler& sampler,
                           const DriftField& b, const DiscreteMeasure& m0,
                           int n_paths, std::uint64_t seed,
                           std::vector<int> time_indices = {},
                           TimeChangeMode mode = TimeChangeMode::DurationScaling);

struct GainEstimate {
  std::vector<double> mean;       // estimated gain per start node, t = 0
  std::vector<double> std_error;  // standard error of each mean
  int n_paths = 0;
  std::uint64_t seed = 0;
  TimeChangeMode mode = TimeChangeMode::DurationScaling;
};

/**
 * Monte Carlo estimate of the expected total gain of the feedback policy
 * zeta(t, x) >= 0 from every grid node at time 0:
 *
 *   J(0, x) = E[ sum_k dt * (-L(zeta(t_k, Z_k)) + f(t_k, Z_k)) + g(Z_T) ].
 *
 * The running term uses the left endpoint of each step. Policy and running
 * gain are evaluated by periodic linear interpolation along the path.
 *
 * Throws ValidationError if L(zeta) is infinite at a grid node and
 * NumericalError if an interpolated policy value lands outside the domain of
 * L along a path.
 */
GainEstimate estimate_gain(const Grid& grid, const JumpSampler& sampler,
                           const SpaceTimeField& zeta, const SpaceTimeField& f,
                           std::span<const double> g, const ConjugatePair& pair,
                           int n_paths, std::uint64_t seed,
                           TimeChangeMode mode = TimeChangeMode::DurationScaling);

struct SelfSimilarReport {
  std::vector<double> sup_zeta;    // sup over zeta of (zeta * Lu - L(zeta))
  std::vector<double> sup_lambda;  // sup over lambda of (lambda^(2s) * Lu - L(lambda^(2s)))
  double max_gap = 0.0;            // worst pointwise disagreement
  double max_gap_vs_F = 0.0;       // worst |sup_zeta - F(Lu)|
  double tolerance = 0.0;          // control-grid resolution bound
  double zeta_max = 0.0;
  int samples = 0;
  bool ok = false;
};

/**
 * Confirms numerically that controlling the time change rate zeta and
 * controlling the increment amplitude lambda give the same Hamiltonian when
 * zeta = lambda^(2 sigma) and the amplitude cost is L(lambda^(2 sigma)):
 * both sups are computed by brute force on independent control grids (zeta
 * uniform on [0, zeta_max], lambda log-spaced plus 0) and compared pointwise,
 * along with the closed-form conjugate F where the pair provides it.
 * Requires a stable-spec operator (two_sigma > 0).
 */
SelfSimilarReport check_selfsimilar_equivalence(const DiscreteOperator& op,
                                                const ConjugatePair& pair,
                                                std::span<const double> u,
                                                double zeta_max = 4.0,
                                                int samples = 2001);

// Worker count for path-parallel loops: LEVY_MFG_THREADS if set, else the
// hardware concurrency, clamped to [1, 64].
int mc_worker_count();

}  // namespace levymfg
