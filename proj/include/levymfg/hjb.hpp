#pragma once

#include <optional>
#include <span>
#include <vector>

#include "levymfg/grid.hpp"
#include "levymfg/hamiltonian.hpp"
#include "levymfg/levy.hpp"

namespace levymfg {

struct HjbOptions {
  double cfl_theta = 0.9;   // dt_sub * sup F' * W <= theta enforced
  double alpha = 1.0;       // Hölder class of the data, must exceed 2*sigma
  std::optional<double> working_range_override;  // R, replaces the derived bound
  int forced_substeps = 0;  // lower bound on sub-steps per macro step (0 = auto)
  int max_substeps = 1 << 20;
};

struct HjbSolution {
  SpaceTimeField u;
  int substeps = 1;          // sub-steps per macro time step actually used
  double working_range = 0;  // R: certified range of L_h u values
  double sup_fprime = 0;     // F'(R), the CFL Lipschitz constant
  double data_bound = 0;     // M = sup_t ||f(t)||_alpha + ||g||_alpha, measured
  double observed_lu_max = 0;
  int restarts = 0;          // working-range expansions that were needed
};

/**
 * Explicit monotone scheme for the backward equation
 *
 *   -du/dt = F(L u) + f,   u(T) = g,
 *
 * stepped as u^n = u^{n+1} + dt (F(L_h u^{n+1}) + f^{n+1}) with f sampled at
 * the right endpoint of each macro step (and frozen there across sub-steps).
 * The working range R bounds |L_h u| a priori; the CFL condition is enforced
 * with sup F' taken over [-R, R], which is F'(R) since F is convex. If the
 * solve ever observes |L_h u| > R it restarts with a doubled range (at most
 * three times).
 *
 * The non-differentiable positive-part pair is rejected; its quadratic
 * smoothing is the supported stand-in.
 */
HjbSolution solve_hjb(const DiscreteOperator& op, const ConjugatePair& pair,
                      const SpaceTimeField& f, std::span<const double> g,
                      const HjbOptions& opts = {});

struct StabilityReport {
  std::vector<double> gap;    // ||u1(t) - u2(t)||_inf at macro nodes
  std::vector<double> bound;  // (T - t) ||f1 - f2||_inf + ||g1 - g2||_inf
  double df_inf = 0;
  double dg_inf = 0;
  double worst_excess = 0;    // max_t (gap - bound); <= slack when ok
  double slack = 0;           // rounding allowance
  int substeps = 1;           // shared by both solves
  bool ok = false;
};

// Solves both problems on a shared working range and sub-step schedule, then
// compares the sup gap per time node against the stability bound. The bound
// holds exactly for the discrete scheme; slack covers accumulated rounding.
StabilityReport stability_gap(const DiscreteOperator& op, const ConjugatePair& pair,
                              const SpaceTimeField& f1, std::span<const double> g1,
                              const SpaceTimeField& f2, std::span<const double> g2,
                              HjbOptions opts = {});

struct HolderPropagationReport {
  double alpha = 0;
  double data_bound = 0;  // M
  std::vector<double> sup_u, semi_u, u_bound;  // bound: M (T - t + 1)
  std::vector<double> lu_norm, lu_bound;       // 4 (K/(alpha-2s) + nu(B1^c)) M (T-t+1)
  double tolerance = 0;   // discretization allowance on the L_h u side
  bool u_ok = false;
  bool lu_ok = false;
};

// Measures sup, Hölder seminorm, and the alpha-2*sigma norm of L_h u per time
// node and compares with the propagated data bounds.
HolderPropagationReport holder_propagation_report(const DiscreteOperator& op,
                                                  const HjbSolution& sol, double alpha,
                                                  double data_bound);

struct DriftExtract {
  SpaceTimeField b;   // F'(L_h u), nonnegative
  SpaceTimeField lu;  // L_h u for diagnostics
  double sup_b = 0;
};

DriftExtract extract_drift(const DiscreteOperator& op, const ConjugatePair& pair,
                           const SpaceTimeField& u);

}  // namespace levymfg
