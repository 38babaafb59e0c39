#include "levymfg/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "levymfg/errors.hpp"
#include "levymfg/numerics.hpp"

namespace levymfg {

namespace {

void validate_problem(const DiscreteOperator& op, const ConjugatePair& pair,
                      const SpaceTimeField& f, std::span<const double> g,
                      const HjbOptions& opts) {
  const Grid& grid = op.grid;
  if (!pair.differentiable) {
    throw ValidationError(
        "hjb: pair '" + pair.name +
        "' has a non-differentiable Hamiltonian; use smoothed-positive-part "
        "with a small epsilon instead");
  }
  if (f.time_slices != grid.time_samples() || f.space_points != grid.size()) {
    throw ValidationError("hjb: source field shape does not match the grid");
  }
  if (static_cast<int>(g.size()) != grid.size()) {
    throw ValidationError("hjb: terminal slice size does not match the grid");
  }
  if (!all_finite(f.values) || !all_finite(g)) {
    throw ValidationError("hjb: data must be finite");
  }
  if (!(opts.alpha > op.two_sigma) || opts.alpha > 1.0) {
    throw ValidationError("hjb: data exponent alpha must lie in (2*sigma, 1]");
  }
  if (!(opts.cfl_theta > 0.0) || opts.cfl_theta >= 1.0) {
    throw ValidationError("hjb: CFL theta must lie in (0, 1)");
  }
}

double measure_data_bound(const DiscreteOperator& op, const SpaceTimeField& f,
                          std::span<const double> g, double alpha) {
  double sup_f = 0.0;
  for (int k = 0; k < f.time_slices; ++k) {
    sup_f = std::max(sup_f, holder_norm(f.slice(k), alpha, op.grid));
  }
  return sup_f + holder_norm(g, alpha, op.grid);
}

double derived_working_range(const DiscreteOperator& op, double alpha, double M) {
  double c = op.levy_constant / (alpha - op.two_sigma) + op.tail_mass;
  return 4.0 * c * M * (op.grid.horizon + 1.0);
}

int required_substeps(const DiscreteOperator& op, double sup_fprime,
                      const HjbOptions& opts) {
  double load = op.grid.dt * sup_fprime * op.total_weight;
  int s = static_cast<int>(std::ceil(load / opts.cfl_theta));
  s = std::max({s, 1, opts.forced_substeps});
  if (s > opts.max_substeps) {
    throw NumericalError("hjb: CFL requires more sub-steps than allowed (" +
                         std::to_string(s) + ")");
  }
  return s;
}

struct SweepResult {
  bool range_ok = true;
  double observed = 0.0;
};

SweepResult backward_sweep(const DiscreteOperator& op, const ConjugatePair& pair,
                           const SpaceTimeField& f, std::span<const double> g,
                           double range, int substeps, SpaceTimeField& u) {
  const Grid& grid = op.grid;
  const int n = grid.size();
  const int nt = grid.time_steps;
  const double sdt = grid.dt / substeps;

  SweepResult res;
  std::vector<double> cur(g.begin(), g.end());
  std::vector<double> lu(n), next(n);
  std::copy(cur.begin(), cur.end(), u.slice(nt).begin());

  for (int kstep = nt - 1; kstep >= 0; --kstep) {
    std::span<const double> fs = f.slice(kstep + 1);
    for (int sub = 0; sub < substeps; ++sub) {
      apply_operator(op, cur, lu);
      for (int i = 0; i < n; ++i) {
        double a = std::abs(lu[i]);
        if (a > res.observed) res.observed = a;
      }
      if (res.observed > range) {
        res.range_ok = false;
        return res;
      }
      for (int i = 0; i < n; ++i) {
        next[i] = cur[i] + sdt * (pair.F(lu[i]) + fs[i]);
      }
      if (!all_finite(next)) {
        throw NumericalError("hjb: non-finite values during backward sweep");
      }
      cur.swap(next);
    }
    std::copy(cur.begin(), cur.end(), u.slice(kstep).begin());
  }
  return res;
}

}  // namespace

HjbSolution solve_hjb(const DiscreteOperator& op, const ConjugatePair& pair,
                      const SpaceTimeField& f, std::span<const double> g,
                      const HjbOptions& opts) {
  validate_problem(op, pair, f, g, opts);
  const Grid& grid = op.grid;

  HjbSolution sol;
  sol.data_bound = measure_data_bound(op, f, g, opts.alpha);
  double range = opts.working_range_override
                     ? *opts.working_range_override
                     : derived_working_range(op, opts.alpha, sol.data_bound);

  const int max_restarts = 3;
  for (int attempt = 0;; ++attempt) {
    sol.sup_fprime = pair.Fprime(range);
    sol.substeps = required_substeps(op, sol.sup_fprime, opts);
    sol.u = SpaceTimeField::zeros(grid.time_samples(), grid.size(), "u");
    SweepResult res = backward_sweep(op, pair, f, g, range, sol.substeps, sol.u);
    sol.observed_lu_max = res.observed;
    if (res.range_ok) break;
    if (attempt == max_restarts) {
      throw NumericalError("hjb: |L_h u| kept escaping the working range after " +
                           std::to_string(max_restarts) + " expansions");
    }
    range = 2.0 * std::max(res.observed, std::max(range, 1e-6));
    ++sol.restarts;
  }
  sol.working_range = range;
  return sol;
}

StabilityReport stability_gap(const DiscreteOperator& op, const ConjugatePair& pair,
                              const SpaceTimeField& f1, std::span<const double> g1,
                              const SpaceTimeField& f2, std::span<const double> g2,
                              HjbOptions opts) {
  // Learn each problem's range and sub-step needs, then re-solve both on the
  // shared (max) schedule so the discrete comparison argument applies as-is.
  HjbSolution a = solve_hjb(op, pair, f1, g1, opts);
  HjbSolution b = solve_hjb(op, pair, f2, g2, opts);
  for (int pass = 0; pass < 3; ++pass) {
    opts.working_range_override = std::max(a.working_range, b.working_range);
    opts.forced_substeps = std::max(a.substeps, b.substeps);
    a = solve_hjb(op, pair, f1, g1, opts);
    b = solve_hjb(op, pair, f2, g2, opts);
    if (a.working_range == b.working_range && a.substeps == b.substeps) break;
  }

  const Grid& grid = op.grid;
  StabilityReport rep;
  rep.substeps = a.substeps;
  for (int k = 0; k < f1.time_slices; ++k) {
    rep.df_inf = std::max(rep.df_inf, sup_abs_diff(f1.slice(k), f2.slice(k)));
  }
  rep.dg_inf = sup_abs_diff(g1, g2);

  double scale = std::max({1.0, sup_norm(a.u.values), sup_norm(b.u.values)});
  rep.slack = 1e-11 * scale;
  rep.worst_excess = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid.time_samples(); ++k) {
    double gap = sup_abs_diff(a.u.slice(k), b.u.slice(k));
    double bound = (grid.horizon - grid.time(k)) * rep.df_inf + rep.dg_inf;
    rep.gap.push_back(gap);
    rep.bound.push_back(bound);
    rep.worst_excess = std::max(rep.worst_excess, gap - bound);
  }
  rep.ok = rep.worst_excess <= rep.slack;
  return rep;
}

HolderPropagationReport holder_propagation_report(const DiscreteOperator& op,
                                                  const HjbSolution& sol, double alpha,
                                                  double data_bound) {
  if (!(alpha > op.two_sigma) || alpha > 1.0) {
    throw ValidationError("holder_propagation_report: alpha must lie in (2*sigma, 1]");
  }
  const Grid& grid = op.grid;
  HolderPropagationReport rep;
  rep.alpha = alpha;
  rep.data_bound = data_bound;
  double lu_const = 4.0 * (op.levy_constant / (alpha - op.two_sigma) + op.tail_mass);
  rep.tolerance = 10.0 * std::pow(grid.spacing, 1.0 - op.two_sigma) *
                  std::max(1.0, data_bound);

  rep.u_ok = true;
  rep.lu_ok = true;
  std::vector<double> lu(grid.size());
  for (int k = 0; k < grid.time_samples(); ++k) {
    double tt = grid.horizon - grid.time(k) + 1.0;
    std::span<const double> us = sol.u.slice(k);
    double su = sup_norm(us);
    double se = holder_seminorm(us, alpha, grid);
    rep.sup_u.push_back(su);
    rep.semi_u.push_back(se);
    rep.u_bound.push_back(data_bound * tt);
    if (std::max(su, se) > data_bound * tt + 1e-11 * std::max(1.0, data_bound)) {
      rep.u_ok = false;
    }

    apply_operator(op, us, lu);
    double ln = holder_norm(lu, alpha - op.two_sigma, grid);
    rep.lu_norm.push_back(ln);
    rep.lu_bound.push_back(lu_const * data_bound * tt);
    if (ln > lu_const * data_bound * tt + rep.tolerance) rep.lu_ok = false;
  }
  return rep;
}

DriftExtract extract_drift(const DiscreteOperator& op, const ConjugatePair& pair,
                           const SpaceTimeField& u) {
  const Grid& grid = op.grid;
  if (u.time_slices != grid.time_samples() || u.space_points != grid.size()) {
    throw ValidationError("extract_drift: value field shape does not match the grid");
  }
  DriftExtract out;
  out.b = SpaceTimeField::zeros(u.time_slices, u.space_points, "b");
  out.lu = SpaceTimeField::zeros(u.time_slices, u.space_points, "Lu");
  for (int k = 0; k < u.time_slices; ++k) {
    apply_operator(op, u.slice(k), out.lu.slice(k));
    for (int i = 0; i < u.space_points; ++i) {
      double v = pair.Fprime(out.lu.at(k, i));
      out.b.at(k, i) = v;
      out.sup_b = std::max(out.sup_b, v);
    }
  }
  return out;
}

}  // namespace levymfg
