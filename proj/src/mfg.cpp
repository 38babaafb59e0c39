#include "levymfg/mfg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "levymfg/errors.hpp"
#include "levymfg/numerics.hpp"

namespace levymfg {

namespace {

double sup_t_tv(const SpaceTimeField& a, const SpaceTimeField& b) {
  double worst = 0.0;
  for (int k = 0; k < a.time_slices; ++k) {
    KahanSum s;
    std::span<const double> x = a.slice(k), y = b.slice(k);
    for (int i = 0; i < a.space_points; ++i) s.add(std::abs(x[i] - y[i]));
    worst = std::max(worst, 0.5 * s.value());
  }
  return worst;
}

SpaceTimeField source_from_trajectory(const Coupling& c, const SpaceTimeField& m) {
  SpaceTimeField f = SpaceTimeField::zeros(m.time_slices, m.space_points, "f");
  for (int k = 0; k < m.time_slices; ++k) {
    std::vector<double> v = c.apply_f(m.slice(k));
    std::copy(v.begin(), v.end(), f.slice(k).begin());
  }
  return f;
}

struct PicardStep {
  HjbSolution hjb;
  DriftField drift;
  FpSolution fp;
};

PicardStep picard_map(const DiscreteOperator& op, const ConjugatePair& pair,
                      const Coupling& coupling, const DiscreteMeasure& m0,
                      const SpaceTimeField& m_guess, const MfgOptions& opts) {
  PicardStep step;
  SpaceTimeField f = source_from_trajectory(coupling, m_guess);
  std::vector<double> g = coupling.apply_g(m_guess.slice(m_guess.time_slices - 1));
  step.hjb = solve_hjb(op, pair, f, g, opts.hjb);
  DriftExtract ex = extract_drift(op, pair, step.hjb.u);
  step.drift = make_drift(std::move(ex.b), op.grid);
  step.fp = solve_fp(op, step.drift, m0);
  return step;
}

SpaceTimeField initial_trajectory(const DiscreteOperator& op, const DiscreteMeasure& m0,
                                  InitialGuess guess, std::uint64_t seed) {
  const Grid& grid = op.grid;
  const int n = grid.size();
  const int nt1 = grid.time_samples();
  DiscreteMeasure start = m0;
  switch (guess) {
    case InitialGuess::Frozen:
      break;
    case InitialGuess::Uniform:
      start = DiscreteMeasure::uniform(grid);
      break;
    case InitialGuess::PointMass:
      start = DiscreteMeasure::point(grid, n / 3);
      break;
    case InitialGuess::RandomMixture: {
      SplitMix64 rng(seed, 0x6d667031u);
      std::vector<double> v(n);
      for (int i = 0; i < n; ++i) v[i] = rng.uniform(0.05, 1.0);
      start = DiscreteMeasure::from_density(grid, v);
      break;
    }
  }
  SpaceTimeField m = SpaceTimeField::zeros(nt1, n, "m");
  for (int k = 0; k < nt1; ++k) {
    std::copy(start.mass.begin(), start.mass.end(), m.slice(k).begin());
  }
  return m;
}

}  // namespace

std::vector<double> Coupling::convolve(std::span<const double> mass) const {
  const int n = grid.size();
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      int d = i - j;
      if (d < 0) d += n;
      acc += kernel[d] * mass[j];
    }
    out[i] = acc;
  }
  return out;
}

std::vector<double> Coupling::apply_f(std::span<const double> mass) const {
  std::vector<double> out = convolve(mass);
  for (double& v : out) v = amplitude_f * v + offset_f;
  return out;
}

std::vector<double> Coupling::apply_g(std::span<const double> mass) const {
  std::vector<double> out = convolve(mass);
  for (double& v : out) v = amplitude_g * v + offset_g;
  return out;
}

Coupling make_coupling(const Grid& grid, double width, double amplitude_f,
                       double offset_f, double amplitude_g, double offset_g) {
  if (!(width > 0.0) || width > 0.25) {
    throw ValidationError("mfg: mollifier width must lie in (0, 1/4]");
  }
  if (amplitude_f < 0.0 || amplitude_g < 0.0) {
    throw ValidationError("mfg: coupling amplitudes must be nonnegative");
  }
  const int n = grid.size();
  const double h = grid.spacing;

  Coupling c;
  c.grid = grid;
  c.rho.resize(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double d = grid.offset_coordinate(i);
    c.rho[i] = std::exp(-0.5 * d * d / (width * width));
    total += c.rho[i];
  }
  for (double& v : c.rho) v /= (total * h);  // density normalization: h sum = 1

  c.kernel.resize(n);
  for (int l = 0; l < n; ++l) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      int d = l - j;
      if (d < 0) d += n;
      acc += c.rho[j] * c.rho[d];
    }
    c.kernel[l] = h * acc;
  }

  // DFT of the kernel must stay nonnegative (real by symmetry).
  c.min_kernel_dft = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    double re = 0.0;
    for (int l = 0; l < n; ++l) {
      re += c.kernel[l] * std::cos(2.0 * std::numbers::pi * k * l / n);
    }
    c.min_kernel_dft = std::min(c.min_kernel_dft, re);
  }
  if (c.min_kernel_dft < -1e-12) {
    throw ValidationError("mfg: mollifier kernel has negative Fourier coefficients");
  }

  c.amplitude_f = amplitude_f;
  c.offset_f = offset_f;
  c.amplitude_g = amplitude_g;
  c.offset_g = offset_g;

  double kmax = sup_norm(c.kernel);
  double klip = holder_seminorm(c.kernel, 1.0, grid);
  c.bound_f = amplitude_f * (kmax + klip) + std::abs(offset_f);
  c.bound_g = amplitude_g * (kmax + klip) + std::abs(offset_g);
  c.data_bound = c.bound_f + c.bound_g;
  return c;
}

double coupling_pairing(const Coupling& c, const DiscreteMeasure& m1,
                        const DiscreteMeasure& m2) {
  std::vector<double> f1 = c.apply_f(m1.mass);
  std::vector<double> f2 = c.apply_f(m2.mass);
  KahanSum s;
  for (int i = 0; i < m1.size(); ++i) {
    s.add((f1[i] - f2[i]) * (m1.mass[i] - m2.mass[i]));
  }
  return s.value();
}

namespace {

MfgSolution solve_mfg_from(const DiscreteOperator& op, const ConjugatePair& pair,
                           const Coupling& coupling, const DiscreteMeasure& m0,
                           const MfgOptions& opts, InitialGuess guess,
                           std::uint64_t seed) {
  if (!(opts.damping > 0.0) || opts.damping > 1.0) {
    throw ValidationError("mfg: damping must lie in (0, 1]");
  }
  if (!(opts.tol > 0.0) || opts.max_iters < 1) {
    throw ValidationError("mfg: tol must be positive and max_iters >= 1");
  }

  MfgSolution sol;
  sol.thresholds = uniqueness_thresholds(
      op.two_sigma > 0.0 ? op.two_sigma : 1e-6, coupling.alpha,
      std::min(std::max(pair.gamma, 1e-6), 1.0), op.measure_symmetric_at_origin);

  SpaceTimeField m_cur = initial_trajectory(op, m0, guess, seed);
  for (int it = 1; it <= opts.max_iters; ++it) {
    PicardStep step = picard_map(op, pair, coupling, m0, m_cur, opts);
    double tau = opts.averaging == MfgAveraging::Damped
                     ? opts.damping
                     : 1.0 / static_cast<double>(it);
    SpaceTimeField m_next = m_cur;
    for (std::size_t i = 0; i < m_next.values.size(); ++i) {
      m_next.values[i] =
          (1.0 - tau) * m_cur.values[i] + tau * step.fp.m.values[i];
    }
    double inc = sup_t_tv(m_next, m_cur);
    sol.increments.push_back(inc);
    m_cur = std::move(m_next);
    sol.iterations = it;
    if (inc < opts.tol) {
      sol.converged = true;
      break;
    }
  }

  // Consistency pass: rebuild (u, b, m) from the converged trajectory. The
  // stored m is then an exact forward solution of the stored b.
  PicardStep final_step = picard_map(op, pair, coupling, m0, m_cur, opts);
  sol.u = final_step.hjb.u;
  sol.b = final_step.drift.values;
  sol.m = final_step.fp.m;
  sol.sup_b = final_step.drift.upper_bound;
  sol.hjb_info = final_step.hjb;

  // Residuals against the final trajectory's own coupling data.
  PicardStep audit = picard_map(op, pair, coupling, m0, sol.m, opts);
  sol.residual_hjb = sup_abs_diff(audit.hjb.u.values, sol.u.values);
  sol.residual_fp = sup_t_tv(audit.fp.m, sol.m);
  return sol;
}

}  // namespace

MfgSolution solve_mfg(const DiscreteOperator& op, const ConjugatePair& pair,
                      const Coupling& coupling, const DiscreteMeasure& m0,
                      const MfgOptions& opts) {
  return solve_mfg_from(op, pair, coupling, m0, opts, InitialGuess::Frozen, 0);
}

UniquenessExperiment uniqueness_experiment(const DiscreteOperator& op,
                                           const ConjugatePair& pair,
                                           const Coupling& coupling,
                                           const DiscreteMeasure& m0,
                                           const MfgOptions& opts, std::uint64_t seed) {
  UniquenessExperiment exp;
  const InitialGuess guesses[] = {InitialGuess::Frozen, InitialGuess::Uniform,
                                  InitialGuess::PointMass, InitialGuess::RandomMixture};
  const char* names[] = {"frozen", "uniform", "point-mass", "random-mixture"};

  std::vector<MfgSolution> runs;
  exp.all_converged = true;
  for (int gi = 0; gi < 4; ++gi) {
    MfgSolution s = solve_mfg_from(op, pair, coupling, m0, opts, guesses[gi], seed);
    exp.labels.emplace_back(names[gi]);
    exp.all_converged = exp.all_converged && s.converged;
    runs.push_back(std::move(s));
  }
  exp.runs = static_cast<int>(runs.size());
  exp.regime = runs.front().thresholds.mfg_unique;

  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      exp.max_pairwise_tv =
          std::max(exp.max_pairwise_tv, sup_t_tv(runs[a].m, runs[b].m));
      exp.max_pairwise_u = std::max(
          exp.max_pairwise_u, sup_abs_diff(runs[a].u.values, runs[b].u.values));
    }
  }
  exp.agreement = exp.all_converged &&
                  exp.max_pairwise_tv < 10.0 * opts.tol;
  return exp;
}

SConditionsReport check_S_conditions(const DiscreteOperator& op,
                                     const ConjugatePair& pair,
                                     const Coupling& coupling,
                                     const DiscreteMeasure& m0,
                                     const MfgSolution& sol) {
  SConditionsReport rep;
  const Grid& grid = op.grid;

  rep.s1_residual = sol.residual_hjb;
  rep.s1_ok = std::isfinite(rep.s1_residual);

  // Stability of L u under shrinking coupling perturbations.
  {
    SpaceTimeField f = source_from_trajectory(coupling, sol.m);
    std::vector<double> g = coupling.apply_g(sol.m.slice(sol.m.time_slices - 1));
    std::vector<double> lu_base(grid.size());
    std::vector<double> lu_pert(grid.size());
    HjbSolution base = solve_hjb(op, pair, f, g, HjbOptions{});
    apply_operator(op, base.u.slice(0), lu_base);
    for (int k = 1; k <= 4; ++k) {
      double eps = std::pow(2.0, -k);
      SpaceTimeField fp_field = f;
      for (int t = 0; t < fp_field.time_slices; ++t) {
        for (int i = 0; i < fp_field.space_points; ++i) {
          fp_field.at(t, i) +=
              eps * std::cos(2.0 * std::numbers::pi * grid.point(i));
        }
      }
      HjbSolution pert = solve_hjb(op, pair, fp_field, g, HjbOptions{});
      apply_operator(op, pert.u.slice(0), lu_pert);
      rep.s2_gaps.push_back(sup_abs_diff(lu_pert, lu_base));
    }
    rep.s2_ok = true;
    for (std::size_t i = 1; i < rep.s2_gaps.size(); ++i) {
      if (rep.s2_gaps[i] > rep.s2_gaps[i - 1] + 1e-12) rep.s2_ok = false;
    }
  }

  rep.s3_sup_b = sol.sup_b;
  rep.s3_bound = pair.Fprime(sol.hjb_info.working_range);
  rep.s3_ok = rep.s3_sup_b <= rep.s3_bound + 1e-12;

  double worst_dt = 0.0;
  for (int k = 0; k + 1 < sol.u.time_slices; ++k) {
    worst_dt = std::max(
        worst_dt, sup_abs_diff(sol.u.slice(k), sol.u.slice(k + 1)) / grid.dt);
  }
  rep.s4_dt_bound = worst_dt;
  rep.s4_ok = std::isfinite(worst_dt);

  DriftField bfield = make_drift(sol.b, grid);
  UniquenessProbe probe = uniqueness_probe(op, bfield, m0);
  rep.s5_contracting = probe.contracting;
  rep.s5_regime = probe.regime;
  return rep;
}

}  // namespace levymfg
