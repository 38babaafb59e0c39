#include "levymfg/fp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "levymfg/errors.hpp"
#include "levymfg/numerics.hpp"

namespace levymfg {

namespace {

void check_measure(const DiscreteMeasure& m, const Grid& grid) {
  if (m.size() != grid.size()) {
    throw ValidationError("fp: measure size does not match the grid");
  }
  for (double v : m.mass) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("fp: measure entries must be nonnegative and finite");
    }
  }
  if (std::abs(m.total() - 1.0) > 1e-9) {
    throw ValidationError("fp: measure must have unit total mass");
  }
}

void check_drift(const DriftField& b, const Grid& grid) {
  if (b.values.time_slices != grid.time_samples() ||
      b.values.space_points != grid.size()) {
    throw ValidationError("fp: drift field shape does not match the grid");
  }
  for (double v : b.values.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("fp: drift must be nonnegative and finite");
    }
  }
}

int fp_substeps(const Grid& grid, double B, double W, int forced, int max_substeps) {
  double load = grid.dt * B * W;
  int s = static_cast<int>(std::ceil(load));
  s = std::max({s, 1, forced});
  if (s > max_substeps) {
    throw NumericalError("fp: CFL requires more sub-steps than allowed (" +
                         std::to_string(s) + ")");
  }
  return s;
}

// One explicit sub-step of the forward equation in M-matrix form.
void fp_substep(const DiscreteOperator& op, std::span<const double> bslice,
                const std::vector<double>& m, double sdt, std::vector<double>& out) {
  const int n = op.grid.size();
  const double W = op.total_weight;
  for (int i = 0; i < n; ++i) {
    double keep = 1.0 - sdt * bslice[i] * W;
    double acc = m[i] * (keep > 0.0 ? keep : 0.0);
    for (const auto& [j, w] : op.nonzero) {
      int src = i - j;
      if (src < 0) src += n;
      acc += sdt * w * bslice[src] * m[src];
    }
    out[i] = acc;
  }
}

}  // namespace

DiscreteMeasure DiscreteMeasure::uniform(const Grid& grid) {
  DiscreteMeasure m;
  m.mass.assign(grid.size(), 1.0 / grid.size());
  return m;
}

DiscreteMeasure DiscreteMeasure::point(const Grid& grid, int site) {
  if (site < 0 || site >= grid.size()) {
    throw ValidationError("fp: point-mass site outside the grid");
  }
  DiscreteMeasure m;
  m.mass.assign(grid.size(), 0.0);
  m.mass[site] = 1.0;
  return m;
}

DiscreteMeasure DiscreteMeasure::from_density(const Grid& grid,
                                              std::span<const double> values) {
  if (static_cast<int>(values.size()) != grid.size()) {
    throw ValidationError("fp: density sample size does not match the grid");
  }
  double total = 0.0;
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("fp: density samples must be nonnegative and finite");
    }
    total += v;
  }
  if (!(total > 0.0)) throw ValidationError("fp: density must have positive mass");
  DiscreteMeasure m;
  m.mass.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m.mass[i] = values[i] / total;
  return m;
}

double DiscreteMeasure::total() const { return kahan_total(mass); }

double DiscreteMeasure::min_entry() const {
  return *std::min_element(mass.begin(), mass.end());
}

double total_variation_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.size() != b.size()) {
    throw ValidationError("fp: TV distance needs equal-size measures");
  }
  KahanSum s;
  for (int i = 0; i < a.size(); ++i) s.add(std::abs(a.mass[i] - b.mass[i]));
  return 0.5 * s.value();
}

double dual_lipschitz_distance(const DiscreteMeasure& a, const DiscreteMeasure& b,
                               const Grid& grid) {
  const int n = grid.size();
  if (a.size() != n || b.size() != n) {
    throw ValidationError("fp: flat distance needs grid-size measures");
  }
  double defect = (kahan_total(a.mass) - kahan_total(b.mass)) / n;
  std::vector<double> cum(n);
  double run = 0.0;
  for (int i = 0; i < n; ++i) {
    run += a.mass[i] - b.mass[i] - defect;
    cum[i] = run;
  }
  // min_c sum_i h |S_i - c| is attained at a median of the S values.
  std::vector<double> sorted(cum);
  std::sort(sorted.begin(), sorted.end());
  double c = sorted[n / 2];
  KahanSum s;
  for (int i = 0; i < n; ++i) s.add(std::abs(cum[i] - c));
  return grid.spacing * s.value();
}

DriftField make_drift(SpaceTimeField values, const Grid& grid) {
  DriftField b;
  b.values = std::move(values);
  check_drift(b, grid);
  b.upper_bound = sup_norm(b.values.values);
  b.holder = measure_holder_exponent(b.values.slice(0), grid);
  return b;
}

DriftField constant_drift(const Grid& grid, double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ValidationError("fp: constant drift must be nonnegative");
  }
  return make_drift(SpaceTimeField::constant(grid.time_samples(), grid.size(), value, "b"),
                    grid);
}

DriftField make_holder_drift(const Grid& grid, double target_beta, double lo, double hi,
                             std::uint64_t seed) {
  if (!(target_beta > 0.0) || target_beta > 1.0) {
    throw ValidationError("fp: target Hölder exponent must lie in (0, 1]");
  }
  if (!(0.0 <= lo) || !(lo < hi)) {
    throw ValidationError("fp: drift range must satisfy 0 <= lo < hi");
  }
  const int n = grid.size();
  SplitMix64 rng(seed, 0x44524946u);
  std::vector<double> raw(n, 0.0);
  for (int k = 1; k <= n / 2; ++k) {
    double amp = std::pow(static_cast<double>(k), -(target_beta + 0.5));
    double pa = rng.uniform(-1.0, 1.0) * amp;
    double pb = rng.uniform(-1.0, 1.0) * amp;
    for (int i = 0; i < n; ++i) {
      double arg = 2.0 * std::numbers::pi * k * grid.point(i);
      raw[i] += pa * std::cos(arg) + pb * std::sin(arg);
    }
  }
  double mn = *std::min_element(raw.begin(), raw.end());
  double mx = *std::max_element(raw.begin(), raw.end());
  if (!(mx > mn)) throw NumericalError("fp: degenerate drift synthesis");
  SpaceTimeField field =
      SpaceTimeField::zeros(grid.time_samples(), n, "b");
  for (int i = 0; i < n; ++i) {
    double v = lo + (hi - lo) * (raw[i] - mn) / (mx - mn);
    for (int k = 0; k < grid.time_samples(); ++k) field.at(k, i) = v;
  }
  return make_drift(std::move(field), grid);
}

FpSolution solve_fp(const DiscreteOperator& op, const DriftField& b,
                    const DiscreteMeasure& m0, const FpOptions& opts) {
  const Grid& grid = op.grid;
  check_measure(m0, grid);
  check_drift(b, grid);

  FpSolution sol;
  sol.substeps =
      fp_substeps(grid, b.upper_bound, op.total_weight, opts.forced_substeps,
                  opts.max_substeps);
  const double sdt = grid.dt / sol.substeps;
  const int n = grid.size();
  const int nt = grid.time_steps;

  sol.m = SpaceTimeField::zeros(grid.time_samples(), n, "m");
  std::vector<double> cur = m0.mass;
  std::vector<double> next(n);
  std::copy(cur.begin(), cur.end(), sol.m.slice(0).begin());
  sol.min_entry = *std::min_element(cur.begin(), cur.end());

  for (int k = 0; k < nt; ++k) {
    std::span<const double> bs = b.values.slice(k);
    for (int sub = 0; sub < sol.substeps; ++sub) {
      fp_substep(op, bs, cur, sdt, next);
      cur.swap(next);
    }
    if (!all_finite(cur)) throw NumericalError("fp: non-finite mass values");
    std::copy(cur.begin(), cur.end(), sol.m.slice(k + 1).begin());
    sol.max_mass_defect =
        std::max(sol.max_mass_defect, std::abs(kahan_total(cur) - 1.0));
    sol.min_entry = std::min(sol.min_entry, *std::min_element(cur.begin(), cur.end()));
  }
  return sol;
}

DualSolution solve_dual(const DiscreteOperator& op, const DriftField& b,
                        std::span<const double> phi, const DualOptions& opts) {
  const Grid& grid = op.grid;
  check_drift(b, grid);
  if (static_cast<int>(phi.size()) != grid.size()) {
    throw ValidationError("fp: dual initial slice does not match the grid");
  }
  if (!all_finite(phi)) throw ValidationError("fp: dual data must be finite");

  const int n = grid.size();
  const int nt = grid.time_steps;
  const bool backward = opts.direction == DualDirection::BackwardFromT0;
  int t0 = backward ? opts.t0_index : nt;
  if (backward && (t0 < 1 || t0 > nt)) {
    throw ValidationError("fp: t0 index must lie in [1, n_t]");
  }

  DualSolution sol;
  sol.substeps = fp_substeps(grid, b.upper_bound, op.total_weight,
                             opts.forced_substeps, opts.max_substeps);
  const double sdt = grid.dt / sol.substeps;
  sol.w = SpaceTimeField::zeros(t0 + 1, n, "w");

  std::vector<double> cur(phi.begin(), phi.end());
  std::vector<double> lw(n), next(n);

  if (!backward) {
    // dw/dt = b L w from w(0) = phi; b at the left endpoint of each step.
    std::copy(cur.begin(), cur.end(), sol.w.slice(0).begin());
    for (int k = 0; k < t0; ++k) {
      std::span<const double> bs = b.values.slice(k);
      for (int sub = 0; sub < sol.substeps; ++sub) {
        apply_operator(op, cur, lw);
        for (int i = 0; i < n; ++i) next[i] = cur[i] + sdt * bs[i] * lw[i];
        cur.swap(next);
      }
      if (!all_finite(cur)) throw NumericalError("fp: non-finite dual values");
      std::copy(cur.begin(), cur.end(), sol.w.slice(k + 1).begin());
    }
    return sol;
  }

  // Backward on [0, t0] from w(t0) = phi. Both stepping modes use the same
  // recursion w^k = w^{k+1} + dt b^k L w^{k+1}; with the FP sub-step schedule
  // this is exactly the transpose of the forward FP update, which is what
  // makes the pairing telescope in holmgren_residual.
  std::copy(cur.begin(), cur.end(), sol.w.slice(t0).begin());
  for (int k = t0 - 1; k >= 0; --k) {
    std::span<const double> bs = b.values.slice(k);
    for (int sub = 0; sub < sol.substeps; ++sub) {
      apply_operator(op, cur, lw);
      for (int i = 0; i < n; ++i) next[i] = cur[i] + sdt * bs[i] * lw[i];
      cur.swap(next);
    }
    if (!all_finite(cur)) throw NumericalError("fp: non-finite dual values");
    std::copy(cur.begin(), cur.end(), sol.w.slice(k).begin());
  }
  return sol;
}

double holmgren_residual(const DiscreteOperator& op, const DriftField& b,
                         const DiscreteMeasure& m0, std::span<const double> phi,
                         int t0_index, DualStepping stepping) {
  const Grid& grid = op.grid;
  if (t0_index < 1 || t0_index > grid.time_steps) {
    throw ValidationError("fp: t0 index must lie in [1, n_t]");
  }
  FpSolution fwd = solve_fp(op, b, m0);

  std::vector<double> w0(grid.size());
  if (stepping == DualStepping::ExactAdjoint) {
    DualOptions d;
    d.direction = DualDirection::BackwardFromT0;
    d.t0_index = t0_index;
    d.stepping = stepping;
    d.forced_substeps = fwd.substeps;
    DualSolution dual = solve_dual(op, b, phi, d);
    std::span<const double> s = dual.w.slice(0);
    std::copy(s.begin(), s.end(), w0.begin());
  } else {
    // Independent route: reverse the coefficient in time and run the forward
    // dual scheme for w~, then read w(0) = w~(t0). The reversed coefficient
    // is sampled at macro nodes, b~(t_k) = b(t_{t0-k}).
    SpaceTimeField rev =
        SpaceTimeField::zeros(grid.time_samples(), grid.size(), "b-rev");
    for (int k = 0; k <= grid.time_steps; ++k) {
      int src = t0_index - k;
      if (src < 0) src = 0;
      std::span<const double> s = b.values.slice(src);
      std::copy(s.begin(), s.end(), rev.slice(k).begin());
    }
    DriftField brev = make_drift(std::move(rev), grid);
    DualOptions d;
    d.direction = DualDirection::ForwardFromZero;
    d.stepping = stepping;
    d.forced_substeps = fwd.substeps;
    DualSolution dual = solve_dual(op, brev, phi, d);
    std::span<const double> s = dual.w.slice(t0_index);
    std::copy(s.begin(), s.end(), w0.begin());
  }

  KahanSum left, right;
  for (int i = 0; i < grid.size(); ++i) {
    left.add(fwd.m.at(t0_index, i) * phi[i]);
    right.add(m0.mass[i] * w0[i]);
  }
  return std::abs(left.value() - right.value());
}

namespace {

DiscreteMeasure mollify(const DiscreteMeasure& m, const Grid& grid, int width) {
  // Repeated three-point smoothing; width = number of passes.
  DiscreteMeasure out = m;
  const int n = grid.size();
  std::vector<double> tmp(n);
  for (int pass = 0; pass < width; ++pass) {
    for (int i = 0; i < n; ++i) {
      int l = i == 0 ? n - 1 : i - 1;
      int r = i + 1 == n ? 0 : i + 1;
      tmp[i] = 0.25 * out.mass[l] + 0.5 * out.mass[i] + 0.25 * out.mass[r];
    }
    out.mass = tmp;
  }
  return out;
}

DiscreteMeasure final_slice(const FpSolution& sol) {
  DiscreteMeasure m;
  std::span<const double> s = sol.m.slice(sol.m.time_slices - 1);
  m.mass.assign(s.begin(), s.end());
  return m;
}

}  // namespace

UniquenessProbe uniqueness_probe(const DiscreteOperator& op, const DriftField& b,
                                 const DiscreteMeasure& m0) {
  UniquenessProbe probe;
  probe.measured_beta = b.holder.degenerate ? 1.0 : b.holder.exponent;
  double beta = std::min(std::max(probe.measured_beta, 1e-6), 1.0);
  probe.regime = fp_beta_verdict(op.two_sigma > 0.0 ? op.two_sigma : 1e-6, beta,
                                 op.measure_symmetric_at_origin);

  FpSolution base = solve_fp(op, b, m0);
  FpOptions o2, o4;
  o2.forced_substeps = base.substeps * 2;
  o4.forced_substeps = base.substeps * 4;
  FpSolution r2 = solve_fp(op, b, m0, o2);
  FpSolution r4 = solve_fp(op, b, m0, o4);

  DiscreteMeasure mb = final_slice(base), m2 = final_slice(r2), m4 = final_slice(r4);
  probe.tv_refine = {total_variation_distance(mb, m2), total_variation_distance(m2, m4)};
  probe.flat_refine = {dual_lipschitz_distance(mb, m2, op.grid),
                       dual_lipschitz_distance(m2, m4, op.grid)};

  for (int width : {8, 4, 2, 1}) {
    DiscreteMeasure start = mollify(m0, op.grid, width);
    FpSolution run = solve_fp(op, b, start);
    DiscreteMeasure mf = final_slice(run);
    probe.tv_mollify.push_back(total_variation_distance(mb, mf));
    probe.flat_mollify.push_back(dual_lipschitz_distance(mb, mf, op.grid));
  }

  auto nonincreasing = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] > v[i - 1] + 1e-12) return false;
    }
    return true;
  };
  probe.contracting = nonincreasing(probe.tv_refine) &&
                      nonincreasing(probe.flat_mollify);
  return probe;
}

}  // namespace levymfg
