#include "levymfg/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "levymfg/errors.hpp"
#include "levymfg/fp.hpp"
#include "levymfg/grid.hpp"
#include "levymfg/hamiltonian.hpp"
#include "levymfg/hjb.hpp"
#include "levymfg/levy.hpp"
#include "levymfg/mfg.hpp"
#include "levymfg/numerics.hpp"
#include "levymfg/regularity.hpp"
#include "levymfg/sde_mc.hpp"

namespace levymfg {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Bisection to machine precision; assumes f changes sign on [lo, hi].
double bisect_root(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SpaceTimeField time_constant_field(const Grid& grid, std::span<const double> profile,
                                   const std::string& label) {
  SpaceTimeField out = SpaceTimeField::zeros(grid.time_samples(), grid.size(), label);
  for (int k = 0; k <= grid.time_steps; ++k) {
    std::copy(profile.begin(), profile.end(), out.slice(k).begin());
  }
  return out;
}

std::vector<double> cosine_profile(const Grid& grid, double amplitude) {
  std::vector<double> out(grid.size());
  for (int i = 0; i < grid.size(); ++i) out[i] = amplitude * std::cos(kTau * grid.point(i));
  return out;
}

// Random smooth profile rescaled to a prescribed sup norm.
std::vector<double> scaled_random(const Grid& grid, std::uint64_t seed, double amplitude) {
  auto v = random_smooth_field(grid, seed);
  double m = sup_norm(v);
  if (m == 0.0) m = 1.0;
  for (double& x : v) x *= amplitude / m;
  return v;
}

double tv_gap(std::span<const double> a, std::span<const double> b) {
  KahanSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(std::abs(a[i] - b[i]));
  return 0.5 * s.value();
}

using Dense = std::vector<std::vector<double>>;

Dense mat_mul(const Dense& x, const Dense& y) {
  const int n = static_cast<int>(x.size());
  Dense out(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const double xik = x[i][k];
      if (xik == 0.0) continue;
      const std::vector<double>& yk = y[k];
      std::vector<double>& oi = out[i];
      for (int j = 0; j < n; ++j) oi[j] += xik * yk[j];
    }
  }
  return out;
}

// exp(a) v by scaling-and-squaring with a Taylor core. The input matrix must
// already carry the time factor. Sized for the small dense oracles used here.
std::vector<double> expm_apply(Dense a, std::span<const double> v) {
  const int n = static_cast<int>(a.size());
  double norm = 0.0;
  for (const auto& row : a) {
    double s = 0.0;
    for (double x : row) s += std::abs(x);
    norm = std::max(norm, s);
  }
  int squarings = 0;
  while (norm > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  for (auto& row : a) {
    for (double& x : row) x *= scale;
  }
  Dense e(n, std::vector<double>(n, 0.0));
  Dense term(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    e[i][i] = 1.0;
    term[i][i] = 1.0;
  }
  for (int k = 1; k <= 22; ++k) {
    term = mat_mul(term, a);
    const double inv = 1.0 / k;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        term[i][j] *= inv;
        e[i][j] += term[i][j];
      }
    }
  }
  for (int s = 0; s < squarings; ++s) e = mat_mul(e, e);
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    KahanSum acc;
    for (int j = 0; j < n; ++j) acc.add(e[i][j] * v[j]);
    out[i] = acc.value();
  }
  return out;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

CriterionResult criterion_threshold_arithmetic() {
  CriterionResult r;
  r.index = 1;
  r.name = "threshold-arithmetic";

  auto mfg_margin = [](bool sym) {
    return std::function<double(double)>([sym](double s) {
      return uniqueness_thresholds(s, 1.0, 1.0, sym).mfg_margin;
    });
  };
  auto fp_margin = [](bool sym) {
    return std::function<double(double)>([sym](double s) {
      return uniqueness_thresholds(s, 1.0, 1.0, sym).fp_interval_margin;
    });
  };

  const double root_ns = bisect_root(mfg_margin(false), 0.05, 0.45);
  const double root_sym = bisect_root(mfg_margin(true), 0.05, 0.45);
  const double root_fp_ns = bisect_root(fp_margin(false), 0.05, 0.48);
  const double root_fp_sym = bisect_root(fp_margin(true), 0.05, 0.49);

  const double target_ns = (2.0 - std::sqrt(2.0)) / 2.0;
  const double target_sym = (7.0 - std::sqrt(33.0)) / 4.0;
  const double target_fp_ns = (3.0 - std::sqrt(5.0)) / 2.0;
  const double target_fp_sym = (5.0 - std::sqrt(17.0)) / 2.0;

  const double gap_ns = std::abs(root_ns - target_ns);
  const double gap_sym = std::abs(root_sym - target_sym);
  const double gap_fp_ns = std::abs(root_fp_ns - target_fp_ns);
  const double gap_fp_sym = std::abs(root_fp_sym - target_fp_sym);
  const bool roots_ok = gap_ns <= 1e-12 && gap_sym <= 1e-12 && gap_fp_ns <= 1e-12 &&
                        gap_fp_sym <= 1e-12;

  // The verdict must flip across each crossing.
  const double off = 1e-9;
  const bool flips_ok =
      uniqueness_thresholds(target_ns - off, 1.0, 1.0, false).mfg_unique == Verdict::Pass &&
      uniqueness_thresholds(target_ns + off, 1.0, 1.0, false).mfg_unique == Verdict::Fail &&
      uniqueness_thresholds(target_sym - off, 1.0, 1.0, true).mfg_unique == Verdict::Pass &&
      uniqueness_thresholds(target_sym + off, 1.0, 1.0, true).mfg_unique == Verdict::Fail &&
      uniqueness_thresholds(target_fp_ns - off, 1.0, 1.0, false).fp_interval_nonempty ==
          Verdict::Pass &&
      uniqueness_thresholds(target_fp_ns + off, 1.0, 1.0, false).fp_interval_nonempty ==
          Verdict::Fail;

  // Critical growth exponent at the midpoint order: exact value 1.
  const double qc_gap = std::abs(critical_q(0.5) - 1.0);
  const bool qc_ok = qc_gap == 0.0;

  // Rational-mode agreement: strict verdicts off the crossing, a Boundary
  // verdict exactly on a rationally representable crossing (gamma chosen so
  // the threshold identity holds with equality at s = 1/4).
  const Fraction one{1, 1};
  ThresholdReport below = uniqueness_thresholds(Fraction::parse("1/4"), one, one, false);
  ThresholdReport above = uniqueness_thresholds(Fraction::parse("3/10"), one, one, false);
  ThresholdReport on = uniqueness_thresholds(Fraction::parse("1/4"), one,
                                             Fraction::parse("7/9"), false);
  const bool rational_ok = below.exact && below.mfg_unique == Verdict::Pass &&
                           above.exact && above.mfg_unique == Verdict::Fail &&
                           on.exact && on.mfg_unique == Verdict::Boundary;

  r.passed = roots_ok && flips_ok && qc_ok && rational_ok;
  r.detail = "root gaps ns=" + fmt(gap_ns) + " sym=" + fmt(gap_sym) +
             " fp-ns=" + fmt(gap_fp_ns) + " fp-sym=" + fmt(gap_fp_sym) +
             "; flips=" + (flips_ok ? "ok" : "bad") + "; qc gap=" + fmt(qc_gap) +
             "; rational=" + (rational_ok ? "ok" : "bad");
  return r;
}

CriterionResult criterion_bootstrap_recursion() {
  CriterionResult r;
  r.index = 2;
  r.name = "exponent-bootstrap";

  int failures = 0;
  int runs = 0;
  double worst_gap = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double s = 0.03 + (0.47 - 0.03) * i / 19.0;
    const double lower = s / (1.0 - s);
    for (int j = 0; j < 20; ++j) {
      double beta = lower + (1.0 - lower) * (j + 1) / 20.0;
      beta = std::min(beta, 1.0);
      BootstrapResult b = bootstrap_recursion(s, beta, 1.0, 1.0, 500, 1.0);
      ++runs;
      worst_gap = std::max(worst_gap, b.final_gap);
      const bool ok = b.in_regime && b.monotone && b.constants_cauchy && b.final_gap < 1e-10;
      if (!ok) ++failures;
    }
  }
  r.passed = failures == 0;
  r.detail = "runs=" + std::to_string(runs) + " failures=" + std::to_string(failures) +
             " worst gap=" + fmt(worst_gap);
  return r;
}

CriterionResult criterion_operator_convergence(const VerifyOptions& opts) {
  CriterionResult r;
  r.index = 3;
  r.name = "operator-spectral-convergence";

  const std::vector<int> sizes = opts.quick ? std::vector<int>{64, 128, 256}
                                            : std::vector<int>{128, 256, 512};
  double min_order = 1e300;
  double worst_err = 0.0;
  for (double s2 : {0.2, 0.5}) {
    std::vector<double> errs;
    for (int n : sizes) {
      Grid g = Grid::make(1, n, 1.0, 1);
      DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(s2), g);
      double e = 0.0;
      for (int k = 1; k <= 4; ++k) {
        const double target = -std::pow(kTau * k, s2);
        const std::complex<double> sym = op.fourier_symbol(k);
        const double rel =
            (std::abs(sym.real() - target) + std::abs(sym.imag())) / std::abs(target);
        e = std::max(e, rel);
      }
      errs.push_back(e);
      worst_err = std::max(worst_err, e);
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
      min_order = std::min(min_order, std::log2(errs[i] / errs[i + 1]));
    }
  }
  const bool order_ok = min_order >= 0.7;

  // Atomic measures act exactly: compare against a direct shifted sum.
  Grid g = Grid::make(1, 64, 1.0, 1);
  DiscreteOperator op = assemble_operator(
      LevyMeasureSpec::atomic({{0.25, 0.3}, {-0.125, 0.7}, {0.5, 0.2}}), g);
  std::vector<double> phi = random_smooth_field(g, 7);
  std::vector<double> lphi = apply_operator(op, phi);
  const std::vector<std::pair<int, double>> offsets = {{16, 0.3}, {-8, 0.7}, {32, 0.2}};
  double atomic_err = 0.0;
  for (int i = 0; i < 64; ++i) {
    double acc = 0.0;
    for (const auto& [o, mass] : offsets) acc += mass * (phi[(i + o + 64) % 64] - phi[i]);
    atomic_err = std::max(atomic_err, std::abs(acc - lphi[i]));
  }
  const double scale = std::max(1.0, sup_norm(phi));
  const bool atomic_ok = atomic_err <= 1e-13 * scale;

  r.passed = order_ok && atomic_ok;
  r.detail = "min symbol order=" + fmt(min_order) + " worst rel err=" + fmt(worst_err) +
             "; atomic err=" + fmt(atomic_err);
  return r;
}

CriterionResult criterion_operator_bounds(const VerifyOptions& opts) {
  CriterionResult r;
  r.index = 4;
  r.name = "operator-norm-bounds";

  const int per = opts.quick ? 5 : 25;
  const int n = opts.quick ? 64 : 128;
  int violations = 0;
  int checks = 0;
  double worst_sup = 0.0;
  double worst_semi = 0.0;
  std::uint64_t stream = opts.seed * 977 + 11;
  for (double s2 : {0.3, 0.5}) {
    Grid g = Grid::make(1, n, 1.0, 1);
    DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(s2), g);
    for (int i = 0; i < per; ++i) {
      std::vector<double> phi = random_smooth_field(g, stream++);
      OperatorBoundsReport rep = check_operator_bounds(op, phi, 1.0);
      ++checks;
      if (!rep.sup_ok) ++violations;
      if (!rep.seminorm_ok) ++violations;
      if (rep.sup_bound + rep.tolerance > 0.0) {
        worst_sup = std::max(worst_sup, rep.sup_measured / (rep.sup_bound + rep.tolerance));
      }
      if (rep.seminorm_bound + rep.tolerance > 0.0) {
        worst_semi = std::max(worst_semi,
                              rep.seminorm_measured / (rep.seminorm_bound + rep.tolerance));
      }
    }
  }
  r.passed = violations == 0;
  r.detail = "fields=" + std::to_string(checks) + " violations=" + std::to_string(violations) +
             " worst sup ratio=" + fmt(worst_sup) + " worst seminorm ratio=" + fmt(worst_semi);
  return r;
}

CriterionResult criterion_hjb_contract(const VerifyOptions& opts) {
  CriterionResult r;
  r.index = 5;
  r.name = "hjb-monotone-contract";

  const int n = opts.quick ? 64 : 256;
  const int nt = opts.quick ? 16 : 32;
  const int n_pairs = opts.quick ? 10 : 50;
  const int n_stab = opts.quick ? 3 : 10;
  const double T = 0.5;
  Grid g = Grid::make(1, n, T, nt);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
  ConjugatePair pair = make_pair(PairKind::Power, PairParams{1.0, 0.1, 2.0});

  // Comparison under ordered data, on a shared range and sub-step schedule.
  int comp_viol = 0;
  double comp_worst = 0.0;
  for (int t = 0; t < n_pairs; ++t) {
    const std::uint64_t s = opts.seed + 100 + 7 * static_cast<std::uint64_t>(t);
    std::vector<double> f1 = scaled_random(g, s, 0.15);
    std::vector<double> g1 = scaled_random(g, s + 1, 0.15);
    std::vector<double> df = scaled_random(g, s + 2, 0.1);
    std::vector<double> dg = scaled_random(g, s + 3, 0.1);
    std::vector<double> f2 = f1;
    std::vector<double> g2 = g1;
    for (int i = 0; i < n; ++i) {
      f2[i] += std::abs(df[i]);
      g2[i] += std::abs(dg[i]);
    }
    SpaceTimeField F1 = time_constant_field(g, f1, "f1");
    SpaceTimeField F2 = time_constant_field(g, f2, "f2");
    HjbSolution a = solve_hjb(op, pair, F1, g1);
    HjbSolution b = solve_hjb(op, pair, F2, g2);
    HjbOptions shared;
    shared.working_range_override = std::max(a.working_range, b.working_range);
    shared.forced_substeps = std::max(a.substeps, b.substeps);
    a = solve_hjb(op, pair, F1, g1, shared);
    b = solve_hjb(op, pair, F2, g2, shared);
    const double slack =
        1e-11 * std::max({1.0, sup_norm(a.u.values), sup_norm(b.u.values)});
    double worst = -1e300;
    for (std::size_t i = 0; i < a.u.values.size(); ++i) {
      worst = std::max(worst, a.u.values[i] - b.u.values[i]);
    }
    comp_worst = std::max(comp_worst, worst);
    if (worst > slack) ++comp_viol;
  }

  // Stability estimate against the discrete bound.
  int stab_viol = 0;
  double stab_excess = -1e300;
  for (int t = 0; t < n_stab; ++t) {
    const std::uint64_t s = opts.seed + 500 + 13 * static_cast<std::uint64_t>(t);
    SpaceTimeField F1 = time_constant_field(g, scaled_random(g, s, 0.2), "f1");
    SpaceTimeField F2 = time_constant_field(g, scaled_random(g, s + 1, 0.2), "f2");
    std::vector<double> g1 = scaled_random(g, s + 2, 0.2);
    std::vector<double> g2 = scaled_random(g, s + 3, 0.2);
    StabilityReport rep = stability_gap(op, pair, F1, g1, F2, g2);
    if (!rep.ok) ++stab_viol;
    stab_excess = std::max(stab_excess, rep.worst_excess);
  }

  // Constant shifts pass through the scheme exactly: adding c to both data
  // terms adds c (T - t) + c to the solution.
  const double c = 0.37;
  std::vector<double> fbase = scaled_random(g, opts.seed + 700, 0.2);
  std::vector<double> gbase = scaled_random(g, opts.seed + 701, 0.2);
  std::vector<double> fshift = fbase;
  std::vector<double> gshift = gbase;
  for (int i = 0; i < n; ++i) {
    fshift[i] += c;
    gshift[i] += c;
  }
  SpaceTimeField Fb = time_constant_field(g, fbase, "f");
  SpaceTimeField Fs = time_constant_field(g, fshift, "f");
  HjbSolution ub = solve_hjb(op, pair, Fb, gbase);
  HjbSolution us = solve_hjb(op, pair, Fs, gshift);
  HjbOptions shared;
  shared.working_range_override = std::max(ub.working_range, us.working_range);
  shared.forced_substeps = std::max(ub.substeps, us.substeps);
  ub = solve_hjb(op, pair, Fb, gbase, shared);
  us = solve_hjb(op, pair, Fs, gshift, shared);
  double shift_err = 0.0;
  for (int k = 0; k <= nt; ++k) {
    const double expect = c * (T - g.time(k)) + c;
    for (int i = 0; i < n; ++i) {
      shift_err = std::max(shift_err, std::abs(us.u.at(k, i) - ub.u.at(k, i) - expect));
    }
  }
  const bool shift_ok = shift_err <= 1e-9 * std::max(1.0, c * (T + 1.0));

  // Propagation of the data bounds for cosine data across two orders.
  bool holder_ok = true;
  double worst_lu_ratio = 0.0;
  for (double s2 : {0.2, 0.5}) {
    DiscreteOperator oph = assemble_operator(LevyMeasureSpec::stable(s2), g);
    SpaceTimeField fc = time_constant_field(g, cosine_profile(g, 0.2), "f");
    std::vector<double> gc = cosine_profile(g, 0.1);
    HjbSolution sol = solve_hjb(oph, pair, fc, gc);
    HolderPropagationReport rep = holder_propagation_report(oph, sol, 1.0, sol.data_bound);
    holder_ok = holder_ok && rep.u_ok && rep.lu_ok;
    for (std::size_t k = 0; k < rep.lu_norm.size(); ++k) {
      if (rep.lu_bound[k] + rep.tolerance > 0.0) {
        worst_lu_ratio =
            std::max(worst_lu_ratio, rep.lu_norm[k] / (rep.lu_bound[k] + rep.tolerance));
      }
    }
  }

  r.passed = comp_viol == 0 && stab_viol == 0 && shift_ok && holder_ok;
  r.detail = "comparison worst=" + fmt(comp_worst) + " viol=" + std::to_string(comp_viol) +
             "; stability excess=" + fmt(stab_excess) + " viol=" + std::to_string(stab_viol) +
             "; shift err=" + fmt(shift_err) + "; propagation=" +
             (holder_ok ? "ok" : "bad") + " lu ratio=" + fmt(worst_lu_ratio);
  return r;
}

CriterionResult criterion_fp_contract(const VerifyOptions& opts) {
  CriterionResult r;
  r.index = 6;
  r.name = "fp-positivity-oracle";

  // Dense semigroup oracle on an atomic measure with unit drift.
  const int n = 64;
  const double T = 1.0;
  LevyMeasureSpec spec = LevyMeasureSpec::atomic({{0.125, 0.6}, {-0.125, 0.6}});
  const int nt_coarse = opts.quick ? 8 : 16;

  double worst_defect = 0.0;
  double worst_min_entry = 0.0;
  auto oracle_err = [&](int nt) {
    Grid g = Grid::make(1, n, T, nt);
    DiscreteOperator op = assemble_operator(spec, g);
    DriftField b = constant_drift(g, 1.0);
    DiscreteMeasure m0 = DiscreteMeasure::point(g, n / 2);
    FpSolution sol = solve_fp(op, b, m0);
    worst_defect = std::max(worst_defect, sol.max_mass_defect);
    worst_min_entry = std::min(worst_min_entry, sol.min_entry);
    Dense a(n, std::vector<double>(n, 0.0));
    for (const auto& [off, w] : op.nonzero) {
      for (int i = 0; i < n; ++i) a[i][((i - off) % n + n) % n] += w;
    }
    for (int i = 0; i < n; ++i) a[i][i] -= op.total_weight;
    for (auto& row : a) {
      for (double& x : row) x *= T;
    }
    std::vector<double> target = expm_apply(std::move(a), m0.mass);
    return tv_gap(sol.m.slice(nt), target);
  };
  const double err_coarse = oracle_err(nt_coarse);
  const double err_fine = oracle_err(2 * nt_coarse);
  const double ratio = err_coarse / std::max(err_fine, 1e-300);
  // First-order scheme: the oracle gap is proportional to dt (measured
  // constant is about 0.19), so the magnitude bound scales with the step.
  const double dt_fine = T / (2 * nt_coarse);
  const bool oracle_ok = err_fine <= 0.25 * dt_fine && ratio >= 1.6 && ratio <= 2.6;

  // Structural sweep: positivity and mass conservation under rough drifts.
  Grid g2 = Grid::make(1, 128, 0.5, 16);
  DiscreteOperator op2 = assemble_operator(LevyMeasureSpec::stable(0.5), g2);
  const int sweeps = opts.quick ? 4 : 20;
  int neg = 0;
  double sweep_defect = 0.0;
  for (int t = 0; t < sweeps; ++t) {
    DriftField b = make_holder_drift(g2, 0.7, 0.2, 1.0, opts.seed + 50 + t);
    std::vector<double> dens = scaled_random(g2, opts.seed + 400 + t, 0.5);
    for (double& x : dens) x += 1.0;
    DiscreteMeasure m0 = DiscreteMeasure::from_density(g2, dens);
    FpSolution sol = solve_fp(op2, b, m0);
    if (sol.min_entry < 0.0) ++neg;
    sweep_defect = std::max(sweep_defect, sol.max_mass_defect);
  }
  const bool sweep_ok = neg == 0 && sweep_defect <= 1e-12;

  r.passed = oracle_ok && worst_defect <= 1e-12 && worst_min_entry >= 0.0 && sweep_ok;
  r.detail = "oracle err=" + fmt(err_coarse) + "/" + fmt(err_fine) +
             " ratio=" + fmt(ratio) + "; defect=" + fmt(std::max(worst_defect, sweep_defect)) +
             "; min entry=" + fmt(worst_min_entry) + "; negatives=" + std::to_string(neg);
  return r;
}

CriterionResult criterion_holmgren_duality(const VerifyOptions& opts) {
  CriterionResult r;
  r.index = 7;
  r.name = "duality-pairing";

  const int n = opts.quick ? 64 : 128;
  const int nt = opts.quick ? 16 : 32;
  const double T = 0.5;
  const int tuples = opts.quick ? 3 : 10;
  LevyMeasureSpec spec = LevyMeasureSpec::stable(0.5);
  Grid gc = Grid::make(1, n, T, nt);
  Grid gf = Grid::make(1, n, T, 2 * nt);
  DiscreteOperator opc = assemble_operator(spec, gc);
  DiscreteOperator opf = assemble_operator(spec, gf);

  // Time-varying coefficient sampled analytically on each time grid; the
  // half-period modulation keeps the leading O(dt) term from cancelling.
  auto duality_b = [&](const Grid& g, std::uint64_t s) {
    std::vector<double> psi = random_smooth_field(g, s);
    double m = sup_norm(psi);
    if (m == 0.0) m = 1.0;
    SpaceTimeField bf = SpaceTimeField::zeros(g.time_samples(), g.size(), "b");
    for (int k = 0; k <= g.time_steps; ++k) {
      const double mod = 0.25 * std::cos(std::numbers::pi * g.time(k) / g.horizon);
      for (int i = 0; i < g.size(); ++i) bf.at(k, i) = 0.65 + mod * psi[i] / m;
    }
    return make_drift(std::move(bf), g);
  };
  auto duality_m0 = [&](const Grid& g, std::uint64_t s) {
    std::vector<double> dens = scaled_random(g, s, 0.5);
    for (double& x : dens) x += 1.0;
    return DiscreteMeasure::from_density(g, dens);
  };

  double worst_exact = 0.0;
  std::vector<double> ratios;
  int window_viol = 0;
  for (int t = 0; t < tuples; ++t) {
    const std::uint64_t s = opts.seed + 1000 + 17 * static_cast<std::uint64_t>(t);
    DriftField bc = duality_b(gc, s);
    DriftField bf = duality_b(gf, s);
    DiscreteMeasure m0c = duality_m0(gc, s + 1);
    DiscreteMeasure m0f = duality_m0(gf, s + 1);
    std::vector<double> phi = random_smooth_field(gc, s + 2);
    const int t0 = nt / 2 + (t * 5) % (nt / 2);
    const double re_c =
        holmgren_residual(opc, bc, m0c, phi, t0, DualStepping::ExactAdjoint);
    const double re_f =
        holmgren_residual(opf, bf, m0f, phi, 2 * t0, DualStepping::ExactAdjoint);
    worst_exact = std::max({worst_exact, re_c, re_f});
    const double ri_c =
        holmgren_residual(opc, bc, m0c, phi, t0, DualStepping::Independent);
    const double ri_f =
        holmgren_residual(opf, bf, m0f, phi, 2 * t0, DualStepping::Independent);
    const double ratio = ri_c / std::max(ri_f, 1e-300);
    ratios.push_back(ratio);
    if (!(ratio > 1.3 && ratio < 3.2)) ++window_viol;
  }
  const double med = median_of(ratios);
  const bool exact_ok = worst_exact <= 1e-10;
  const bool ratio_ok = window_viol == 0 && med >= 1.5 && med <= 2.6;

  r.passed = exact_ok && ratio_ok;
  r.detail = "adjoint residual=" + fmt(worst_exact) + "; halving median=" + fmt(med) +
             " window viol=" + std::to_string(window_viol);
  return r;
}

CriterionResult criterion_dual_regularity(const VerifyOptions& opts) {
  CriterionResult r;
  r.index = 8;
  r.name = "dual-regularity-gain";

  const int n = opts.quick ? 256 : 1024;
  const int nt = opts.quick ? 128 : 1024;
  const double T = 0.5;
  Grid g = Grid::make(1, n, T, nt);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.1), g);

  // The design target 0.98 is calibrated so the measured exponent of the
  // synthesized coefficient lands near 0.9 at both verification scales.
  DriftField b = make_holder_drift(g, 0.98, 0.25, 1.0, opts.seed + 42);
  const double beta_hat = b.holder.exponent;
  const bool beta_ok = std::abs(beta_hat - 0.9) <= 0.07;

  // Smooth data, so the coefficient roughness is the only thing that could
  // degrade the regularity of the dual solution.
  std::vector<double> phi = random_smooth_field(g, opts.seed + 77, 5, 2.0);
  HolderFit phi_fit = measure_holder_exponent(phi, g);
  const bool phi_ok = phi_fit.exponent >= 0.9;

  DualOptions d;
  d.direction = DualDirection::BackwardFromT0;
  d.stepping = DualStepping::ExactAdjoint;
  d.t0_index = nt;
  DualSolution dual = solve_dual(op, b, phi, d);
  std::span<const double> w_slice = dual.w.slice(0);
  std::vector<double> w0(w_slice.begin(), w_slice.end());
  HolderFit w_fit = measure_holder_exponent(w0, g);

  const double floor_exp = beta_hat - 0.1 / 0.9 - 0.1;
  const bool gain_ok = !w_fit.degenerate && w_fit.exponent >= floor_exp;

  r.passed = beta_ok && phi_ok && gain_ok;
  r.detail = "drift exponent=" + fmt(beta_hat) + "; data exponent=" + fmt(phi_fit.exponent) +
             "; dual exponent=" + fmt(w_fit.exponent) + " floor=" + fmt(floor_exp) +
             " r2=" + fmt(w_fit.r2);
  return r;
}

CriterionResult criterion_mfg_example(const VerifyOptions& opts) {
  CriterionResult r;
  r.index = 9;
  r.name = "mfg-fixed-point";

  const int n = opts.quick ? 64 : 128;
  const int nt = opts.quick ? 16 : 32;
  const double T = 0.25;
  Grid g = Grid::make(1, n, T, nt);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.2), g);
  ConjugatePair pair = make_pair(PairKind::Power, PairParams{1.0, 0.1, 2.8});
  Coupling coupling = make_coupling(g, 0.125, 0.3, 0.0, 0.15, 0.0);
  std::vector<double> dens(n);
  for (int i = 0; i < n; ++i) dens[i] = 1.0 + 0.5 * std::cos(kTau * g.point(i));
  DiscreteMeasure m0 = DiscreteMeasure::from_density(g, dens);

  MfgOptions mo;
  mo.damping = 0.5;
  mo.tol = 1e-7;
  mo.max_iters = 300;
  MfgSolution sol = solve_mfg(op, pair, coupling, m0, mo);

  const bool conv_ok = sol.converged && !sol.increments.empty() &&
                       sol.increments.back() < 1e-6;
  const bool resid_ok = sol.residual_hjb < 1e-6 && sol.residual_fp < 1e-6;
  const bool regime_ok = sol.thresholds.mfg_unique == Verdict::Pass;
  const double qc = critical_q(0.1);
  const bool growth_ok = 2.8 < qc;

  UniquenessExperiment exp = uniqueness_experiment(op, pair, coupling, m0, mo, opts.seed);
  const bool agree_ok = exp.all_converged && exp.max_pairwise_tv < 1e-5 &&
                        exp.max_pairwise_u < 1e-5;

  r.passed = conv_ok && resid_ok && regime_ok && growth_ok && agree_ok;
  r.detail = "iters=" + std::to_string(sol.iterations) +
             " residuals=" + fmt(sol.residual_hjb) + "/" + fmt(sol.residual_fp) +
             "; margin=" + fmt(sol.thresholds.mfg_margin) + " qc=" + fmt(qc) +
             "; guesses tv=" + fmt(exp.max_pairwise_tv) + " u=" + fmt(exp.max_pairwise_u);
  return r;
}

CriterionResult criterion_monte_carlo(const VerifyOptions& opts) {
  CriterionResult r;
  r.index = 10;
  r.name = "mc-cross-validation";

  // Part one: particle histograms against the forward solver. Atoms sit on
  // the grid so the chain and the scheme share a lattice.
  const int n1 = 16;
  const int nt1 = 256;
  const double T1 = 0.5;
  const int paths = opts.quick ? 10000 : 100000;
  LevyMeasureSpec spec = LevyMeasureSpec::atomic({{0.25, 0.7}, {-0.3125, 0.5}});
  Grid g1 = Grid::make(1, n1, T1, nt1);
  DiscreteOperator op1 = assemble_operator(spec, g1);
  JumpSampler sampler = JumpSampler::make(spec);
  DriftField b1 = constant_drift(g1, 1.0);
  DiscreteMeasure m01 = DiscreteMeasure::point(g1, 0);
  FpSolution fp1 = solve_fp(op1, b1, m01);
  SdeSimulation sim =
      simulate_sde(g1, sampler, b1, m01, paths, opts.seed + 5, {nt1 / 2, nt1});
  const double tv_mid = tv_gap(sim.histograms[0].mass, fp1.m.slice(nt1 / 2));
  const double tv_end = tv_gap(sim.histograms[1].mass, fp1.m.slice(nt1));
  const double w1 = op1.total_weight;
  const double tol1 = 3.0 / std::sqrt(static_cast<double>(paths)) + 3.0 * w1 * w1 * T1 * g1.dt;
  const bool part1 = tv_mid <= tol1 && tv_end <= tol1;

  // Part two: sampled policies never beat the dynamic programming value.
  const int n2 = 32;
  const int nt2 = 128;
  const double T2 = 0.5;
  const int gpaths = opts.quick ? 1000 : 4000;
  Grid g2 = Grid::make(1, n2, T2, nt2);
  DiscreteOperator op2 = assemble_operator(spec, g2);
  ConjugatePair pair = make_pair(PairKind::Power, PairParams{1.0, 0.1, 2.0});
  std::vector<double> fprof = cosine_profile(g2, 0.3);
  std::vector<double> gprof = cosine_profile(g2, 0.2);
  SpaceTimeField f = time_constant_field(g2, fprof, "f");
  HjbSolution u = solve_hjb(op2, pair, f, gprof);
  DriftExtract drift = extract_drift(op2, pair, u.u);

  std::vector<SpaceTimeField> policies;
  policies.push_back(SpaceTimeField::constant(g2.time_samples(), n2, 0.0, "zeta-0"));
  policies.push_back(SpaceTimeField::constant(g2.time_samples(), n2, 0.3, "zeta-0.3"));
  policies.push_back(SpaceTimeField::constant(g2.time_samples(), n2, 1.0, "zeta-1"));
  policies.push_back(drift.b);
  std::vector<double> modprof(n2);
  for (int i = 0; i < n2; ++i) modprof[i] = 0.5 + 0.4 * std::cos(kTau * g2.point(i));
  policies.push_back(time_constant_field(g2, modprof, "zeta-cos"));

  std::span<const double> u0 = u.u.slice(0);
  const double sup_u0 = sup_norm(u0);
  const double w2 = op2.total_weight;
  int dp_viol = 0;
  double worst_excess = -1e300;
  double opt_gap = 0.0;
  auto dp_check = [&](const SpaceTimeField& pol, const GainEstimate& est) {
    const double cap = sup_norm(pol.values);
    const double tol2 = 3.0 * T2 * g2.dt * (2.0 * w2 * cap) * (2.0 * w2 * cap) *
                            std::max(1.0, sup_u0) +
                        1e-9;
    for (int i = 0; i < n2; ++i) {
      const double excess = est.mean[i] - u0[i] - 3.0 * est.std_error[i] - tol2;
      worst_excess = std::max(worst_excess, excess);
      if (excess > 0.0) ++dp_viol;
    }
  };
  for (std::size_t pi = 0; pi < policies.size(); ++pi) {
    GainEstimate est = estimate_gain(g2, sampler, policies[pi], f, gprof, pair, gpaths,
                                     opts.seed + 9 + pi);
    dp_check(policies[pi], est);
    if (pi == 3) {
      double gap = 0.0;
      for (int i = 0; i < n2; ++i) gap = std::max(gap, std::abs(u0[i] - est.mean[i]));
      opt_gap = gap;
    }
  }
  GainEstimate est_thin = estimate_gain(g2, sampler, policies[1], f, gprof, pair, gpaths,
                                        opts.seed + 99, TimeChangeMode::Thinning);
  dp_check(policies[1], est_thin);

  r.passed = part1 && dp_viol == 0;
  r.detail = "histogram tv=" + fmt(tv_mid) + "/" + fmt(tv_end) + " tol=" + fmt(tol1) +
             "; dp viol=" + std::to_string(dp_viol) + " worst excess=" + fmt(worst_excess) +
             "; opt-policy gap=" + fmt(opt_gap);
  return r;
}

std::vector<CriterionResult> run_criteria(const VerifyOptions& opts) {
  using Fn = std::function<CriterionResult()>;
  const std::vector<std::pair<std::string, Fn>> plan = {
      {"threshold-arithmetic", [&] { return criterion_threshold_arithmetic(); }},
      {"exponent-bootstrap", [&] { return criterion_bootstrap_recursion(); }},
      {"operator-spectral-convergence", [&] { return criterion_operator_convergence(opts); }},
      {"operator-norm-bounds", [&] { return criterion_operator_bounds(opts); }},
      {"hjb-monotone-contract", [&] { return criterion_hjb_contract(opts); }},
      {"fp-positivity-oracle", [&] { return criterion_fp_contract(opts); }},
      {"duality-pairing", [&] { return criterion_holmgren_duality(opts); }},
      {"dual-regularity-gain", [&] { return criterion_dual_regularity(opts); }},
      {"mfg-fixed-point", [&] { return criterion_mfg_example(opts); }},
      {"mc-cross-validation", [&] { return criterion_monte_carlo(opts); }},
  };
  std::vector<CriterionResult> out;
  out.reserve(plan.size());
  int index = 1;
  for (const auto& [name, fn] : plan) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult res;
    try {
      res = fn();
    } catch (const std::exception& e) {
      res.passed = false;
      res.detail = std::string("exception: ") + e.what();
    }
    const auto stop = std::chrono::steady_clock::now();
    res.index = index++;
    res.name = name;
    res.seconds = std::chrono::duration<double>(stop - start).count();
    out.push_back(std::move(res));
  }
  return out;
}

nlohmann::ordered_json criteria_json(const std::vector<CriterionResult>& results,
                                     bool include_timings) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  int passed = 0;
  for (const CriterionResult& r : results) {
    nlohmann::ordered_json item;
    item["index"] = r.index;
    item["name"] = r.name;
    item["passed"] = r.passed;
    item["detail"] = r.detail;
    if (include_timings) item["seconds"] = r.seconds;
    arr.push_back(std::move(item));
    if (r.passed) ++passed;
  }
  nlohmann::ordered_json j;
  j["criteria"] = std::move(arr);
  j["passed"] = passed;
  j["failed"] = static_cast<int>(results.size()) - passed;
  j["all_passed"] = passed == static_cast<int>(results.size());
  return j;
}

}  // namespace levymfg
