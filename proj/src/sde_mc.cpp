#include "levymfg/sde_mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

#include "levymfg/errors.hpp"

namespace levymfg {

namespace {

constexpr double kInfGuard = 1e300;

double wrap01(double x) {
  double w = x - std::floor(x);
  if (w >= 1.0) w = 0.0;  // x just below an integer can round up
  return w;
}

// Periodic linear interpolation of a grid function at x in [0, 1).
double interp_periodic(std::span<const double> v, double x) {
  const int n = static_cast<int>(v.size());
  double pos = x * n;
  int i0 = static_cast<int>(std::floor(pos));
  double frac = pos - i0;
  i0 %= n;
  if (i0 < 0) i0 += n;
  int i1 = i0 + 1 == n ? 0 : i0 + 1;
  return v[i0] * (1.0 - frac) + v[i1] * frac;
}

int histogram_bin(double x, int n) {
  long long j = std::llround(x * n);
  j %= n;
  if (j < 0) j += n;
  return static_cast<int>(j);
}

void run_chunked(int total, int workers,
                 const std::function<void(int, int)>& body) {
  workers = std::max(1, std::min(workers, total));
  if (workers == 1) {
    body(0, total);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  int chunk = (total + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    int lo = w * chunk;
    int hi = std::min(total, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, &errors, w, lo, hi] {
      try {
        body(lo, hi);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<double> cumulative_masses(const DiscreteMeasure& m0) {
  std::vector<double> cum(m0.mass.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < m0.mass.size(); ++i) {
    if (!(m0.mass[i] >= 0.0)) {
      throw ValidationError("sde: initial measure has a negative entry");
    }
    acc += m0.mass[i];
    cum[i] = acc;
  }
  if (std::abs(acc - 1.0) > 1e-9) {
    throw ValidationError("sde: initial measure must have unit total mass");
  }
  return cum;
}

int sample_index(const std::vector<double>& cum, SplitMix64& rng) {
  double u = rng.next_double() * cum.back();
  auto it = std::upper_bound(cum.begin(), cum.end(), u);
  if (it == cum.end()) --it;
  return static_cast<int>(it - cum.begin());
}

}  // namespace

int mc_worker_count() {
  if (const char* env = std::getenv("LEVY_MFG_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<int>(std::min(v, 64L));
  }
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  return static_cast<int>(std::min(hw, 8u));
}

JumpSampler JumpSampler::make(const LevyMeasureSpec& spec) {
  JumpSampler s{spec, false, false, 0.0, 0.0, {}, {}};
  switch (spec.kind()) {
    case LevyKind::Stable:
      s.compound_poisson = false;
      return s;
    case LevyKind::Atomic: {
      s.compound_poisson = true;
      double acc = 0.0;
      for (const Atom& a : spec.atoms()) {
        s.jump_values.push_back(a.location);
        acc += a.mass;
        s.jump_cum.push_back(acc);
      }
      s.intensity = acc;
      return s;
    }
    case LevyKind::BoundedUniform:
      s.compound_poisson = true;
      s.intensity = spec.total_mass();
      return s;
    case LevyKind::TemperedStable: {
      // Discretize the jump law away from a small-jump cutoff. The neglected
      // part has total variation O(cutoff^(1 - 2s)) in the driven positions.
      s.compound_poisson = true;
      s.discretized = true;
      s.small_jump_cutoff = 1e-3;
      const double z_min = s.small_jump_cutoff;
      const double z_max = std::max(2.0 * z_min, 1.0 + 60.0 / spec.lambda());
      const int bins = 240;
      const double ratio = std::pow(z_max / z_min, 1.0 / bins);
      double acc = 0.0;
      std::vector<double> pos_vals, pos_mass;
      double a = z_min;
      for (int bi = 0; bi < bins; ++bi) {
        double b = bi + 1 == bins ? z_max : a * ratio;
        double mass = spec.interval_mass(a, b);
        if (mass > 0.0) {
          pos_vals.push_back(0.5 * (a + b));
          pos_mass.push_back(mass);
        }
        a = b;
      }
      for (std::size_t i = 0; i < pos_vals.size(); ++i) {
        s.jump_values.push_back(-pos_vals[pos_vals.size() - 1 - i]);
        acc += pos_mass[pos_vals.size() - 1 - i];
        s.jump_cum.push_back(acc);
      }
      for (std::size_t i = 0; i < pos_vals.size(); ++i) {
        s.jump_values.push_back(pos_vals[i]);
        acc += pos_mass[i];
        s.jump_cum.push_back(acc);
      }
      s.intensity = acc;
      return s;
    }
  }
  throw ValidationError("sde: unsupported measure kind for sampling");
}

double JumpSampler::sample_jump(SplitMix64& rng) const {
  if (!compound_poisson) {
    throw ValidationError("sde: sample_jump requires a compound-Poisson sampler");
  }
  if (spec.kind() == LevyKind::BoundedUniform) {
    return rng.uniform(-spec.radius(), spec.radius());
  }
  double u = rng.next_double() * intensity;
  auto it = std::upper_bound(jump_cum.begin(), jump_cum.end(), u);
  std::size_t idx = it == jump_cum.end() ? jump_cum.size() - 1
                                         : static_cast<std::size_t>(it - jump_cum.begin());
  return jump_values[idx];
}

double JumpSampler::increment(double duration, SplitMix64& rng) const {
  if (!(duration >= 0.0)) {
    throw ValidationError("sde: increment duration must be nonnegative");
  }
  if (duration == 0.0) return 0.0;
  if (compound_poisson) {
    int jumps = rng.poisson(intensity * duration);
    double dx = 0.0;
    for (int j = 0; j < jumps; ++j) dx += sample_jump(rng);
    return dx;
  }
  // Chambers-Mallows-Stuck draw of a symmetric 2s-stable variable with
  // characteristic function exp(-|xi|^(2s)), scaled by duration^(1/(2s)).
  const double alpha = spec.two_sigma();
  double theta = std::numbers::pi * (rng.next_double() - 0.5);
  double e = std::max(rng.exponential(), 1e-300);
  double ct = std::max(std::cos(theta), 1e-300);
  double x = std::sin(alpha * theta) / std::pow(ct, 1.0 / alpha) *
             std::pow(std::cos((1.0 - alpha) * theta) / e, (1.0 - alpha) / alpha);
  double dx = std::pow(duration, 1.0 / alpha) * x;
  // Overflow means the path wraps the torus astronomically many times; its
  // wrapped position carries no information, so land anywhere.
  if (!std::isfinite(dx)) return 0.0;
  return dx;
}

namespace {

void check_mode(const JumpSampler& sampler, TimeChangeMode mode) {
  if (mode == TimeChangeMode::Thinning && !sampler.compound_poisson) {
    throw ValidationError("sde: thinning requires a compound-Poisson sampler");
  }
}

void check_rate_field(const SpaceTimeField& field, const Grid& grid,
                      const char* what) {
  if (field.space_points != grid.points ||
      field.time_slices < grid.time_steps) {
    throw ValidationError(std::string("sde: ") + what +
                          " field shape does not match the grid");
  }
  for (double v : field.values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError(std::string("sde: ") + what +
                            " field must be finite and nonnegative");
    }
  }
}

// One macro step of the time-changed Euler scheme, rate frozen at the step's
// left endpoint.
double step_position(const JumpSampler& sampler, TimeChangeMode mode, double x,
                     double rate, double rate_cap, double dt, SplitMix64& rng) {
  double dx = 0.0;
  if (mode == TimeChangeMode::DurationScaling) {
    dx = sampler.increment(rate * dt, rng);
  } else {
    int candidates = rng.poisson(sampler.intensity * rate_cap * dt);
    for (int c = 0; c < candidates; ++c) {
      double z = sampler.sample_jump(rng);
      if (rng.next_double() * rate_cap < rate) dx += z;
    }
  }
  return wrap01(x + dx);
}

}  // namespace

SdeSimulation simulate_sde(const Grid& grid, const JumpSampler& sampler,
                           const DriftField& b, const DiscreteMeasure& m0,
                           int n_paths, std::uint64_t seed,
                           std::vector<int> time_indices, TimeChangeMode mode) {
  if (n_paths < 1) throw ValidationError("sde: n_paths must be at least 1");
  if (m0.size() != grid.points) {
    throw ValidationError("sde: initial measure size does not match the grid");
  }
  check_mode(sampler, mode);
  check_rate_field(b.values, grid, "drift");

  if (time_indices.empty()) time_indices = {0, grid.time_steps};
  std::sort(time_indices.begin(), time_indices.end());
  time_indices.erase(std::unique(time_indices.begin(), time_indices.end()),
                     time_indices.end());
  for (int k : time_indices) {
    if (k < 0 || k > grid.time_steps) {
      throw ValidationError("sde: requested time index outside [0, n_t]");
    }
  }
  std::vector<int> record_slot(grid.time_steps + 1, -1);
  for (std::size_t s = 0; s < time_indices.size(); ++s) {
    record_slot[time_indices[s]] = static_cast<int>(s);
  }

  const std::vector<double> cum = cumulative_masses(m0);
  const int n = grid.points;
  const int nt = grid.time_steps;
  const double dt = grid.dt;
  double rate_cap = 0.0;
  for (double v : b.values.values) rate_cap = std::max(rate_cap, v);
  if (rate_cap == 0.0) rate_cap = 1.0;  // only scales thinning candidates

  const int n_times = static_cast<int>(time_indices.size());
  std::vector<int> path_bins(static_cast<std::size_t>(n_times) * n_paths, 0);

  const int workers = mc_worker_count();
  run_chunked(n_paths, workers, [&](int lo, int hi) {
    for (int p = lo; p < hi; ++p) {
      SplitMix64 rng(seed, static_cast<std::uint64_t>(p));
      double x = grid.point(sample_index(cum, rng));
      if (record_slot[0] >= 0) {
        path_bins[static_cast<std::size_t>(record_slot[0]) * n_paths + p] =
            histogram_bin(x, n);
      }
      for (int k = 0; k < nt; ++k) {
        double rate = interp_periodic(b.values.slice(k), x);
        x = step_position(sampler, mode, x, rate, rate_cap, dt, rng);
        if (!std::isfinite(x)) {
          throw NumericalError("sde: path position became non-finite");
        }
        if (record_slot[k + 1] >= 0) {
          path_bins[static_cast<std::size_t>(record_slot[k + 1]) * n_paths + p] =
              histogram_bin(x, n);
        }
      }
    }
  });

  SdeSimulation out;
  out.grid = grid;
  out.time_indices = time_indices;
  out.n_paths = n_paths;
  out.seed = seed;
  out.workers = workers;
  out.mode = mode;
  out.counts.assign(n_times, std::vector<long long>(n, 0));
  for (int s = 0; s < n_times; ++s) {
    for (int p = 0; p < n_paths; ++p) {
      ++out.counts[s][path_bins[static_cast<std::size_t>(s) * n_paths + p]];
    }
    DiscreteMeasure hist;
    hist.mass.resize(n);
    for (int i = 0; i < n; ++i) {
      hist.mass[i] = static_cast<double>(out.counts[s][i]) / n_paths;
    }
    out.histograms.push_back(std::move(hist));
  }
  return out;
}

GainEstimate estimate_gain(const Grid& grid, const JumpSampler& sampler,
                           const SpaceTimeField& zeta, const SpaceTimeField& f,
                           std::span<const double> g, const ConjugatePair& pair,
                           int n_paths, std::uint64_t seed, TimeChangeMode mode) {
  if (n_paths < 2) throw ValidationError("sde: n_paths must be at least 2");
  check_mode(sampler, mode);
  check_rate_field(zeta, grid, "policy");
  if (f.space_points != grid.points || f.time_slices < grid.time_steps) {
    throw ValidationError("sde: running gain field shape does not match the grid");
  }
  if (static_cast<int>(g.size()) != grid.points) {
    throw ValidationError("sde: terminal gain size does not match the grid");
  }
  for (double v : zeta.values) {
    if (!(pair.L(v) < kInfGuard)) {
      throw ValidationError(
          "sde: running cost L is infinite at a policy grid value");
    }
  }

  const int n = grid.points;
  const int nt = grid.time_steps;
  const double dt = grid.dt;
  double rate_cap = 0.0;
  for (double v : zeta.values) rate_cap = std::max(rate_cap, v);
  if (rate_cap == 0.0) rate_cap = 1.0;

  GainEstimate out;
  out.mean.assign(n, 0.0);
  out.std_error.assign(n, 0.0);
  out.n_paths = n_paths;
  out.seed = seed;
  out.mode = mode;

  const int workers = mc_worker_count();
  run_chunked(n, workers, [&](int lo, int hi) {
    std::vector<double> gains(n_paths);
    for (int i = lo; i < hi; ++i) {
      for (int p = 0; p < n_paths; ++p) {
        SplitMix64 rng(seed, static_cast<std::uint64_t>(i) * n_paths + p);
        double x = grid.point(i);
        KahanSum gain;
        for (int k = 0; k < nt; ++k) {
          double zv = interp_periodic(zeta.slice(k), x);
          double lv = pair.L(zv);
          if (!(lv < kInfGuard)) {
            throw NumericalError(
                "sde: running cost L infinite at a visited policy value");
          }
          gain.add(dt * (interp_periodic(f.slice(k), x) - lv));
          x = step_position(sampler, mode, x, zv, rate_cap, dt, rng);
        }
        gain.add(interp_periodic(g, x));
        gains[p] = gain.value();
      }
      double mean = kahan_total(gains) / n_paths;
      KahanSum ss;
      for (double gv : gains) ss.add((gv - mean) * (gv - mean));
      out.mean[i] = mean;
      out.std_error[i] = std::sqrt(ss.value() / (n_paths - 1.0) / n_paths);
    }
  });
  return out;
}

SelfSimilarReport check_selfsimilar_equivalence(const DiscreteOperator& op,
                                                const ConjugatePair& pair,
                                                std::span<const double> u,
                                                double zeta_max, int samples) {
  if (!(op.two_sigma > 0.0)) {
    throw ValidationError(
        "sde: self-similar equivalence requires a stable-order operator");
  }
  if (!(zeta_max > 0.0) || samples < 16) {
    throw ValidationError("sde: zeta_max must be positive and samples >= 16");
  }
  std::vector<double> lu = apply_operator(op, u);

  // Control grids: zeta uniform on [0, zeta_max]; lambda log-spaced (plus 0)
  // so that its image under lambda -> lambda^(2s) also resolves small rates.
  const double s2 = op.two_sigma;
  const double zeta_min_img = zeta_max * 1e-9;
  std::vector<double> zg(samples), zval(samples);
  for (int j = 0; j < samples; ++j) {
    zg[j] = zeta_max * j / (samples - 1.0);
    zval[j] = pair.L(zg[j]);
  }
  std::vector<double> img(samples), ival(samples);
  img[0] = 0.0;
  ival[0] = pair.L(0.0);
  const double lam_lo = std::pow(zeta_min_img, 1.0 / s2);
  const double lam_hi = std::pow(zeta_max, 1.0 / s2);
  const double lam_ratio = std::pow(lam_hi / lam_lo, 1.0 / (samples - 2.0));
  for (int j = 1; j < samples; ++j) {
    double lam = lam_lo * std::pow(lam_ratio, j - 1.0);
    img[j] = std::pow(lam, s2);
    ival[j] = pair.L(img[j]);
  }

  SelfSimilarReport rep;
  rep.zeta_max = zeta_max;
  rep.samples = samples;
  rep.sup_zeta.resize(lu.size());
  rep.sup_lambda.resize(lu.size());
  for (std::size_t i = 0; i < lu.size(); ++i) {
    double sz = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < samples; ++j) {
      if (zval[j] >= kInfGuard) continue;
      sz = std::max(sz, zg[j] * lu[i] - zval[j]);
    }
    double sl = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < samples; ++j) {
      if (ival[j] >= kInfGuard) continue;
      sl = std::max(sl, img[j] * lu[i] - ival[j]);
    }
    rep.sup_zeta[i] = sz;
    rep.sup_lambda[i] = sl;
    rep.max_gap = std::max(rep.max_gap, std::abs(sz - sl));
    double fv = pair.F(lu[i]);
    if (std::isfinite(fv)) {
      rep.max_gap_vs_F = std::max(rep.max_gap_vs_F, std::abs(sz - fv));
    }
  }

  // Resolution bound: missing the argmax by one bracket costs at most the
  // local Lipschitz constant of zeta -> zeta * Lu - L(zeta) times the bracket.
  double lip_l = 0.0;
  for (int j = 0; j + 1 < samples; ++j) {
    if (zval[j] >= kInfGuard || zval[j + 1] >= kInfGuard) continue;
    lip_l = std::max(lip_l, std::abs(zval[j + 1] - zval[j]) /
                                (zg[j + 1] - zg[j]));
  }
  double gap_res = zg[1] - zg[0];
  for (int j = 0; j + 1 < samples; ++j) {
    gap_res = std::max(gap_res, img[j + 1] - img[j]);
  }
  rep.tolerance = (sup_norm(lu) + lip_l) * gap_res + 1e-10;
  rep.ok = rep.max_gap <= rep.tolerance;
  return rep;
}

}  // namespace levymfg
