#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "levymfg/errors.hpp"
#include "levymfg/fp.hpp"
#include "levymfg/grid.hpp"
#include "levymfg/hamiltonian.hpp"
#include "levymfg/levy.hpp"
#include "levymfg/numerics.hpp"
#include "levymfg/sde_mc.hpp"

using namespace levymfg;

namespace {
constexpr double kTau = 2.0 * std::numbers::pi;

struct ThreadEnvGuard {
  std::string saved;
  bool had = false;
  ThreadEnvGuard() {
    const char* cur = std::getenv("LEVY_MFG_THREADS");
    if (cur != nullptr) {
      had = true;
      saved = cur;
    }
  }
  ~ThreadEnvGuard() {
    if (had) {
      setenv("LEVY_MFG_THREADS", saved.c_str(), 1);
    } else {
      unsetenv("LEVY_MFG_THREADS");
    }
  }
};
}  // namespace

TEST_CASE("rng streams are deterministic and distinct") {
  SplitMix64 a(42, 7);
  SplitMix64 b(42, 7);
  SplitMix64 c(42, 8);
  bool any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    if (va != c.next_u64()) any_diff = true;
  }
  CHECK(any_diff);
  SplitMix64 d(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = d.next_double();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("atomic jump sampling reproduces the atom masses") {
  LevyMeasureSpec spec = LevyMeasureSpec::atomic({{0.25, 0.7}, {-0.3125, 0.5}});
  JumpSampler sampler = JumpSampler::make(spec);
  CHECK(sampler.compound_poisson);
  CHECK(sampler.intensity == doctest::Approx(1.2));

  SplitMix64 rng(9, 0);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const double z = sampler.sample_jump(rng);
    if (z == 0.25) {
      ++hits;
    } else {
      CHECK(z == -0.3125);
    }
  }
  const double freq = static_cast<double>(hits) / n;
  CHECK(std::abs(freq - 0.7 / 1.2) <= 0.006);
}

TEST_CASE("symmetric bounded jumps have zero-mean increments") {
  LevyMeasureSpec spec = LevyMeasureSpec::bounded_uniform(0.25, 2.0);
  JumpSampler sampler = JumpSampler::make(spec);
  SplitMix64 rng(31, 0);
  const int n = 200000;
  KahanSum sum, sumsq;
  for (int i = 0; i < n; ++i) {
    const double x = sampler.increment(0.5, rng);
    sum.add(x);
    sumsq.add(x * x);
  }
  const double mean = sum.value() / n;
  const double var = sumsq.value() / n - mean * mean;
  CHECK(var > 0.0);
  CHECK(std::abs(mean) <= 4.0 * std::sqrt(var / n) + 1e-12);
}

TEST_CASE("stable increments match the characteristic function") {
  LevyMeasureSpec spec = LevyMeasureSpec::stable(0.5);
  JumpSampler sampler = JumpSampler::make(spec);
  CHECK_FALSE(sampler.compound_poisson);
  SplitMix64 rng(17, 0);
  const int n = 200000;
  const double d = 0.3;
  KahanSum acc;
  for (int i = 0; i < n; ++i) acc.add(std::cos(kTau * sampler.increment(d, rng)));
  const double measured = acc.value() / n;
  const double target = std::exp(-d * std::pow(kTau, 0.5));
  CHECK(std::abs(measured - target) <= 0.006);
}

TEST_CASE("tempered sampler is consistent with its own jump table") {
  LevyMeasureSpec spec = LevyMeasureSpec::tempered_stable(0.5, 3.0);
  JumpSampler sampler = JumpSampler::make(spec);
  CHECK(sampler.compound_poisson);
  CHECK(sampler.discretized);
  CHECK(sampler.small_jump_cutoff > 0.0);
  CHECK(sampler.jump_cum.back() == doctest::Approx(sampler.intensity));

  // The table masses are interval integrals of the density up to the table
  // radius; their sum telescopes to the one-shot integral.
  const double z_hi = 1.0 + 60.0 / 3.0;
  const double quad = spec.interval_mass(sampler.small_jump_cutoff, z_hi) +
                      spec.interval_mass(-z_hi, -sampler.small_jump_cutoff);
  CHECK(sampler.intensity == doctest::Approx(quad).epsilon(1e-9));

  // Compound Poisson characteristic function computed from the same table.
  double gen = 0.0;
  double prev = 0.0;
  for (std::size_t j = 0; j < sampler.jump_values.size(); ++j) {
    const double mass = sampler.jump_cum[j] - prev;
    prev = sampler.jump_cum[j];
    gen += mass * (std::cos(kTau * sampler.jump_values[j]) - 1.0);
  }
  const double d = 0.4;
  const double target = std::exp(d * gen);
  SplitMix64 rng(23, 0);
  const int n = 200000;
  KahanSum acc;
  for (int i = 0; i < n; ++i) acc.add(std::cos(kTau * sampler.increment(d, rng)));
  CHECK(std::abs(acc.value() / n - target) <= 0.008);
}

TEST_CASE("histograms are bitwise independent of the worker count") {
  ThreadEnvGuard guard;
  Grid g = Grid::make(1, 16, 0.5, 32);
  JumpSampler sampler =
      JumpSampler::make(LevyMeasureSpec::atomic({{0.25, 0.7}, {-0.3125, 0.5}}));
  DriftField b = constant_drift(g, 1.0);
  DiscreteMeasure m0 = DiscreteMeasure::point(g, 0);

  setenv("LEVY_MFG_THREADS", "1", 1);
  SdeSimulation one = simulate_sde(g, sampler, b, m0, 20000, 77);
  setenv("LEVY_MFG_THREADS", "4", 1);
  SdeSimulation four = simulate_sde(g, sampler, b, m0, 20000, 77);
  CHECK(four.workers >= 1);
  REQUIRE(one.counts.size() == four.counts.size());
  for (std::size_t k = 0; k < one.counts.size(); ++k) {
    REQUIRE(one.counts[k].size() == four.counts[k].size());
    for (std::size_t i = 0; i < one.counts[k].size(); ++i) {
      CHECK(one.counts[k][i] == four.counts[k][i]);
    }
  }

  SdeSimulation again = simulate_sde(g, sampler, b, m0, 20000, 77);
  SdeSimulation other = simulate_sde(g, sampler, b, m0, 20000, 78);
  bool identical_other = true;
  for (std::size_t k = 0; k < again.counts.size(); ++k) {
    for (std::size_t i = 0; i < again.counts[k].size(); ++i) {
      CHECK(again.counts[k][i] == four.counts[k][i]);
      if (again.counts[k][i] != other.counts[k][i]) identical_other = false;
    }
  }
  CHECK_FALSE(identical_other);
}

TEST_CASE("thinning and duration scaling agree on compound poisson specs") {
  Grid g = Grid::make(1, 16, 0.5, 64);
  LevyMeasureSpec spec = LevyMeasureSpec::atomic({{0.25, 0.7}, {-0.3125, 0.5}});
  JumpSampler sampler = JumpSampler::make(spec);
  DriftField b = constant_drift(g, 1.0);
  DiscreteMeasure m0 = DiscreteMeasure::point(g, 0);
  const int paths = 40000;

  SdeSimulation dur = simulate_sde(g, sampler, b, m0, paths, 5, {g.time_steps},
                                   TimeChangeMode::DurationScaling);
  SdeSimulation thin = simulate_sde(g, sampler, b, m0, paths, 6, {g.time_steps},
                                    TimeChangeMode::Thinning);

  DiscreteOperator op = assemble_operator(spec, g);
  FpSolution fp = solve_fp(op, b, m0);
  DiscreteMeasure ref{std::vector<double>(fp.m.slice(g.time_steps).begin(),
                                          fp.m.slice(g.time_steps).end())};
  CHECK(total_variation_distance(dur.histograms.back(), ref) <= 0.03);
  CHECK(total_variation_distance(thin.histograms.back(), ref) <= 0.03);
  CHECK(total_variation_distance(dur.histograms.back(), thin.histograms.back()) <= 0.04);
}

TEST_CASE("thinning rejects specs without a finite jump rate") {
  Grid g = Grid::make(1, 16, 0.5, 32);
  JumpSampler sampler = JumpSampler::make(LevyMeasureSpec::stable(0.5));
  DriftField b = constant_drift(g, 1.0);
  DiscreteMeasure m0 = DiscreteMeasure::uniform(g);
  CHECK_THROWS_AS(
      simulate_sde(g, sampler, b, m0, 100, 1, {}, TimeChangeMode::Thinning),
      ValidationError);
}

TEST_CASE("zero policy makes the gain deterministic") {
  Grid g = Grid::make(1, 32, 0.5, 16);
  JumpSampler sampler = JumpSampler::make(LevyMeasureSpec::stable(0.5));
  ConjugatePair pair = make_pair(PairKind::Power);
  SpaceTimeField zeta = SpaceTimeField::constant(g.time_samples(), g.size(), 0.0, "zeta");
  SpaceTimeField f = SpaceTimeField::constant(g.time_samples(), g.size(), 0.4, "f");
  std::vector<double> gterm(g.size());
  for (int i = 0; i < g.size(); ++i) gterm[i] = 0.2 * std::cos(kTau * g.point(i));

  GainEstimate est = estimate_gain(g, sampler, zeta, f, gterm, pair, 500, 3);
  for (int i = 0; i < g.size(); ++i) {
    CHECK(std::abs(est.mean[i] - (0.5 * 0.4 + gterm[i])) <= 1e-12);
    CHECK(est.std_error[i] <= 1e-7);
  }

  GainEstimate rerun = estimate_gain(g, sampler, zeta, f, gterm, pair, 500, 3);
  for (int i = 0; i < g.size(); ++i) CHECK(est.mean[i] == rerun.mean[i]);
}

TEST_CASE("gain estimation rejects policies outside the cost domain") {
  Grid g = Grid::make(1, 32, 0.5, 8);
  JumpSampler sampler = JumpSampler::make(LevyMeasureSpec::stable(0.5));
  ConjugatePair pair = make_pair(PairKind::Linear);  // L finite only at kappa
  SpaceTimeField zeta = SpaceTimeField::constant(g.time_samples(), g.size(), 0.5, "zeta");
  SpaceTimeField f = SpaceTimeField::constant(g.time_samples(), g.size(), 0.0, "f");
  std::vector<double> gterm(g.size(), 0.0);
  CHECK_THROWS_AS(estimate_gain(g, sampler, zeta, f, gterm, pair, 10, 1),
                  ValidationError);
}

TEST_CASE("time change and amplitude control give the same hamiltonian") {
  Grid g = Grid::make(1, 64, 0.25, 8);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
  ConjugatePair pair = make_pair(PairKind::Power);
  std::vector<double> u(g.size());
  for (int i = 0; i < g.size(); ++i) u[i] = 0.5 * std::cos(kTau * g.point(i));
  SelfSimilarReport rep = check_selfsimilar_equivalence(op, pair, u);
  CHECK(rep.ok);
  CHECK(rep.max_gap <= rep.tolerance);
  CHECK(rep.max_gap_vs_F <= rep.tolerance);
  CHECK(rep.samples >= 100);
}

TEST_CASE("worker count respects bounds from the environment") {
  ThreadEnvGuard guard;
  setenv("LEVY_MFG_THREADS", "99", 1);
  CHECK(mc_worker_count() == 64);
  setenv("LEVY_MFG_THREADS", "1", 1);
  CHECK(mc_worker_count() == 1);
  setenv("LEVY_MFG_THREADS", "abc", 1);
  const int fallback = mc_worker_count();
  CHECK(fallback >= 1);
  CHECK(fallback <= 64);
}
