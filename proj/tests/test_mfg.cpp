#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "levymfg/errors.hpp"
#include "levymfg/fp.hpp"
#include "levymfg/grid.hpp"
#include "levymfg/hamiltonian.hpp"
#include "levymfg/levy.hpp"
#include "levymfg/mfg.hpp"
#include "levymfg/numerics.hpp"

using namespace levymfg;

namespace {
constexpr double kTau = 2.0 * std::numbers::pi;

DiscreteMeasure bump_measure(const Grid& g, double phase = 0.0) {
  std::vector<double> dens(g.size());
  for (int i = 0; i < g.size(); ++i) {
    dens[i] = 1.0 + 0.5 * std::cos(kTau * g.point(i) + phase);
  }
  return DiscreteMeasure::from_density(g, dens);
}
}  // namespace

TEST_CASE("coupling kernel is an even certified mollifier") {
  Grid g = Grid::make(1, 64, 0.25, 16);
  Coupling c = make_coupling(g, 0.125, 0.3, 0.1, 0.15, -0.05);
  const double h = g.spacing;

  KahanSum rho_sum;
  for (double r : c.rho) {
    CHECK(r >= 0.0);
    rho_sum.add(r);
  }
  CHECK(std::abs(h * rho_sum.value() - 1.0) <= 1e-12);
  for (int j = 1; j < g.size(); ++j) {
    CHECK(c.rho[j] == doctest::Approx(c.rho[g.size() - j]).epsilon(1e-12));
    CHECK(c.kernel[j] == doctest::Approx(c.kernel[g.size() - j]).epsilon(1e-12));
  }
  CHECK(c.min_kernel_dft >= 0.0);
  CHECK(c.data_bound == doctest::Approx(c.bound_f + c.bound_g));

  // On the uniform measure the convolution averages to one, so f and g
  // collapse to amplitude + offset.
  DiscreteMeasure u = DiscreteMeasure::uniform(g);
  std::vector<double> f = c.apply_f(u.mass);
  std::vector<double> gv = c.apply_g(u.mass);
  for (int i = 0; i < g.size(); ++i) {
    CHECK(std::abs(f[i] - 0.4) <= 1e-12);
    CHECK(std::abs(gv[i] - 0.1) <= 1e-12);
  }
}

TEST_CASE("coupling construction validates parameters") {
  Grid g = Grid::make(1, 64, 0.25, 16);
  CHECK_THROWS_AS(make_coupling(g, 0.0, 1.0, 0.0, 1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(make_coupling(g, 0.3, 1.0, 0.0, 1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(make_coupling(g, 0.125, -0.2, 0.0, 1.0, 0.0), ValidationError);
}

TEST_CASE("monotonicity pairing is nonnegative by construction") {
  Grid g = Grid::make(1, 64, 0.25, 16);
  Coupling c = make_coupling(g, 0.0625, 0.5, 0.0, 0.25, 0.0);
  for (int r = 0; r < 6; ++r) {
    DiscreteMeasure m1 = bump_measure(g, 0.7 * r);
    DiscreteMeasure m2 = bump_measure(g, 1.3 * r + 0.4);
    CHECK(coupling_pairing(c, m1, m2) >= -1e-12);
  }
  DiscreteMeasure m = bump_measure(g, 0.2);
  CHECK(std::abs(coupling_pairing(c, m, m)) <= 1e-15);
}

TEST_CASE("zero coupling amplitude collapses to the uncoupled solution") {
  Grid g = Grid::make(1, 64, 0.25, 16);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.2), g);
  ConjugatePair pair = make_pair(PairKind::Power);
  Coupling c = make_coupling(g, 0.125, 0.0, 0.3, 0.0, 0.15);
  DiscreteMeasure m0 = bump_measure(g);
  MfgSolution sol = solve_mfg(op, pair, c, m0);

  CHECK(sol.converged);
  CHECK(sol.iterations <= 2);
  CHECK(sol.sup_b == 0.0);
  for (int k = 0; k <= g.time_steps; ++k) {
    for (int i = 0; i < g.size(); ++i) {
      CHECK(std::abs(sol.m.at(k, i) - m0.mass[i]) <= 1e-15);
      const double expect = 0.15 + 0.3 * (g.horizon - g.time(k));
      CHECK(std::abs(sol.u.at(k, i) - expect) <= 1e-12);
    }
  }
}

TEST_CASE("fixed point iteration converges inside the uniqueness regime") {
  Grid g = Grid::make(1, 64, 0.25, 16);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.2), g);
  PairParams params;
  params.q = 2.8;
  ConjugatePair pair = make_pair(PairKind::Power, params);
  Coupling c = make_coupling(g, 0.125, 0.3, 0.0, 0.15, 0.0);
  DiscreteMeasure m0 = bump_measure(g);
  MfgOptions opts;
  opts.max_iters = 300;
  MfgSolution sol = solve_mfg(op, pair, c, m0, opts);

  CHECK(sol.converged);
  CHECK(sol.increments.back() < 1e-6);
  CHECK(sol.residual_hjb < 1e-6);
  CHECK(sol.residual_fp < 1e-6);
  CHECK(sol.thresholds.mfg_unique == Verdict::Pass);
  CHECK(sol.sup_b > 0.0);
  for (double v : sol.b.values) CHECK(v >= 0.0);

  SConditionsReport rep = check_S_conditions(op, pair, c, m0, sol);
  CHECK(rep.s1_ok);
  CHECK(rep.s2_ok);
  CHECK(rep.s3_ok);
  CHECK(rep.s4_ok);
  CHECK_FALSE(rep.s2_gaps.empty());
}

TEST_CASE("independent initial guesses land on the same solution") {
  Grid g = Grid::make(1, 64, 0.25, 16);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.2), g);
  PairParams params;
  params.q = 2.8;
  ConjugatePair pair = make_pair(PairKind::Power, params);
  Coupling c = make_coupling(g, 0.125, 0.3, 0.0, 0.15, 0.0);
  DiscreteMeasure m0 = bump_measure(g);
  MfgOptions opts;
  opts.max_iters = 300;
  UniquenessExperiment exp = uniqueness_experiment(op, pair, c, m0, opts, 5);

  CHECK(exp.runs >= 3);
  CHECK(exp.all_converged);
  CHECK(exp.regime == Verdict::Pass);
  CHECK(exp.agreement);
  CHECK(static_cast<int>(exp.labels.size()) == exp.runs);
}
