#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "levymfg/errors.hpp"
#include "levymfg/grid.hpp"
#include "levymfg/hamiltonian.hpp"
#include "levymfg/hjb.hpp"
#include "levymfg/levy.hpp"
#include "levymfg/numerics.hpp"

using namespace levymfg;

namespace {
constexpr double kTau = 2.0 * std::numbers::pi;

SpaceTimeField const_field(const Grid& g, double value) {
  return SpaceTimeField::constant(g.time_samples(), g.size(), value, "f");
}

SpaceTimeField profile_field(const Grid& g, const std::vector<double>& prof) {
  SpaceTimeField f = SpaceTimeField::zeros(g.time_samples(), g.size(), "f");
  for (int k = 0; k <= g.time_steps; ++k) {
    std::copy(prof.begin(), prof.end(), f.slice(k).begin());
  }
  return f;
}
}  // namespace

TEST_CASE("zero data gives the zero solution") {
  Grid g = Grid::make(1, 64, 0.5, 16);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
  ConjugatePair pair = make_pair(PairKind::Power);
  HjbSolution sol = solve_hjb(op, pair, const_field(g, 0.0), std::vector<double>(64, 0.0));
  CHECK(sup_norm(sol.u.values) == 0.0);
}

TEST_CASE("constant data integrates exactly") {
  Grid g = Grid::make(1, 64, 0.5, 16);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
  ConjugatePair pair = make_pair(PairKind::Power);
  const double c1 = 0.7, c2 = -0.3;
  HjbSolution sol = solve_hjb(op, pair, const_field(g, c1), std::vector<double>(64, c2));
  double worst = 0.0;
  for (int k = 0; k <= g.time_steps; ++k) {
    const double expect = c2 + c1 * (g.horizon - g.time(k));
    for (int i = 0; i < g.size(); ++i) {
      worst = std::max(worst, std::abs(sol.u.at(k, i) - expect));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("linear pair matches the spectral semigroup of the discrete operator") {
  Grid g = Grid::make(1, 64, 0.5, 32);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
  ConjugatePair pair = make_pair(PairKind::Linear);  // kappa = 1, F(z) = z
  std::vector<double> gterm(g.size());
  for (int i = 0; i < g.size(); ++i) gterm[i] = 0.3 * std::cos(kTau * g.point(i));
  HjbSolution sol = solve_hjb(op, pair, const_field(g, 0.0), gterm);

  const double lambda = op.fourier_symbol(1).real();
  CHECK(lambda < 0.0);

  // The evolution is diagonal on modes, so u(0) must stay a pure cosine.
  double a = 0.0;
  for (int i = 0; i < g.size(); ++i) a += sol.u.at(0, i) * std::cos(kTau * g.point(i));
  a *= 2.0 / g.size();
  double mode_residual = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    mode_residual = std::max(
        mode_residual, std::abs(sol.u.at(0, i) - a * std::cos(kTau * g.point(i))));
  }
  CHECK(mode_residual <= 1e-10);

  // Time stepping approximates the exact semigroup of the same generator.
  const double exact = 0.3 * std::exp(lambda * g.horizon);
  CHECK(std::abs(a - exact) <= 0.01);
}

TEST_CASE("non-differentiable pairs are rejected") {
  Grid g = Grid::make(1, 32, 0.25, 8);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
  ConjugatePair pair = make_pair(PairKind::PositivePartLinear);
  CHECK_THROWS_AS(
      solve_hjb(op, pair, const_field(g, 0.0), std::vector<double>(32, 0.0)),
      ValidationError);
}

TEST_CASE("substep schedule respects the monotonicity margin") {
  Grid g = Grid::make(1, 128, 0.5, 32);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
  ConjugatePair pair = make_pair(PairKind::Power);
  std::vector<double> gterm(g.size());
  for (int i = 0; i < g.size(); ++i) gterm[i] = std::cos(kTau * g.point(i));
  SpaceTimeField f = profile_field(g, gterm);

  HjbOptions tight;
  tight.cfl_theta = 0.45;
  HjbOptions loose;
  loose.cfl_theta = 0.9;
  HjbSolution st = solve_hjb(op, pair, f, gterm, tight);
  HjbSolution sl = solve_hjb(op, pair, f, gterm, loose);
  CHECK(st.substeps >= sl.substeps);
  CHECK(sl.substeps >= 1);

  // A floor above the CFL requirement is honored exactly.
  HjbOptions forced;
  forced.forced_substeps = 3 * st.substeps;
  HjbSolution sf = solve_hjb(op, pair, f, gterm, forced);
  CHECK(sf.substeps == 3 * st.substeps);
}

TEST_CASE("working range restarts recover from a low override") {
  Grid g = Grid::make(1, 64, 0.25, 16);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
  ConjugatePair pair = make_pair(PairKind::Power);
  std::vector<double> gterm(g.size());
  for (int i = 0; i < g.size(); ++i) gterm[i] = 0.5 * std::cos(kTau * g.point(i));
  SpaceTimeField f = profile_field(g, gterm);

  HjbSolution base = solve_hjb(op, pair, f, gterm);
  CHECK(base.restarts == 0);
  CHECK(base.observed_lu_max <= base.working_range);

  HjbOptions low;
  low.working_range_override = 0.55 * base.observed_lu_max;
  HjbSolution retried = solve_hjb(op, pair, f, gterm, low);
  CHECK(retried.restarts >= 1);
  CHECK(retried.observed_lu_max <= retried.working_range);
}

TEST_CASE("drift extraction applies the derivative to the operator image") {
  Grid g = Grid::make(1, 64, 0.25, 8);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
  ConjugatePair pair = make_pair(PairKind::Power);  // q = 2, F'(z) = z^+
  std::vector<double> gterm(g.size());
  for (int i = 0; i < g.size(); ++i) gterm[i] = 0.4 * std::cos(kTau * g.point(i));
  HjbSolution sol = solve_hjb(op, pair, const_field(g, 0.0), gterm);
  DriftExtract ext = extract_drift(op, pair, sol.u);
  double worst = 0.0;
  double max_b = 0.0;
  for (std::size_t i = 0; i < ext.b.values.size(); ++i) {
    worst = std::max(worst,
                     std::abs(ext.b.values[i] - std::max(0.0, ext.lu.values[i])));
    max_b = std::max(max_b, ext.b.values[i]);
  }
  CHECK(worst <= 1e-14);
  CHECK(ext.sup_b == doctest::Approx(max_b));
  CHECK(max_b > 0.0);
}

TEST_CASE("stability gap vanishes for identical data") {
  Grid g = Grid::make(1, 64, 0.25, 8);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
  ConjugatePair pair = make_pair(PairKind::Power);
  std::vector<double> gterm(g.size());
  for (int i = 0; i < g.size(); ++i) gterm[i] = 0.3 * std::cos(kTau * g.point(i));
  SpaceTimeField f = profile_field(g, gterm);
  StabilityReport rep = stability_gap(op, pair, f, gterm, f, gterm);
  CHECK(rep.ok);
  CHECK(rep.df_inf == 0.0);
  CHECK(rep.dg_inf == 0.0);
  for (double gap : rep.gap) CHECK(gap == 0.0);
}

TEST_CASE("holder propagation report approves cosine data") {
  Grid g = Grid::make(1, 64, 0.25, 16);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.3), g);
  ConjugatePair pair = make_pair(PairKind::Power);
  std::vector<double> gterm(g.size());
  for (int i = 0; i < g.size(); ++i) gterm[i] = 0.2 * std::cos(kTau * g.point(i));
  SpaceTimeField f = profile_field(g, gterm);
  HjbSolution sol = solve_hjb(op, pair, f, gterm);
  HolderPropagationReport rep = holder_propagation_report(op, sol, 1.0, sol.data_bound);
  CHECK(rep.u_ok);
  CHECK(rep.lu_ok);
  CHECK(rep.data_bound > 0.0);
}
