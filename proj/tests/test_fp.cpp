#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "levymfg/errors.hpp"
#include "levymfg/fp.hpp"
#include "levymfg/grid.hpp"
#include "levymfg/levy.hpp"
#include "levymfg/numerics.hpp"
#include "support/oracles.hpp"

using namespace levymfg;

namespace {
constexpr double kTau = 2.0 * std::numbers::pi;

// Time-varying drift with no parity structure; pure-mode profiles would let
// the leading duality defect cancel by orthogonality.
DriftField modulated_drift(const Grid& g, std::uint64_t seed) {
  std::vector<double> psi = random_smooth_field(g, seed);
  double sup = 0.0;
  for (double v : psi) sup = std::max(sup, std::abs(v));
  SpaceTimeField f = SpaceTimeField::zeros(g.time_samples(), g.size(), "b");
  for (int k = 0; k <= g.time_steps; ++k) {
    const double amp = 0.25 * std::cos(std::numbers::pi * g.time(k) / g.horizon);
    for (int i = 0; i < g.size(); ++i) {
      f.at(k, i) = 0.65 + amp * psi[i] / sup;
    }
  }
  return make_drift(std::move(f), g);
}

std::vector<double> rough_profile(const Grid& g, std::uint64_t seed) {
  std::vector<double> phi = random_smooth_field(g, seed);
  for (double& v : phi) v += 0.3;
  return phi;
}

DiscreteMeasure bump_measure(const Grid& g) {
  std::vector<double> dens(g.size());
  for (int i = 0; i < g.size(); ++i) dens[i] = 1.0 + 0.5 * std::cos(kTau * g.point(i) + 1.0);
  return DiscreteMeasure::from_density(g, dens);
}
}  // namespace

TEST_CASE("uniform measure with constant drift is stationary") {
  Grid g = Grid::make(1, 64, 0.5, 16);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
  FpSolution sol = solve_fp(op, constant_drift(g, 0.9), DiscreteMeasure::uniform(g));
  const double target = 1.0 / 64.0;
  double worst = 0.0;
  for (int k = 0; k <= g.time_steps; ++k) {
    for (int i = 0; i < g.size(); ++i) {
      worst = std::max(worst, std::abs(sol.m.at(k, i) - target));
    }
  }
  CHECK(worst <= 1e-13);
  CHECK(sol.max_mass_defect <= 1e-12);
  CHECK(sol.min_entry >= 0.0);
}

TEST_CASE("point mass evolution matches a dense matrix exponential") {
  LevyMeasureSpec spec = LevyMeasureSpec::atomic({{0.25, 0.4}, {-0.125, 0.35}});
  auto error_at = [&](int nt) {
    Grid g = Grid::make(1, 16, 0.5, nt);
    DiscreteOperator op = assemble_operator(spec, g);
    FpSolution sol = solve_fp(op, constant_drift(g, 0.8), DiscreteMeasure::point(g, 5));
    testsupport::DenseMatrix a = testsupport::forward_generator(op.weights, 0.8);
    for (auto& row : a) {
      for (double& x : row) x *= g.horizon;
    }
    std::vector<double> m0(g.size(), 0.0);
    m0[5] = 1.0;
    std::vector<double> exact = testsupport::dense_expm_apply(a, m0);
    double tv = 0.0;
    for (int i = 0; i < g.size(); ++i) tv += std::abs(sol.m.at(nt, i) - exact[i]);
    return 0.5 * tv;
  };
  const double coarse = error_at(32);
  const double fine = error_at(64);
  CHECK(fine <= 0.01);
  CHECK(coarse / fine >= 1.5);
  CHECK(coarse / fine <= 2.7);
}

TEST_CASE("random drift keeps mass and positivity") {
  Grid g = Grid::make(1, 128, 0.5, 16);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
  DriftField b = make_holder_drift(g, 0.6, 0.2, 1.0, 77);
  FpSolution sol = solve_fp(op, b, bump_measure(g));
  CHECK(sol.max_mass_defect <= 1e-12);
  CHECK(sol.min_entry >= 0.0);
  for (int k = 0; k <= g.time_steps; ++k) {
    KahanSum total;
    for (int i = 0; i < g.size(); ++i) total.add(sol.m.at(k, i));
    CHECK(std::abs(total.value() - 1.0) <= 1e-12);
  }
}

TEST_CASE("forward dual decays at the symbol rate for unit drift") {
  Grid g = Grid::make(1, 64, 0.5, 64);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
  std::vector<double> phi(g.size());
  for (int i = 0; i < g.size(); ++i) phi[i] = std::cos(kTau * g.point(i));
  DualOptions opts;
  opts.direction = DualDirection::ForwardFromZero;
  DualSolution sol = solve_dual(op, constant_drift(g, 1.0), phi, opts);

  double a = 0.0;
  for (int i = 0; i < g.size(); ++i) a += sol.w.at(g.time_steps, i) * phi[i];
  a *= 2.0 / g.size();
  double mode_residual = 0.0;
  double lo = 1e300, hi = -1e300;
  for (int k = 0; k <= g.time_steps; ++k) {
    for (int i = 0; i < g.size(); ++i) {
      lo = std::min(lo, sol.w.at(k, i));
      hi = std::max(hi, sol.w.at(k, i));
    }
  }
  for (int i = 0; i < g.size(); ++i) {
    mode_residual = std::max(mode_residual,
                             std::abs(sol.w.at(g.time_steps, i) - a * phi[i]));
  }
  const double lambda = op.fourier_symbol(1).real();
  CHECK(mode_residual <= 1e-10);
  CHECK(std::abs(a - std::exp(lambda * g.horizon)) <= 0.01);
  CHECK(lo >= -1.0 - 1e-12);  // convex combinations of the data
  CHECK(hi <= 1.0 + 1e-12);
}

TEST_CASE("exact adjoint duality pairing telescopes to rounding") {
  Grid g = Grid::make(1, 64, 0.5, 16);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
  DriftField b = modulated_drift(g, 3);
  DiscreteMeasure m0 = bump_measure(g);
  std::vector<double> phi = rough_profile(g, 9);
  for (int t0 : {8, 16}) {
    const double res = holmgren_residual(op, b, m0, phi, t0, DualStepping::ExactAdjoint);
    CHECK(res <= 1e-11);
  }
}

TEST_CASE("independent stepping defect shrinks with the step") {
  auto residual_at = [](int nt) {
    Grid g = Grid::make(1, 64, 0.5, nt);
    DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
    DriftField b = modulated_drift(g, 3);
    std::vector<double> phi = rough_profile(g, 9);
    return holmgren_residual(op, b, bump_measure(g), phi, nt,
                             DualStepping::Independent);
  };
  const double coarse = residual_at(16);
  const double fine = residual_at(32);
  CHECK(coarse > 1e-9);  // a genuine consistency defect, not rounding
  CHECK(coarse / fine >= 1.2);
  CHECK(coarse / fine <= 3.5);
}

TEST_CASE("backward dual validates the terminal index") {
  Grid g = Grid::make(1, 32, 0.25, 8);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.5), g);
  DriftField b = constant_drift(g, 0.5);
  std::vector<double> phi(g.size(), 1.0);
  DualOptions opts;
  opts.direction = DualDirection::BackwardFromT0;
  opts.t0_index = 0;
  CHECK_THROWS_AS(solve_dual(op, b, phi, opts), ValidationError);
  opts.t0_index = 9;
  CHECK_THROWS_AS(solve_dual(op, b, phi, opts), ValidationError);
  opts.t0_index = 8;
  DualSolution sol = solve_dual(op, b, phi, opts);
  CHECK(sol.w.time_slices == 9);
}

TEST_CASE("holder drift synthesis hits its design window") {
  Grid g = Grid::make(1, 256, 0.5, 8);
  DriftField b = make_holder_drift(g, 0.7, 0.25, 1.0, 123);
  CHECK(b.holder.exponent == doctest::Approx(0.7).epsilon(0.25));
  CHECK_FALSE(b.holder.degenerate);
  double lo = 1e300, hi = -1e300;
  for (double v : b.values.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= 0.25 - 1e-12);
  CHECK(hi <= 1.0 + 1e-12);
  CHECK(b.upper_bound == doctest::Approx(hi));
  for (int i = 0; i < g.size(); ++i) {
    CHECK(b.values.at(0, i) == b.values.at(g.time_steps, i));
  }
}

TEST_CASE("distances between point masses have closed forms") {
  Grid g = Grid::make(1, 64, 0.5, 8);
  DiscreteMeasure a = DiscreteMeasure::point(g, 0);
  DiscreteMeasure c = DiscreteMeasure::point(g, 16);
  DiscreteMeasure d = DiscreteMeasure::point(g, 48);
  CHECK(total_variation_distance(a, c) == doctest::Approx(1.0));
  CHECK(total_variation_distance(a, a) == 0.0);
  CHECK(dual_lipschitz_distance(a, c, g) == doctest::Approx(0.25));
  CHECK(dual_lipschitz_distance(a, d, g) == doctest::Approx(0.25));  // torus wrap
  CHECK(dual_lipschitz_distance(a, a, g) <= 1e-15);
  CHECK(dual_lipschitz_distance(a, c, g) == doctest::Approx(dual_lipschitz_distance(c, a, g)));
}

TEST_CASE("measure constructors validate their inputs") {
  Grid g = Grid::make(1, 32, 0.25, 8);
  std::vector<double> bad(g.size(), 1.0);
  bad[3] = -0.5;
  CHECK_THROWS_AS(DiscreteMeasure::from_density(g, bad), ValidationError);
  CHECK_THROWS_AS(constant_drift(g, -1.0), ValidationError);
  std::vector<double> flat(g.size(), 2.0);
  DiscreteMeasure m = DiscreteMeasure::from_density(g, flat);
  for (double v : m.mass) CHECK(v == doctest::Approx(1.0 / 32.0));
}

TEST_CASE("uniqueness probe contracts under refinement and mollification") {
  Grid g = Grid::make(1, 64, 0.5, 8);
  DiscreteOperator op = assemble_operator(LevyMeasureSpec::stable(0.4), g);
  DriftField b = make_holder_drift(g, 0.8, 0.3, 0.9, 11);
  UniquenessProbe probe = uniqueness_probe(op, b, bump_measure(g));
  CHECK(probe.measured_beta > 0.0);
  CHECK(probe.tv_refine.size() == 2);
  CHECK(probe.flat_refine.size() == 2);
  CHECK(probe.tv_mollify.size() == 4);
  for (double v : probe.tv_refine) {
    CHECK(v >= 0.0);
    CHECK(v < 0.1);
  }
  CHECK(probe.contracting);
}
