#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "levymfg/errors.hpp"
#include "levymfg/hamiltonian.hpp"

using namespace levymfg;

TEST_CASE("pair kind parsing") {
  CHECK(parse_pair_kind("a") == PairKind::Linear);
  CHECK(parse_pair_kind("b") == PairKind::PositivePartLinear);
  CHECK(parse_pair_kind("c") == PairKind::SmoothedPositivePart);
  CHECK(parse_pair_kind("d") == PairKind::Power);
  CHECK(parse_pair_kind("e") == PairKind::Exponential);
  CHECK(parse_pair_kind("f") == PairKind::Shifted);
  CHECK(parse_pair_kind("power") == PairKind::Power);
  CHECK_THROWS_AS(parse_pair_kind("zz"), ValidationError);
}

TEST_CASE("linear pair is an indicator cost") {
  PairParams p;
  p.kappa = 2.0;
  ConjugatePair pair = make_pair(PairKind::Linear, p);
  CHECK(pair.L(2.0) == 0.0);
  CHECK(pair.L(0.5) == std::numeric_limits<double>::infinity());
  CHECK(pair.L(2.5) == std::numeric_limits<double>::infinity());
  CHECK(pair.F(1.5) == doctest::Approx(3.0));
  CHECK(pair.F(-1.0) == doctest::Approx(-2.0));
  CHECK(pair.Fprime(0.7) == doctest::Approx(2.0));
  CHECK(pair.gamma == 1.0);
  CHECK(pair.a1prime_global);
}

TEST_CASE("positive-part pair is flagged non-differentiable") {
  ConjugatePair pair = make_pair(PairKind::PositivePartLinear);
  CHECK(!pair.differentiable);
  CHECK(pair.F(1.0) == doctest::Approx(pair.params.kappa));
  CHECK(pair.F(-1.0) == 0.0);
}

TEST_CASE("power pair matches closed forms") {
  PairParams p;
  p.q = 2.0;
  ConjugatePair pair = make_pair(PairKind::Power, p);
  CHECK(pair.L(3.0) == doctest::Approx(4.5));
  CHECK(pair.F(2.0) == doctest::Approx(2.0));     // 0.5 z^2 at z = 2
  CHECK(pair.F(-1.0) == 0.0);
  CHECK(pair.Fprime(2.0) == doctest::Approx(2.0));
  CHECK(pair.Fprime(-3.0) == 0.0);
  CHECK(pair.gamma == doctest::Approx(1.0));

  p.q = 3.0;
  ConjugatePair cubic = make_pair(PairKind::Power, p);
  CHECK(cubic.gamma == doctest::Approx(0.5));
  CHECK(cubic.L(2.0) == doctest::Approx(8.0 / 3.0));
  CHECK(cubic.F(1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(cubic.Fprime(4.0) == doctest::Approx(2.0));

  p.q = 1.5;
  CHECK(make_pair(PairKind::Power, p).gamma == doctest::Approx(1.0));
}

TEST_CASE("legendre transform round trip for the power pair") {
  PairParams p;
  p.q = 2.5;
  ConjugatePair pair = make_pair(PairKind::Power, p);
  const int n = 4001;
  std::vector<double> zeta(n), cost(n), zs(n);
  for (int i = 0; i < n; ++i) {
    zeta[i] = 6.0 * i / (n - 1);
    cost[i] = pair.L(zeta[i]);
    zs[i] = -1.0 + 3.0 * i / (n - 1);
  }
  NumericConjugate nc = numeric_conjugate(zeta, cost, zs);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    if (nc.truncated[i]) continue;
    worst = std::max(worst, std::abs(nc.values[i] - pair.F(zs[i])));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("exponential pair basics") {
  ConjugatePair pair = make_pair(PairKind::Exponential);
  CHECK(pair.F(0.0) >= 0.0);
  CHECK(pair.Fprime(1.0) > 0.0);
  CHECK(pair.Fprime(-30.0) >= 0.0);
  CHECK(!pair.a1prime_global);
  AssumptionReport rep = check_assumptions(pair, -2.0, 2.0);
  CHECK(rep.convex);
  CHECK(rep.a1_ok);
}

TEST_CASE("shifted pair raises the derivative floor") {
  ConjugatePair base = make_pair(PairKind::SmoothedPositivePart);
  ConjugatePair shifted = make_shifted_pair(base, 0.5);
  CHECK(shifted.a1prime_global);
  CHECK(shifted.Fprime(-5.0) >= 0.5 - 1e-12);
  CHECK(shifted.Fprime(2.0) == doctest::Approx(base.Fprime(2.0) + 0.5));
}

TEST_CASE("assumption report measures the power exponent") {
  PairParams p;
  p.q = 2.5;
  ConjugatePair pair = make_pair(PairKind::Power, p);
  AssumptionReport rep = check_assumptions(pair, -2.0, 2.0);
  CHECK(rep.a1_ok);
  CHECK(rep.convex);
  CHECK(rep.gamma_claimed == doctest::Approx(1.0 / 1.5));
  CHECK(rep.gamma_measured == doctest::Approx(rep.gamma_claimed).epsilon(0.08));
  CHECK(!rep.a1prime_global);
}

TEST_CASE("numeric pair wraps a sampled cost table") {
  PairParams p;
  p.q = 2.0;
  ConjugatePair exact = make_pair(PairKind::Power, p);
  const int n = 2001;
  std::vector<double> zeta(n), cost(n);
  for (int i = 0; i < n; ++i) {
    zeta[i] = 5.0 * i / (n - 1);
    cost[i] = 0.5 * zeta[i] * zeta[i];
  }
  ConjugatePair numeric = make_numeric_pair(zeta, cost, -1.0, 2.0);
  for (double z : {-0.5, 0.0, 0.5, 1.0, 1.8}) {
    CHECK(std::abs(numeric.F(z) - exact.F(z)) <= 2e-3);
  }
  CHECK(numeric.L(6.0) == std::numeric_limits<double>::infinity());
}

TEST_CASE("pair parameter validation") {
  PairParams p;
  p.q = 1.0;
  CHECK_THROWS_AS(make_pair(PairKind::Power, p), ValidationError);
  p.q = 2.0;
  p.kappa = -1.0;
  CHECK_THROWS_AS(make_pair(PairKind::Linear, p), ValidationError);
}
