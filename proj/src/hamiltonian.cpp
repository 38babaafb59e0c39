#include "levymfg/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "levymfg/errors.hpp"
#include "levymfg/numerics.hpp"

namespace levymfg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double positive_part(double z) { return z > 0.0 ? z : 0.0; }

}  // namespace

ConjugatePair make_pair(PairKind kind, const PairParams& params) {
  const double kappa = params.kappa;
  const double eps = params.epsilon;
  const double q = params.q;

  ConjugatePair p;
  p.kind = kind;
  p.name = pair_kind_name(kind);
  p.params = params;

  switch (kind) {
    case PairKind::Linear:
      if (!(kappa > 0.0)) throw ValidationError("hamiltonian: kappa must be positive");
      p.L = [kappa](double z) { return z == kappa ? 0.0 : kInf; };
      p.F = [kappa](double z) { return kappa * z; };
      p.Fprime = [kappa](double) { return kappa; };
      p.gamma = 1.0;
      p.a1prime_global = true;
      break;

    case PairKind::PositivePartLinear:
      if (!(kappa > 0.0)) throw ValidationError("hamiltonian: kappa must be positive");
      p.L = [kappa](double z) { return (z >= 0.0 && z <= kappa) ? 0.0 : kInf; };
      p.F = [kappa](double z) { return kappa * positive_part(z); };
      // Subgradient selection at the kink; the pair is flagged
      // non-differentiable and the solvers reject it.
      p.Fprime = [kappa](double z) { return z > 0.0 ? kappa : 0.0; };
      p.gamma = 1.0;
      p.differentiable = false;
      break;

    case PairKind::SmoothedPositivePart:
      if (!(kappa > 0.0)) throw ValidationError("hamiltonian: kappa must be positive");
      if (!(eps > 0.0)) throw ValidationError("hamiltonian: epsilon must be positive");
      p.L = [kappa, eps](double z) {
        if (z < 0.0 || z > kappa) return kInf;
        return eps * (z * z / kappa - z);
      };
      p.F = [kappa, eps](double z) {
        if (z < -eps) return 0.0;
        if (z < eps) return kappa / (4.0 * eps) * (z + eps) * (z + eps);
        return kappa * z;
      };
      p.Fprime = [kappa, eps](double z) {
        if (z < -eps) return 0.0;
        if (z < eps) return kappa / (2.0 * eps) * (z + eps);
        return kappa;
      };
      p.gamma = 1.0;
      break;

    case PairKind::Power: {
      if (!(q > 1.0)) throw ValidationError("hamiltonian: power pair needs q > 1");
      double expo = q / (q - 1.0);
      p.L = [q](double z) { return z < 0.0 ? kInf : std::pow(z, q) / q; };
      p.F = [q, expo](double z) {
        return (q - 1.0) / q * std::pow(positive_part(z), expo);
      };
      p.Fprime = [q](double z) { return std::pow(positive_part(z), 1.0 / (q - 1.0)); };
      p.gamma = std::min(1.0, 1.0 / (q - 1.0));
      break;
    }

    case PairKind::Exponential:
      p.L = [](double z) {
        if (z < 0.0) return kInf;
        if (z == 0.0) return 0.0;
        return z * std::log(z) - z;
      };
      p.F = [](double z) { return std::exp(z); };
      p.Fprime = [](double z) { return std::exp(z); };
      p.gamma = 1.0;  // local, on any bounded range
      break;

    case PairKind::Shifted:
      throw ValidationError("hamiltonian: build the shifted pair via make_shifted_pair");

    case PairKind::Numeric:
      throw ValidationError("hamiltonian: build numeric pairs via make_numeric_pair");
  }
  return p;
}

ConjugatePair make_shifted_pair(const ConjugatePair& base, double kappa) {
  if (!(kappa > 0.0)) throw ValidationError("hamiltonian: shift kappa must be positive");
  ConjugatePair p;
  p.kind = PairKind::Shifted;
  p.name = pair_kind_name(PairKind::Shifted) + "(" + base.name + ")";
  p.params = base.params;
  p.params.kappa = kappa;
  p.gamma = base.gamma;
  p.differentiable = base.differentiable;
  p.a1prime_global = true;  // F' = F0' + kappa >= kappa
  auto L0 = base.L;
  auto F0 = base.F;
  auto F0p = base.Fprime;
  p.L = [L0, kappa](double z) { return z >= kappa ? L0(z - kappa) : kInf; };
  p.F = [F0, kappa](double z) { return F0(z) + kappa * z; };
  p.Fprime = [F0p, kappa](double z) { return F0p(z) + kappa; };
  return p;
}

PairKind parse_pair_kind(const std::string& token) {
  if (token == "a" || token == "linear") return PairKind::Linear;
  if (token == "b" || token == "positive-part") return PairKind::PositivePartLinear;
  if (token == "c" || token == "smoothed-positive-part")
    return PairKind::SmoothedPositivePart;
  if (token == "d" || token == "power") return PairKind::Power;
  if (token == "e" || token == "exponential") return PairKind::Exponential;
  if (token == "f" || token == "shifted") return PairKind::Shifted;
  if (token == "numeric") return PairKind::Numeric;
  throw ValidationError("hamiltonian: unknown pair '" + token + "'");
}

std::string pair_kind_name(PairKind kind) {
  switch (kind) {
    case PairKind::Linear: return "linear";
    case PairKind::PositivePartLinear: return "positive-part";
    case PairKind::SmoothedPositivePart: return "smoothed-positive-part";
    case PairKind::Power: return "power";
    case PairKind::Exponential: return "exponential";
    case PairKind::Shifted: return "shifted";
    case PairKind::Numeric: return "numeric";
  }
  return "?";
}

NumericConjugate numeric_conjugate(std::span<const double> xs, std::span<const double> vs,
                                   std::span<const double> y_grid) {
  if (xs.size() != vs.size() || xs.empty()) {
    throw ValidationError("numeric_conjugate: sample arrays must match and be nonempty");
  }
  bool any_finite = false;
  for (double v : vs) {
    if (std::isfinite(v)) any_finite = true;
  }
  if (!any_finite) throw ValidationError("numeric_conjugate: empty effective domain");

  NumericConjugate out;
  out.grid.assign(y_grid.begin(), y_grid.end());
  out.values.resize(y_grid.size());
  out.truncated.resize(y_grid.size(), 0);
  out.optimizer.resize(y_grid.size());
  for (std::size_t j = 0; j < y_grid.size(); ++j) {
    double best = -kInf;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(vs[i])) continue;
      double cand = xs[i] * y_grid[j] - vs[i];
      if (cand > best) {
        best = cand;
        arg = i;
      }
    }
    out.values[j] = best;
    out.optimizer[j] = xs[arg];
    out.truncated[j] = arg + 1 == xs.size() ? 1 : 0;
  }
  return out;
}

ConjugatePair make_numeric_pair(std::vector<double> zeta, std::vector<double> cost,
                                double z_lo, double z_hi, int z_samples) {
  if (zeta.size() != cost.size() || zeta.size() < 2) {
    throw ValidationError("hamiltonian: numeric pair needs matching tables, >= 2 rows");
  }
  if (!std::is_sorted(zeta.begin(), zeta.end())) {
    throw ValidationError("hamiltonian: numeric zeta grid must be increasing");
  }
  if (zeta.front() < 0.0) {
    throw ValidationError("hamiltonian: cost domain must lie in [0, inf)");
  }
  if (!(z_lo < z_hi) || z_samples < 3) {
    throw ValidationError("hamiltonian: bad conjugate range");
  }

  std::vector<double> zg(z_samples);
  for (int i = 0; i < z_samples; ++i) {
    zg[i] = z_lo + (z_hi - z_lo) * i / (z_samples - 1);
  }
  auto conj = std::make_shared<NumericConjugate>(numeric_conjugate(zeta, cost, zg));
  auto table_z = std::make_shared<std::vector<double>>(std::move(zeta));
  auto table_c = std::make_shared<std::vector<double>>(std::move(cost));

  auto interp = [](const std::vector<double>& xs, const std::vector<double>& ys,
                   double x) {
    if (x < xs.front() || x > xs.back()) return kInf;
    auto it = std::lower_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return ys.front();
    std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    std::size_t lo = hi - 1;
    double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return (1.0 - t) * ys[lo] + t * ys[hi];
  };

  ConjugatePair p;
  p.kind = PairKind::Numeric;
  p.name = pair_kind_name(PairKind::Numeric);
  p.L = [table_z, table_c, interp](double z) { return interp(*table_z, *table_c, z); };
  p.F = [conj, interp](double z) {
    double v = interp(conj->grid, conj->values, z);
    if (!std::isfinite(v)) {
      // Extend affinely using the hull slope at the nearer end.
      const auto& g = conj->grid;
      const auto& vv = conj->values;
      std::size_t n = g.size();
      if (z < g.front()) {
        double s = (vv[1] - vv[0]) / (g[1] - g[0]);
        return vv[0] + s * (z - g[0]);
      }
      double s = (vv[n - 1] - vv[n - 2]) / (g[n - 1] - g[n - 2]);
      return vv[n - 1] + s * (z - g[n - 1]);
    }
    return v;
  };
  // Secant slope of the convex conjugate; nondecreasing by convexity.
  auto Fcopy = p.F;
  double dz = (z_hi - z_lo) / (z_samples - 1);
  p.Fprime = [Fcopy, dz](double z) {
    return (Fcopy(z + 0.5 * dz) - Fcopy(z - 0.5 * dz)) / dz;
  };
  // The conjugate F(z) = sup(zeta z - L) over zeta >= 0 is nondecreasing, so
  // F' >= 0; its modulus is that of the optimizer field. Claim gamma = 1 on
  // the sampled range and let the checker measure the true value.
  p.gamma = 1.0;
  return p;
}

AssumptionReport check_assumptions(const ConjugatePair& pair, double lo, double hi,
                                   int samples) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ValidationError("check_assumptions: bad range");
  }
  if (samples < 8) throw ValidationError("check_assumptions: too few samples");

  AssumptionReport rep;
  rep.range_lo = lo;
  rep.range_hi = hi;
  rep.gamma_claimed = pair.gamma;
  rep.a1prime_global = pair.a1prime_global;

  std::vector<double> z(samples), fp(samples), fv(samples);
  for (int i = 0; i < samples; ++i) {
    z[i] = lo + (hi - lo) * i / (samples - 1);
    fp[i] = pair.Fprime(z[i]);
    fv[i] = pair.F(z[i]);
  }
  rep.fprime_min = *std::min_element(fp.begin(), fp.end());
  rep.fprime_max = *std::max_element(fp.begin(), fp.end());
  rep.a1_ok = pair.differentiable && rep.fprime_min >= 0.0;
  rep.a1prime_on_range = rep.fprime_min > 0.0;

  // [F']_gamma at the claimed exponent.
  double dz = (hi - lo) / (samples - 1);
  double semi = 0.0;
  for (int i = 0; i < samples; ++i) {
    for (int j = i + 1; j < samples; ++j) {
      double d = (j - i) * dz;
      double ratio = std::abs(fp[j] - fp[i]) / std::pow(d, pair.gamma);
      semi = std::max(semi, ratio);
    }
  }
  rep.fprime_seminorm = semi;

  // Measured gamma: log-log regression of the max increment of F' against
  // separation, over separations in [1e-3, 1].
  std::vector<double> lx, ly;
  for (int k = 1; k < samples; ++k) {
    double d = k * dz;
    if (d < 1e-3 || d > 1.0) continue;
    double s = 0.0;
    for (int i = 0; i + k < samples; ++i) s = std::max(s, std::abs(fp[i + k] - fp[i]));
    if (s > 0.0) {
      lx.push_back(std::log(d));
      ly.push_back(std::log(s));
    }
  }
  if (lx.size() < 2) {
    rep.gamma_degenerate = true;
    rep.gamma_measured = 1.0;
    rep.gamma_r2 = 1.0;
  } else {
    LinearFit fit = linear_fit(lx, ly);
    if (fit.degenerate) {
      rep.gamma_degenerate = true;
      rep.gamma_measured = 1.0;
      rep.gamma_r2 = 1.0;
    } else {
      rep.gamma_measured = fit.slope;
      rep.gamma_r2 = fit.r2;
    }
  }

  // Midpoint convexity over all sampled symmetric triples.
  rep.convex = true;
  for (int i = 0; i < samples && rep.convex; ++i) {
    for (int k = 1; i - k >= 0 && i + k < samples; ++k) {
      double mid = fv[i];
      double avg = 0.5 * (fv[i - k] + fv[i + k]);
      if (mid > avg + 1e-12 * (1.0 + std::abs(avg))) {
        rep.convex = false;
        break;
      }
    }
  }
  return rep;
}

}  // namespace levymfg
