#include "levymfg/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

#include "levymfg/errors.hpp"

namespace levymfg {

namespace {

using Rat = boost::multiprecision::cpp_rational;

Rat to_rat(const Fraction& f) { return Rat(f.num, f.den); }

constexpr double kGuard = 1e-12;

Verdict verdict_from_margin(double margin) {
  if (std::abs(margin) <= kGuard) return Verdict::Boundary;
  return margin > 0.0 ? Verdict::Pass : Verdict::Fail;
}

Verdict verdict_from_rat(const Rat& margin) {
  if (margin == 0) return Verdict::Boundary;
  return margin > 0 ? Verdict::Pass : Verdict::Fail;
}

}  // namespace

Fraction Fraction::parse(const std::string& text) {
  auto fail = [&] {
    throw ValidationError("regularity: cannot parse fraction '" + text + "'");
  };
  if (text.empty()) fail();
  std::size_t slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      Fraction f;
      std::size_t used = 0;
      f.num = std::stoll(text.substr(0, slash), &used);
      if (used != slash) fail();
      f.den = std::stoll(text.substr(slash + 1), &used);
      if (used != text.size() - slash - 1) fail();
      if (f.den == 0) fail();
      if (f.den < 0) {
        f.den = -f.den;
        f.num = -f.num;
      }
      return f;
    }
    std::size_t dot = text.find('.');
    if (dot == std::string::npos) {
      Fraction f;
      std::size_t used = 0;
      f.num = std::stoll(text, &used);
      if (used != text.size()) fail();
      return f;
    }
    // Decimal: digits after the dot become an exact power-of-ten denominator.
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::size_t frac_digits = text.size() - dot - 1;
    if (frac_digits > 17) fail();
    std::size_t used = 0;
    Fraction f;
    f.num = std::stoll(digits, &used);
    if (used != digits.size()) fail();
    f.den = 1;
    for (std::size_t i = 0; i < frac_digits; ++i) f.den *= 10;
    return f;
  } catch (const std::logic_error&) {
    fail();
  }
  return {};
}

Fraction Fraction::from_double(double x) {
  if (!std::isfinite(x)) throw ValidationError("regularity: non-finite fraction input");
  int e = 0;
  double m = std::frexp(x, &e);  // x = m * 2^e, |m| in [0.5, 1)
  long long num = static_cast<long long>(std::ldexp(m, 53));
  int shift = 53 - e;
  while (shift > 0 && num % 2 == 0) {
    num /= 2;
    --shift;
  }
  Fraction f;
  if (shift < 0) {
    for (int i = 0; i < -shift; ++i) {
      if (std::abs(num) > (1LL << 62)) {
        throw ValidationError("regularity: double too large for exact fraction");
      }
      num *= 2;
    }
    f.num = num;
    f.den = 1;
    return f;
  }
  if (shift > 62) {
    throw ValidationError("regularity: double too fine for exact fraction");
  }
  f.num = num;
  f.den = 1LL << shift;
  return f;
}

double Fraction::value() const { return static_cast<double>(num) / den; }

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Boundary: return "boundary";
  }
  return "?";
}

BootstrapResult bootstrap_recursion(double two_sigma, double beta, double C, double T,
                                    int n_max, double c0) {
  if (!(two_sigma > 0.0) || !(two_sigma < 1.0)) {
    throw ValidationError("bootstrap: 2*sigma must lie in (0, 1)");
  }
  if (!(beta > 0.0) || beta > 1.0) {
    throw ValidationError("bootstrap: beta must lie in (0, 1]");
  }
  if (!(C > 0.0) || !(T > 0.0) || n_max < 1) {
    throw ValidationError("bootstrap: C, T must be positive and n_max >= 1");
  }

  const double s = two_sigma;
  BootstrapResult res;
  res.two_sigma = s;
  res.beta = beta;
  res.omega_limit = (2.0 - s) / (1.0 - s) - beta;
  res.beta0 = beta - s / (1.0 - s);
  res.in_regime = s < 0.5 && beta > s / (1.0 - s);
  if (res.in_regime) {
    res.sum_bound = 1.0 + (1.0 - s) / (1.0 - beta * (1.0 - s));
  }

  res.omega.push_back(2.0);
  res.constants.push_back(std::max(1.0, c0));
  for (int n = 0; n < n_max; ++n) {
    double w = res.omega.back();
    res.omega.push_back(2.0 * w / ((beta + w) * (1.0 - s) + s));
    double cn = res.constants.back();
    res.constants.push_back(std::max(1.0, 32.0 * C * T * std::pow(cn, 1.0 / w)));
  }
  res.final_gap = std::abs(res.omega.back() - res.omega_limit);

  // Strict decrease holds until the iterates reach the fixed point, where
  // rounding can leave a two-cycle between adjacent representable values, so
  // the recorded invariant is non-increase up to roundoff.
  res.monotone = true;
  for (std::size_t i = 1; i < res.omega.size(); ++i) {
    if (res.omega[i] > res.omega[i - 1] + 1e-12) {
      res.monotone = false;
      break;
    }
  }
  // The constants converge to (32 C T)^(w/(w-1)), which grows without bound
  // as omega_limit -> 1, so an absolute Cauchy tolerance is meaningless
  // there. Certify convergence instead: the log increments contract by the
  // factor 1/omega per step, and the whole sequence stays under the
  // closed-form cap.
  res.constants_cauchy = false;
  if (res.in_regime && res.omega_limit > 1.0) {
    const double wfloor = res.omega_limit;
    bool ok = true;
    const double cap =
        std::pow(32.0 * C * T, wfloor / (wfloor - 1.0)) * (1.0 + 1e-9);
    if (std::isfinite(cap)) {
      for (double cn : res.constants) {
        if (cn > cap) {
          ok = false;
          break;
        }
      }
    }
    std::vector<double> linc;
    for (std::size_t i = 1; i < res.constants.size(); ++i) {
      linc.push_back(std::log(res.constants[i]) - std::log(res.constants[i - 1]));
    }
    // Skip the burn-in where omega still moves and the max-with-one floor can
    // hold the sequence flat; the tail must contract. The slack absorbs the
    // roundoff jitter of the omega iterate, which enters the log increments
    // scaled by log C_n.
    const double slack =
        1e-12 * std::max(1.0, std::abs(std::log(res.constants.back())));
    for (std::size_t i = linc.size() / 2 + 1; i < linc.size(); ++i) {
      if (std::abs(linc[i]) > std::abs(linc[i - 1]) / wfloor + slack) {
        ok = false;
        break;
      }
    }
    res.constants_cauchy = ok;
  }
  return res;
}

ThresholdReport uniqueness_thresholds(double two_sigma, double alpha, double gamma,
                                      bool symmetric) {
  if (!(two_sigma > 0.0) || !(two_sigma < 1.0)) {
    throw ValidationError("thresholds: 2*sigma must lie in (0, 1)");
  }
  if (!(alpha > two_sigma) || alpha > 1.0) {
    throw ValidationError("thresholds: alpha must lie in (2*sigma, 1]");
  }
  if (!(gamma > 0.0) || gamma > 1.0) {
    throw ValidationError("thresholds: gamma must lie in (0, 1]");
  }
  const double s = two_sigma;
  ThresholdReport rep;
  rep.two_sigma = s;
  rep.alpha = alpha;
  rep.gamma = gamma;
  rep.symmetric = symmetric;

  double bump = symmetric ? 2.0 / (2.0 - s) : 1.0 / (1.0 - s);
  rep.mfg_lhs = s / (alpha - s) * (1.0 + bump);
  rep.mfg_margin = gamma - rep.mfg_lhs;
  rep.mfg_unique = verdict_from_margin(rep.mfg_margin);

  rep.fp_beta_lower = s + s * bump;
  rep.fp_interval_margin = 1.0 - rep.fp_beta_lower;
  rep.fp_interval_nonempty = verdict_from_margin(rep.fp_interval_margin);
  return rep;
}

ThresholdReport uniqueness_thresholds(const Fraction& two_sigma, const Fraction& alpha,
                                      const Fraction& gamma, bool symmetric) {
  Rat s = to_rat(two_sigma);
  Rat a = to_rat(alpha);
  Rat g = to_rat(gamma);
  if (!(s > 0) || !(s < 1)) throw ValidationError("thresholds: 2*sigma must lie in (0, 1)");
  if (!(a > s) || a > 1) throw ValidationError("thresholds: alpha must lie in (2*sigma, 1]");
  if (!(g > 0) || g > 1) throw ValidationError("thresholds: gamma must lie in (0, 1]");

  ThresholdReport rep;
  rep.two_sigma = two_sigma.value();
  rep.alpha = alpha.value();
  rep.gamma = gamma.value();
  rep.symmetric = symmetric;
  rep.exact = true;

  Rat bump = symmetric ? Rat(2) / (2 - s) : Rat(1) / (1 - s);
  Rat lhs = s / (a - s) * (1 + bump);
  Rat margin = g - lhs;
  rep.mfg_lhs = static_cast<double>(lhs);
  rep.mfg_margin = static_cast<double>(margin);
  rep.mfg_unique = verdict_from_rat(margin);

  Rat lower = s + s * bump;
  Rat imargin = 1 - lower;
  rep.fp_beta_lower = static_cast<double>(lower);
  rep.fp_interval_margin = static_cast<double>(imargin);
  rep.fp_interval_nonempty = verdict_from_rat(imargin);
  return rep;
}

Verdict fp_beta_verdict(double two_sigma, double beta, bool symmetric) {
  if (!(two_sigma > 0.0) || !(two_sigma < 1.0)) {
    throw ValidationError("thresholds: 2*sigma must lie in (0, 1)");
  }
  if (!(beta > 0.0) || beta > 1.0) {
    throw ValidationError("thresholds: beta must lie in (0, 1]");
  }
  const double s = two_sigma;
  double bump = symmetric ? 2.0 / (2.0 - s) : 1.0 / (1.0 - s);
  return verdict_from_margin(beta - (s + s * bump));
}

double critical_q(double sigma) {
  if (!(sigma > 0.0) || sigma > 0.5) {
    throw ValidationError("critical_q: sigma must lie in (0, 1/2]");
  }
  return (1.0 + sigma) / (2.0 * sigma * (2.0 - sigma));
}

ScalingReport optimal_scaling_exponents(double two_sigma, double beta, double omega_n) {
  if (!(two_sigma > 0.0) || !(two_sigma < 1.0)) {
    throw ValidationError("scaling: 2*sigma must lie in (0, 1)");
  }
  if (!(beta > 0.0) || beta > 1.0) {
    throw ValidationError("scaling: beta must lie in (0, 1]");
  }
  if (!(omega_n > 0.0)) throw ValidationError("scaling: omega must be positive");

  const double s = two_sigma;
  ScalingReport rep;
  rep.two_sigma = s;
  rep.beta = beta;
  rep.omega_n = omega_n;
  rep.e1_slope = 2.0 - s;
  rep.e1_icept = -1.0;
  rep.e2_slope = 1.0 - s;
  rep.e2_icept = 1.0 / omega_n - 1.0;
  rep.e3_slope = -s;
  rep.e3_icept = beta / omega_n;

  rep.first_branch = beta + omega_n > 2.0;
  rep.a_star = std::max((beta + omega_n - 1.0) / omega_n,
                        (beta + omega_n) / (2.0 * omega_n));

  auto min_exponent = [&](double a) {
    double e1 = rep.e1_slope * a + rep.e1_icept;
    double e2 = rep.e2_slope * a + rep.e2_icept;
    double e3 = rep.e3_slope * a + rep.e3_icept;
    return std::min({e1, e2, e3});
  };
  rep.min_exponent_at_star = min_exponent(rep.a_star);

  double best = -1e300;
  double best_a = 0.0;
  for (int i = 0; i <= 30000; ++i) {
    double a = i * 1e-4;
    double v = min_exponent(a);
    if (v > best) {
      best = v;
      best_a = a;
    }
  }
  rep.a_star_scan = best_a;

  rep.constraint_lo = 1.0 / (2.0 * (1.0 - s));
  rep.constraint_hi = beta / (2.0 * s);
  rep.constraint_nonempty = rep.constraint_hi >= rep.constraint_lo;
  return rep;
}

}  // namespace levymfg
