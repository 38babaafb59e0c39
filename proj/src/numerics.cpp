#include "levymfg/numerics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace levymfg {

double kahan_total(std::span<const double> xs) {
  KahanSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

namespace {

double simpson_rule(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_recurse(const std::function<double(double)>& f, double a, double b,
                       double fa, double fm, double fb, double whole, double tol,
                       int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = f(lm);
  double frm = f(rm);
  double left = simpson_rule(fa, flm, fm, a, m);
  double right = simpson_rule(fm, frm, fb, m, b);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  if (a == b) return 0.0;
  double fa = f(a);
  double fb = f(b);
  double fm = f(0.5 * (a + b));
  double whole = simpson_rule(fa, fm, fb, a, b);
  return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
  LinearFit fit;
  const std::size_t n = xs.size();
  if (n < 2 || ys.size() != n) {
    fit.degenerate = true;
    return fit;
  }
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  double mx = sx / static_cast<double>(n);
  double my = sy / static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mx;
    double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    fit.degenerate = true;
    fit.intercept = my;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = (sxy * sxy) / (sxx * syy);
  return fit;
}

namespace {

std::uint64_t splitmix_step(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

SplitMix64::SplitMix64(std::uint64_t seed, std::uint64_t stream) {
  // Mix the pair so neighbouring stream ids give unrelated sequences.
  std::uint64_t s = seed;
  std::uint64_t a = splitmix_step(s);
  s ^= stream * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL;
  std::uint64_t b = splitmix_step(s);
  state_ = a ^ (b + 0x165667B19E3779F9ULL);
}

std::uint64_t SplitMix64::next_u64() { return splitmix_step(state_); }

double SplitMix64::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SplitMix64::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

double SplitMix64::exponential() {
  double u;
  do {
    u = next_double();
  } while (u <= 0.0);
  return -std::log(u);
}

int SplitMix64::poisson(double mean) {
  if (mean <= 0.0) return 0;
  // Knuth's product method; our rates are O(1) per step so this is fine.
  double limit = std::exp(-mean);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= next_double();
  } while (p > limit && k < 100000);
  return k - 1;
}

double sup_norm(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::abs(x));
  return m;
}

double sup_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool all_finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

}  // namespace levymfg
