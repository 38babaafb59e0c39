#pragma once

// Test-side oracles, kept independent of the library implementations they
// are used to check.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

namespace testsupport {

// Normalization for the stable measure of order 2s: with this constant the
// symbol of the generator is exactly -|xi|^(2s).
inline double stable_constant(double two_sigma) {
  const double sigma = 0.5 * two_sigma;
  return std::tgamma(1.0 + two_sigma) * std::sin(sigma * std::numbers::pi) /
         std::numbers::pi;
}

inline double stable_density(double two_sigma, double z) {
  return stable_constant(two_sigma) / std::pow(std::abs(z), 1.0 + two_sigma);
}

// Fixed-panel Simpson rule; panels must be even.
template <typename F>
double simpson(const F& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// nu({|z| > r}) for the stable measure, in closed form.
inline double stable_tail_mass(double two_sigma, double r) {
  return 2.0 * stable_constant(two_sigma) / two_sigma * std::pow(r, -two_sigma);
}

// K = sup over (p, r) of the concentration functional; for the stable
// measure the supremum is c / sigma, attained as r -> 0 at p = 1.
inline double stable_levy_constant(double two_sigma) {
  return stable_constant(two_sigma) / (0.5 * two_sigma);
}

// Direct DFT of a circulant weight row: symbol(k) = sum_j w_j (e(k j h) - 1).
inline std::complex<double> circulant_symbol(std::span<const double> weights, int k) {
  const int n = static_cast<int>(weights.size());
  const double h = 1.0 / n;
  std::complex<double> acc(0.0, 0.0);
  for (int j = 0; j < n; ++j) {
    if (weights[j] == 0.0) continue;
    const double angle = 2.0 * std::numbers::pi * k * j * h;
    acc += weights[j] * (std::complex<double>(std::cos(angle), std::sin(angle)) - 1.0);
  }
  return acc;
}

using DenseMatrix = std::vector<std::vector<double>>;

inline DenseMatrix dense_mul(const DenseMatrix& x, const DenseMatrix& y) {
  const int n = static_cast<int>(x.size());
  DenseMatrix out(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const double v = x[i][k];
      if (v == 0.0) continue;
      for (int j = 0; j < n; ++j) out[i][j] += v * y[k][j];
    }
  }
  return out;
}

// Transition generator of the forward evolution dm/dt = L^T(b m) for a
// circulant weight row and a constant coefficient b.
inline DenseMatrix forward_generator(std::span<const double> weights, double b) {
  const int n = static_cast<int>(weights.size());
  DenseMatrix a(n, std::vector<double>(n, 0.0));
  double total = 0.0;
  for (int j = 0; j < n; ++j) total += weights[j];
  for (int j = 0; j < n; ++j) {
    if (weights[j] == 0.0) continue;
    for (int i = 0; i < n; ++i) a[i][((i - j) % n + n) % n] += b * weights[j];
  }
  for (int i = 0; i < n; ++i) a[i][i] -= b * total;
  return a;
}

// exp(a) v by scaling and squaring around a short Taylor expansion.
inline std::vector<double> dense_expm_apply(DenseMatrix a, std::span<const double> v) {
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
  DenseMatrix e(n, std::vector<double>(n, 0.0));
  DenseMatrix term(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    e[i][i] = 1.0;
    term[i][i] = 1.0;
  }
  for (int k = 1; k <= 22; ++k) {
    term = dense_mul(term, a);
    const double inv = 1.0 / k;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        term[i][j] *= inv;
        e[i][j] += term[i][j];
      }
    }
  }
  for (int s = 0; s < squarings; ++s) e = dense_mul(e, e);
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    double comp = 0.0;
    for (int j = 0; j < n; ++j) {
      const double y = e[i][j] * v[j] - comp;
      const double t = acc + y;
      comp = (t - acc) - y;
      acc = t;
    }
    out[i] = acc;
  }
  return out;
}

}  // namespace testsupport
