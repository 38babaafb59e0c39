#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace levymfg {

// Compensated accumulator for long sums whose result is much smaller than the
// individual terms (mass defects, pairings).
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

double kahan_total(std::span<const double> xs);

// Adaptive Simpson quadrature. The integrand must be finite on [a, b].
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 40);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  bool degenerate = false;  // all responses equal (or fewer than 2 points)
};

LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys);

// SplitMix64: tiny counter-friendly PRNG. Streams are derived by hashing a
// (seed, stream) pair, so path-level streams are independent of worker layout.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  SplitMix64(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double next_double();                      // uniform on [0, 1)
  double uniform(double lo, double hi);
  double exponential();                      // rate 1
  int poisson(double mean);

 private:
  std::uint64_t state_;
};

double sup_norm(std::span<const double> xs);
double sup_abs_diff(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> xs);

// Fixed-format float for CSV: 17 significant digits, round-trip safe.
std::string format_g17(double x);

}  // namespace levymfg
