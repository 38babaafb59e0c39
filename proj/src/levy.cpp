#include "levymfg/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "levymfg/errors.hpp"
#include "levymfg/numerics.hpp"

namespace levymfg {

namespace {

constexpr double kPi = std::numbers::pi;

// Normalization giving the stable generator the symbol -|xi|^(2s).
double stable_normalization(double two_sigma) {
  return std::tgamma(1.0 + two_sigma) * std::sin(0.5 * two_sigma * kPi) / kPi;
}

// int_a^b z^(-1-2s) dz for 0 < a < b (without the normalization constant).
double power_interval(double a, double b, double two_sigma) {
  return (std::pow(a, -two_sigma) - std::pow(b, -two_sigma)) / two_sigma;
}

}  // namespace

LevyMeasureSpec LevyMeasureSpec::stable(double two_sigma) {
  if (!(two_sigma > 0.0) || !(two_sigma < 1.0)) {
    throw ValidationError("levy: stable order 2*sigma must lie in (0, 1)");
  }
  LevyMeasureSpec s;
  s.kind_ = LevyKind::Stable;
  s.two_sigma_ = two_sigma;
  s.symmetric_at_origin_ = true;
  s.fully_symmetric_ = true;
  return s;
}

LevyMeasureSpec LevyMeasureSpec::tempered_stable(double two_sigma, double lambda) {
  if (!(two_sigma > 0.0) || !(two_sigma < 1.0)) {
    throw ValidationError("levy: tempered order 2*sigma must lie in (0, 1)");
  }
  if (!(lambda > 0.0)) {
    throw ValidationError("levy: tempering rate lambda must be positive");
  }
  LevyMeasureSpec s;
  s.kind_ = LevyKind::TemperedStable;
  s.two_sigma_ = two_sigma;
  s.lambda_ = lambda;
  s.symmetric_at_origin_ = true;
  s.fully_symmetric_ = true;
  return s;
}

LevyMeasureSpec LevyMeasureSpec::bounded_uniform(double radius, double total_mass) {
  if (!(radius > 0.0)) throw ValidationError("levy: uniform radius must be positive");
  if (!(total_mass > 0.0)) throw ValidationError("levy: uniform mass must be positive");
  LevyMeasureSpec s;
  s.kind_ = LevyKind::BoundedUniform;
  s.radius_ = radius;
  s.total_mass_ = total_mass;
  s.symmetric_at_origin_ = true;
  s.fully_symmetric_ = true;
  return s;
}

LevyMeasureSpec LevyMeasureSpec::atomic(std::vector<Atom> atoms) {
  if (atoms.empty()) throw ValidationError("levy: atomic spec needs at least one atom");
  for (const Atom& a : atoms) {
    if (a.location == 0.0) throw ValidationError("levy: atoms must sit away from zero");
    if (!(a.mass > 0.0)) throw ValidationError("levy: atom masses must be positive");
  }
  LevyMeasureSpec s;
  s.kind_ = LevyKind::Atomic;
  s.atoms_ = std::move(atoms);

  auto paired_within = [&s](double limit) {
    for (const Atom& a : s.atoms_) {
      if (std::abs(a.location) >= limit) continue;
      double want = -a.location;
      double got = 0.0;
      double have = 0.0;
      for (const Atom& b : s.atoms_) {
        if (b.location == want) got += b.mass;
        if (b.location == a.location) have += b.mass;
      }
      if (got != have) return false;
    }
    return true;
  };
  s.symmetric_at_origin_ = paired_within(1.0);
  s.fully_symmetric_ = paired_within(std::numeric_limits<double>::infinity());
  return s;
}

std::string LevyMeasureSpec::kind_name() const {
  switch (kind_) {
    case LevyKind::Stable: return "stable";
    case LevyKind::TemperedStable: return "tempered-stable";
    case LevyKind::BoundedUniform: return "bounded-uniform";
    case LevyKind::Atomic: return "atomic";
  }
  return "?";
}

double LevyMeasureSpec::density(double z) const {
  double az = std::abs(z);
  switch (kind_) {
    case LevyKind::Stable:
      return stable_normalization(two_sigma_) * std::pow(az, -1.0 - two_sigma_);
    case LevyKind::TemperedStable:
      return stable_normalization(two_sigma_) * std::exp(-lambda_ * az) *
             std::pow(az, -1.0 - two_sigma_);
    case LevyKind::BoundedUniform:
      return az <= radius_ ? total_mass_ / (2.0 * radius_) : 0.0;
    case LevyKind::Atomic:
      throw ValidationError("levy: atomic measures have no density");
  }
  return 0.0;
}

double LevyMeasureSpec::interval_mass(double a, double b) const {
  if (!(a < b) || (a < 0.0 && b > 0.0)) {
    throw ValidationError("levy: interval_mass needs a one-sided interval [a, b]");
  }
  double lo = std::min(std::abs(a), std::abs(b));
  double hi = std::max(std::abs(a), std::abs(b));
  switch (kind_) {
    case LevyKind::Stable:
      return stable_normalization(two_sigma_) * power_interval(lo, hi, two_sigma_);
    case LevyKind::TemperedStable: {
      double c = stable_normalization(two_sigma_);
      auto f = [&](double z) {
        return c * std::exp(-lambda_ * z) * std::pow(z, -1.0 - two_sigma_);
      };
      return adaptive_simpson(f, lo, hi, 1e-14 * (hi - lo) + 1e-300);
    }
    case LevyKind::BoundedUniform: {
      double l = std::max(lo, 0.0);
      double h = std::min(hi, radius_);
      return h > l ? (h - l) * total_mass_ / (2.0 * radius_) : 0.0;
    }
    case LevyKind::Atomic: {
      double m = 0.0;
      for (const Atom& at : atoms_) {
        if (a <= at.location && at.location <= b) m += at.mass;
      }
      return m;
    }
  }
  return 0.0;
}

double LevyMeasureSpec::tail_mass() const {
  switch (kind_) {
    case LevyKind::Stable:
      return 2.0 * stable_normalization(two_sigma_) / two_sigma_;
    case LevyKind::TemperedStable: {
      double reach = 1.0 + 60.0 / lambda_;
      return 2.0 * interval_mass(1.0, reach);
    }
    case LevyKind::BoundedUniform:
      return radius_ > 1.0 ? total_mass_ * (radius_ - 1.0) / radius_ : 0.0;
    case LevyKind::Atomic: {
      double m = 0.0;
      for (const Atom& a : atoms_) {
        if (std::abs(a.location) >= 1.0) m += a.mass;
      }
      return m;
    }
  }
  return 0.0;
}

double LevyMeasureSpec::small_jump_integral() const {
  switch (kind_) {
    case LevyKind::Stable:
      return 2.0 * stable_normalization(two_sigma_) *
             (1.0 / (1.0 - two_sigma_) + 1.0 / two_sigma_);
    case LevyKind::TemperedStable: {
      double c = stable_normalization(two_sigma_);
      auto f = [&](double z) {
        return c * std::exp(-lambda_ * z) * std::pow(z, -two_sigma_);
      };
      // |z| <= 1 part: integrand z * density is integrable; start from a small
      // analytic head to bypass the (weak) singularity.
      double head = c * std::pow(1e-6, 1.0 - two_sigma_) / (1.0 - two_sigma_);
      double body = adaptive_simpson(f, 1e-6, 1.0, 1e-13);
      return 2.0 * (head + body) + tail_mass();
    }
    case LevyKind::BoundedUniform: {
      double r1 = std::min(radius_, 1.0);
      double inner = total_mass_ / (2.0 * radius_) * r1 * r1;  // 2 * int_0^r1 z dz * dens
      return inner + tail_mass();
    }
    case LevyKind::Atomic: {
      double m = 0.0;
      for (const Atom& a : atoms_) m += std::min(1.0, std::abs(a.location)) * a.mass;
      return m;
    }
  }
  return 0.0;
}

double LevyMeasureSpec::concentration_integral(double p, double r) const {
  if (!(r > 0.0) || !(p > 0.0)) {
    throw ValidationError("levy: concentration integral needs p > 0, r > 0");
  }
  switch (kind_) {
    case LevyKind::Stable: {
      double c = stable_normalization(two_sigma_);
      double inside = std::pow(r, -two_sigma_) / (p - two_sigma_);
      double outside = r < 1.0 ? (std::pow(r, -two_sigma_) - 1.0) / two_sigma_ : 0.0;
      return 2.0 * c * (inside * std::pow(std::min(r, 1.0) / r, p - two_sigma_) +
                        (r < 1.0 ? outside : 0.0));
    }
    case LevyKind::TemperedStable: {
      double c = stable_normalization(two_sigma_);
      double rr = std::min(r, 1.0);
      // (z/r)^p part on [0, rr]: singular head + smooth body.
      double head_cut = std::min(rr, 1e-6);
      double head = c * std::pow(head_cut, p - two_sigma_) / ((p - two_sigma_) * std::pow(r, p));
      auto fin = [&](double z) {
        return c * std::pow(z / r, p) * std::exp(-lambda_ * z) * std::pow(z, -1.0 - two_sigma_);
      };
      double body = head_cut < rr ? adaptive_simpson(fin, head_cut, rr, 1e-13) : 0.0;
      double outer = rr < 1.0 ? interval_mass(rr, 1.0) : 0.0;
      return 2.0 * (head + body + outer);
    }
    case LevyKind::BoundedUniform: {
      double dens = total_mass_ / (2.0 * radius_);
      double cap = std::min({r, radius_, 1.0});
      double inner = dens * std::pow(r, -p) * std::pow(cap, p + 1.0) / (p + 1.0);
      double outer = dens * std::max(0.0, std::min(radius_, 1.0) - cap);
      return 2.0 * (inner + outer);
    }
    case LevyKind::Atomic: {
      double m = 0.0;
      for (const Atom& a : atoms_) {
        double az = std::abs(a.location);
        if (az < 1.0) m += std::min(1.0, std::pow(az / r, p)) * a.mass;
      }
      return m;
    }
  }
  return 0.0;
}

LevyMeasureSpec::LCheck LevyMeasureSpec::check_concentration_bound(int p_samples,
                                                                   int r_samples) const {
  LCheck out;
  double lo_p = two_sigma_ + 1e-3;
  for (int i = 0; i < p_samples; ++i) {
    double t = p_samples == 1 ? 1.0 : static_cast<double>(i) / (p_samples - 1);
    out.p_grid.push_back(lo_p + t * (1.0 - lo_p));
  }
  for (int i = 0; i < r_samples; ++i) {
    double t = r_samples == 1 ? 0.0 : static_cast<double>(i) / (r_samples - 1);
    out.r_grid.push_back(std::exp(std::log(1e-4) + t * (std::log(0.5) - std::log(1e-4))));
  }
  for (double p : out.p_grid) {
    for (double r : out.r_grid) {
      double value = (p - two_sigma_) * std::pow(r, two_sigma_) *
                     concentration_integral(p, r);
      if (!std::isfinite(value)) {
        out.finite = false;
        continue;
      }
      if (value > out.constant) {
        out.constant = value;
        out.worst_p = p;
        out.worst_r = r;
      }
    }
  }
  return out;
}

double LevyMeasureSpec::levy_constant() const {
  if (!cached_constant_) cached_constant_ = check_concentration_bound().constant;
  return *cached_constant_;
}

namespace {

// ---- periodization ---------------------------------------------------------
//
// Weight of torus cell [a0, b0) (not containing 0): sum over m in Z of
// nu([a0 + m, b0 + m]). For the heavy-tailed stable density the series decays
// only like m^(-1-2s), so the tail beyond |m| = M is summed with an
// Euler-Maclaurin correction instead of being truncated. Rapidly decaying or
// compactly supported measures use plain truncation, which is exact for them.

struct StableTail {
  // g(x) = int_{x+a}^{x+b} c z^(-1-2s) dz, evaluated for x >= M+1 with a,b
  // the (positive, after reflection) cell endpoints.
  double c, a, b, s2;
  double g(double x) const { return c * power_interval(x + a, x + b, s2); }
  double gp(double x) const {
    return -c * (std::pow(x + a, -1.0 - s2) - std::pow(x + b, -1.0 - s2));
  }
  double gppp(double x) const {
    return -c * (1.0 + s2) * (2.0 + s2) *
           (std::pow(x + a, -3.0 - s2) - std::pow(x + b, -3.0 - s2));
  }
  double integral_from(double x) const {
    // int_x^inf g = c/(2s(1-2s)) ((x+b)^(1-2s) - (x+a)^(1-2s))
    return c / (s2 * (1.0 - s2)) *
           (std::pow(x + b, 1.0 - s2) - std::pow(x + a, 1.0 - s2));
  }
  double sum_from(int m0) const {
    double x = static_cast<double>(m0);
    return integral_from(x) + 0.5 * g(x) - gp(x) / 12.0 + gppp(x) / 720.0;
  }
};

double stable_periodized_cell(double a0, double b0, double two_sigma, double c) {
  const int M = 64;
  double sum = 0.0;
  // m = 0 term; the cell is one-sided by construction.
  sum += c * power_interval(std::min(std::abs(a0), std::abs(b0)),
                            std::max(std::abs(a0), std::abs(b0)), two_sigma);
  for (int m = 1; m <= M; ++m) {
    sum += c * power_interval(a0 + m, b0 + m, two_sigma);     // right images
    sum += c * power_interval(m - b0, m - a0, two_sigma);     // left images
  }
  StableTail right{c, a0, b0, two_sigma};
  StableTail left{c, -b0, -a0, two_sigma};
  sum += right.sum_from(M + 1) + left.sum_from(M + 1);
  return sum;
}

double truncated_periodized_cell(const LevyMeasureSpec& spec, double a0, double b0,
                                 int images) {
  double sum = spec.interval_mass(std::min(a0, b0), std::max(a0, b0));
  for (int m = 1; m <= images; ++m) {
    sum += spec.interval_mass(a0 + m, b0 + m);
    sum += spec.interval_mass(a0 - m, b0 - m);
  }
  return sum;
}

}  // namespace

DiscreteOperator assemble_operator(const LevyMeasureSpec& spec, const Grid& grid) {
  const int n = grid.size();
  const double h = grid.spacing;
  DiscreteOperator op;
  op.grid = grid;
  op.weights.assign(n, 0.0);
  op.inner_cutoff = 0.5 * h;
  op.two_sigma = spec.two_sigma();
  op.measure_symmetric_at_origin = spec.symmetric_at_origin();

  switch (spec.kind()) {
    case LevyKind::Stable: {
      double c = stable_normalization(spec.two_sigma());
      // Positive offsets, then mirror: the measure is symmetric, and mirroring
      // keeps w_j == w_{n-j} bitwise.
      for (int j = 1; j <= n / 2; ++j) {
        double a0 = (j - 0.5) * h;
        double b0 = (j + 0.5) * h;
        op.weights[j] = stable_periodized_cell(a0, b0, spec.two_sigma(), c);
      }
      for (int j = 1; j < n / 2; ++j) op.weights[n - j] = op.weights[j];
      break;
    }
    case LevyKind::TemperedStable: {
      for (int j = 1; j <= n / 2; ++j) {
        double a0 = (j - 0.5) * h;
        double b0 = (j + 0.5) * h;
        op.weights[j] = truncated_periodized_cell(spec, a0, b0, 8);
      }
      for (int j = 1; j < n / 2; ++j) op.weights[n - j] = op.weights[j];
      break;
    }
    case LevyKind::BoundedUniform: {
      int images = static_cast<int>(std::ceil(spec.radius())) + 1;
      for (int j = 1; j <= n / 2; ++j) {
        double a0 = (j - 0.5) * h;
        double b0 = (j + 0.5) * h;
        op.weights[j] = truncated_periodized_cell(spec, a0, b0, images);
      }
      for (int j = 1; j < n / 2; ++j) op.weights[n - j] = op.weights[j];
      break;
    }
    case LevyKind::Atomic: {
      for (const Atom& a : spec.atoms()) {
        double t = a.location - std::floor(a.location);  // in [0, 1)
        int j = static_cast<int>(std::llround(t / h)) % n;
        if (j == 0) continue;  // lands in the dropped central cell
        op.weights[j] += a.mass;
      }
      break;
    }
  }

  KahanSum total;
  for (int j = 1; j < n; ++j) {
    if (op.weights[j] != 0.0) {
      op.nonzero.emplace_back(j, op.weights[j]);
      total.add(op.weights[j]);
    }
  }
  op.total_weight = total.value();

  op.weights_symmetric = true;
  for (int j = 1; j < n; ++j) {
    if (op.weights[j] != op.weights[(n - j) % n]) {
      op.weights_symmetric = false;
      break;
    }
  }

  op.levy_constant = spec.levy_constant();
  op.tail_mass = spec.tail_mass();
  return op;
}

std::complex<double> DiscreteOperator::fourier_symbol(int k) const {
  double re = 0.0, im = 0.0;
  const double h = grid.spacing;
  for (const auto& [j, w] : nonzero) {
    double arg = 2.0 * kPi * k * (j * h);
    re += w * (std::cos(arg) - 1.0);
    im += w * std::sin(arg);
  }
  return {re, im};
}

void apply_operator(const DiscreteOperator& op, std::span<const double> in,
                    std::span<double> out) {
  const int n = op.grid.size();
  if (static_cast<int>(in.size()) != n || static_cast<int>(out.size()) != n) {
    throw ValidationError("apply_operator: field size does not match the grid");
  }
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    double fi = in[i];
    for (const auto& [j, w] : op.nonzero) {
      int idx = i + j;
      if (idx >= n) idx -= n;
      acc += w * (in[idx] - fi);  // difference form: exact zero on constants
    }
    out[i] = acc;
  }
}

std::vector<double> apply_operator(const DiscreteOperator& op,
                                   std::span<const double> in) {
  std::vector<double> out(in.size());
  apply_operator(op, in, out);
  return out;
}

void apply_transpose(const DiscreteOperator& op, std::span<const double> in,
                     std::span<double> out) {
  const int n = op.grid.size();
  if (static_cast<int>(in.size()) != n || static_cast<int>(out.size()) != n) {
    throw ValidationError("apply_transpose: field size does not match the grid");
  }
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    double fi = in[i];
    for (const auto& [j, w] : op.nonzero) {
      int idx = i - j;
      if (idx < 0) idx += n;
      acc += w * (in[idx] - fi);
    }
    out[i] = acc;
  }
}

std::pair<DiscreteOperator, DiscreteOperator> split_operator(const DiscreteOperator& op,
                                                             double r) {
  if (!(r > 0.0) || r > 0.5) {
    throw ValidationError("split_operator: radius must lie in (0, 1/2] on the torus");
  }
  const int n = op.grid.size();
  DiscreteOperator inner = op;
  DiscreteOperator outer = op;
  inner.weights.assign(n, 0.0);
  outer.weights.assign(n, 0.0);
  inner.nonzero.clear();
  outer.nonzero.clear();
  KahanSum wi, wo;
  for (const auto& [j, w] : op.nonzero) {
    double d = op.grid.offset_distance(j);
    bool is_inner = d < r || r == 0.5;
    if (is_inner) {
      inner.weights[j] = w;
      inner.nonzero.emplace_back(j, w);
      wi.add(w);
    } else {
      outer.weights[j] = w;
      outer.nonzero.emplace_back(j, w);
      wo.add(w);
    }
  }
  inner.total_weight = wi.value();
  outer.total_weight = wo.value();
  return {inner, outer};
}

OperatorBoundsReport check_operator_bounds(const DiscreteOperator& op,
                                           std::span<const double> field, double p) {
  const double s2 = op.two_sigma;
  if (!(p > s2) || p > 1.0) {
    throw ValidationError("check_operator_bounds: need p in (2*sigma, 1]");
  }
  OperatorBoundsReport rep;
  rep.p = p;
  rep.field_sup = sup_norm(field);
  rep.field_seminorm = holder_seminorm(field, p, op.grid);

  std::vector<double> lf = apply_operator(op, field);
  rep.sup_measured = sup_norm(lf);
  double k_over = op.levy_constant / (p - s2);
  rep.sup_bound = k_over * rep.field_seminorm + 2.0 * rep.field_sup * op.tail_mass;

  double q = p - s2;  // in (0, 1 - 2s] subset of (0, 1]
  rep.seminorm_measured = holder_seminorm(lf, q, op.grid);
  rep.seminorm_bound = 2.0 * (k_over + op.tail_mass) * rep.field_seminorm;

  double scale = rep.field_sup + rep.field_seminorm;
  rep.tolerance = 10.0 * std::pow(op.grid.spacing, 1.0 - s2) * std::max(1.0, scale);
  rep.sup_ok = rep.sup_measured <= rep.sup_bound + rep.tolerance;
  rep.seminorm_ok = rep.seminorm_measured <= rep.seminorm_bound + rep.tolerance;
  return rep;
}

}  // namespace levymfg
