#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "levymfg/grid.hpp"

namespace levymfg {

enum class LevyKind { Stable, TemperedStable, BoundedUniform, Atomic };

struct Atom {
  double location = 0.0;  // jump size, must be nonzero
  double mass = 0.0;      // must be positive
};

/**
 * Description of a pure-jump Lévy measure nu on the real line with
 * int (1 ^ |z|) nu(dz) < inf and order 2*sigma in [0, 1).
 *
 *  - Stable:         nu(dz) = c(2s) |z|^(-1-2s) dz, normalized so the generator
 *                    has Fourier symbol -|xi|^(2s); c(2s) = Gamma(1+2s) sin(s*pi)/pi.
 *  - TemperedStable: nu(dz) = c(2s) exp(-lambda |z|) |z|^(-1-2s) dz.
 *  - BoundedUniform: uniform density of given total mass on [-radius, radius].
 *  - Atomic:         finite sum of point masses.
 *
 * The order parameter is 2*sigma; bounded and atomic measures have order 0.
 */
class LevyMeasureSpec {
 public:
  static LevyMeasureSpec stable(double two_sigma);
  static LevyMeasureSpec tempered_stable(double two_sigma, double lambda);
  static LevyMeasureSpec bounded_uniform(double radius, double total_mass);
  static LevyMeasureSpec atomic(std::vector<Atom> atoms);

  LevyKind kind() const { return kind_; }
  double two_sigma() const { return two_sigma_; }
  double lambda() const { return lambda_; }
  double radius() const { return radius_; }
  double total_mass() const { return total_mass_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::string kind_name() const;

  // Symmetry of the restriction to the open unit ball (the notion the
  // sharper exponent bounds use) and of the whole measure.
  bool symmetric_at_origin() const { return symmetric_at_origin_; }
  bool fully_symmetric() const { return fully_symmetric_; }

  // Density at z != 0; only valid for the three density kinds.
  double density(double z) const;
  // nu([a, b]) for an interval with 0 < a < b or a < b < 0.
  double interval_mass(double a, double b) const;
  // nu({|z| >= 1}).
  double tail_mass() const;
  // int (1 ^ |z|) nu(dz); finite for every accepted spec.
  double small_jump_integral() const;
  // int_{B_1} (1 ^ |z|^p / r^p) nu(dz).
  double concentration_integral(double p, double r) const;

  // Smallest K responsible for the concentration bound
  //   concentration_integral(p, r) <= K/(p - 2s) * r^(-2s)
  // over the sampled (p, r) ranges p in (2s, 1], r in (0, 1/2]. Cached.
  double levy_constant() const;

  struct LCheck {
    double constant = 0.0;           // estimated K
    double worst_p = 0.0;
    double worst_r = 0.0;
    bool finite = true;
    std::vector<double> p_grid, r_grid;
  };
  // Scan of the concentration bound. Radii are capped at 1/2: that is the
  // largest ball that embeds in the torus, so larger radii are untestable here.
  LCheck check_concentration_bound(int p_samples = 12, int r_samples = 25) const;

 private:
  LevyMeasureSpec() = default;

  LevyKind kind_ = LevyKind::Stable;
  double two_sigma_ = 0.0;
  double lambda_ = 0.0;
  double radius_ = 0.0;
  double total_mass_ = 0.0;
  std::vector<Atom> atoms_;
  bool symmetric_at_origin_ = false;
  bool fully_symmetric_ = false;
  mutable std::optional<double> cached_constant_;
};

/**
 * Discrete nonlocal operator on the periodic grid:
 *
 *   (L_h f)_i = sum_{j != 0} w_j (f_{i+j} - f_i),   w_j >= 0.
 *
 * Weights are per-cell masses of the periodized measure: cell j covers
 * [z_j - h/2, z_j + h/2) around z_j = offset_coordinate(j), and the mass of
 * every integer translate of that cell is folded in. The innermost cell
 * |z| < h/2 is dropped (an O(h^(1-2s)) consistency error); jumps that land in
 * it act trivially on the torus anyway. Row sums are zero by construction,
 * since the diagonal is implicit in the difference form.
 */
struct DiscreteOperator {
  Grid grid;
  std::vector<double> weights;                    // index = offset, weights[0] == 0
  std::vector<std::pair<int, double>> nonzero;    // (offset, weight), increasing offset
  double total_weight = 0.0;                      // W = sum of weights
  double inner_cutoff = 0.0;                      // h/2
  double two_sigma = 0.0;
  bool weights_symmetric = false;                 // w_j == w_{n-j} exactly
  bool measure_symmetric_at_origin = false;       // from the spec
  double levy_constant = 0.0;                     // K of the underlying spec
  double tail_mass = 0.0;                         // nu(B_1^c) of the underlying spec

  // Fourier multiplier of the operator on mode k: L_h e(kx) = symbol(k) e(kx).
  std::complex<double> fourier_symbol(int k) const;
};

DiscreteOperator assemble_operator(const LevyMeasureSpec& spec, const Grid& grid);

void apply_operator(const DiscreteOperator& op, std::span<const double> in,
                    std::span<double> out);
std::vector<double> apply_operator(const DiscreteOperator& op, std::span<const double> in);

// Action of the transpose matrix: (L_h^T v)_k = sum_j w_j (v_{k-j} - v_k).
// Column sums of L_h are zero, so this also annihilates constants exactly.
void apply_transpose(const DiscreteOperator& op, std::span<const double> in,
                     std::span<double> out);

/**
 * Partition the weights into jumps shorter than r and jumps of length >= r
 * (by cell center, torus distance). Accepts r in (0, 1/2]. At r = 1/2 the
 * antipodal cell counts as inner: the complement of the radius-1/2 ball on the
 * torus is a single point of measure zero, so nothing qualifies as outer.
 */
std::pair<DiscreteOperator, DiscreteOperator> split_operator(const DiscreteOperator& op,
                                                             double r);

struct OperatorBoundsReport {
  double p = 0.0;
  double field_sup = 0.0;
  double field_seminorm = 0.0;    // [f]_p
  double sup_measured = 0.0;      // ||L_h f||_inf
  double sup_bound = 0.0;         // K/(p-2s) [f]_p + 2 ||f||_inf nu(B_1^c)
  double seminorm_measured = 0.0; // [L_h f]_{p-2s}
  double seminorm_bound = 0.0;    // 2 (K/(p-2s) + nu(B_1^c)) [f]_p
  double tolerance = 0.0;         // 10 h^(1-2s) max(1, field scale)
  bool sup_ok = false;
  bool seminorm_ok = false;
};

// Checks the sup-norm and Hölder bounds for the nonlocal operator against the
// measure's constants K and nu(B_1^c), with a discretization tolerance.
OperatorBoundsReport check_operator_bounds(const DiscreteOperator& op,
                                           std::span<const double> field, double p);

}  // namespace levymfg
