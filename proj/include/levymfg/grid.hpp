#pragma once

#include <span>
#include <string>
#include <vector>

namespace levymfg {

/**
 * Uniform periodic grid on the unit torus, with a uniform time grid on [0, T].
 *
 * Space points are x_i = i*h, i = 0..n-1, h = 1/n with n a power of two, so
 * h*n == 1 holds exactly in binary floating point. Time nodes are
 * t_k = T*(k/n_t); the final node is exactly T.
 */
struct Grid {
  int dimension = 1;
  int points = 0;       // n, points per axis (d = 1 only)
  double spacing = 0;   // h = 1/n
  double horizon = 0;   // T
  int time_steps = 0;   // n_t
  double dt = 0;        // T / n_t

  static Grid make(int dimension, int points, double horizon, int time_steps);

  int size() const { return points; }
  int time_samples() const { return time_steps + 1; }
  double point(int i) const { return spacing * i; }
  double time(int k) const {
    return horizon * (static_cast<double>(k) / static_cast<double>(time_steps));
  }
  int wrap(int i) const {
    int r = i % points;
    return r < 0 ? r + points : r;
  }
  // Torus distance between grid points i and j; at most 1/2.
  double distance(int i, int j) const;
  // Signed torus representative of offset j, in (-1/2, 1/2].
  double offset_coordinate(int j) const;
  // |offset_coordinate(j)|.
  double offset_distance(int j) const;
};

/** Dense samples of a scalar function of (t, x) on the grid, row-major in time. */
struct SpaceTimeField {
  int time_slices = 0;  // number of stored time levels (usually n_t + 1)
  int space_points = 0;
  std::vector<double> values;
  std::string label;

  static SpaceTimeField zeros(int time_slices, int space_points, std::string label);
  static SpaceTimeField constant(int time_slices, int space_points, double value,
                                 std::string label);

  double& at(int k, int i) { return values[static_cast<std::size_t>(k) * space_points + i]; }
  double at(int k, int i) const {
    return values[static_cast<std::size_t>(k) * space_points + i];
  }
  std::span<double> slice(int k) {
    return {values.data() + static_cast<std::size_t>(k) * space_points,
            static_cast<std::size_t>(space_points)};
  }
  std::span<const double> slice(int k) const {
    return {values.data() + static_cast<std::size_t>(k) * space_points,
            static_cast<std::size_t>(space_points)};
  }
};

/**
 * Grid Hölder seminorm sup_{i != j} |f_i - f_j| / d(i,j)^alpha, with d the
 * torus distance. All pair distances on the unit torus are <= 1/2, so the
 * unit-ball window in the continuum definition never truncates anything here.
 * Exact O(n^2) scan; fields up to a few thousand points are fine.
 */
double holder_seminorm(std::span<const double> field, double alpha, const Grid& grid);

double holder_norm(std::span<const double> field, double alpha, const Grid& grid);

struct HolderFit {
  double exponent = 0.0;    // slope of log max-increment vs log distance
  double r2 = 0.0;
  double seminorm = 0.0;    // seminorm evaluated at the measured exponent
  bool degenerate = false;  // constant field
};

/**
 * Empirical Hölder exponent of a grid field: regress log S(d) on log d over
 * dyadic separations d in [2h, 1/4], where S(d) is the max increment at
 * separation d.
 */
HolderFit measure_holder_exponent(std::span<const double> field, const Grid& grid);

/** Smooth pseudo-random test field: a few low Fourier modes with decaying amplitudes. */
std::vector<double> random_smooth_field(const Grid& grid, std::uint64_t seed,
                                        int max_mode = 8, double decay = 2.0);

}  // namespace levymfg
