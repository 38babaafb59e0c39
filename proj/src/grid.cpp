#include "levymfg/grid.hpp"

#include <cmath>
#include <numbers>

#include "levymfg/errors.hpp"
#include "levymfg/numerics.hpp"

namespace levymfg {

Grid Grid::make(int dimension, int points, double horizon, int time_steps) {
  if (dimension != 1) {
    throw ValidationError(
        "grid.d: only d = 1 is supported in this build (d = 2 not implemented)");
  }
  if (points < 4 || (points & (points - 1)) != 0) {
    throw ValidationError("grid.n: points per axis must be a power of two, >= 4");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ValidationError("grid.T: horizon must be positive and finite");
  }
  if (time_steps < 1) {
    throw ValidationError("grid.nt: need at least one time step");
  }
  Grid g;
  g.dimension = dimension;
  g.points = points;
  g.spacing = 1.0 / static_cast<double>(points);
  g.horizon = horizon;
  g.time_steps = time_steps;
  g.dt = horizon / static_cast<double>(time_steps);
  return g;
}

double Grid::distance(int i, int j) const {
  int d = std::abs(i - j) % points;
  d = std::min(d, points - d);
  return spacing * d;
}

double Grid::offset_coordinate(int j) const {
  int r = wrap(j);
  if (r > points / 2) r -= points;
  return spacing * r;
}

double Grid::offset_distance(int j) const { return std::abs(offset_coordinate(j)); }

SpaceTimeField SpaceTimeField::zeros(int time_slices, int space_points,
                                     std::string label) {
  SpaceTimeField f;
  f.time_slices = time_slices;
  f.space_points = space_points;
  f.values.assign(static_cast<std::size_t>(time_slices) * space_points, 0.0);
  f.label = std::move(label);
  return f;
}

SpaceTimeField SpaceTimeField::constant(int time_slices, int space_points, double value,
                                        std::string label) {
  SpaceTimeField f = zeros(time_slices, space_points, std::move(label));
  for (double& v : f.values) v = value;
  return f;
}

double holder_seminorm(std::span<const double> field, double alpha, const Grid& grid) {
  const int n = grid.size();
  if (static_cast<int>(field.size()) != n) {
    throw ValidationError("holder_seminorm: field size does not match the grid");
  }
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw ValidationError("holder_seminorm: exponent must lie in (0, 1]");
  }
  // Precompute d^alpha per separation; scan all pairs via (i, i+m).
  std::vector<double> dpow(n / 2 + 1, 0.0);
  for (int m = 1; m <= n / 2; ++m) dpow[m] = std::pow(grid.spacing * m, alpha);
  double best = 0.0;
  for (int m = 1; m <= n / 2; ++m) {
    double inv = 1.0 / dpow[m];
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      int j = i + m;
      if (j >= n) j -= n;
      double diff = std::abs(field[i] - field[j]);
      if (diff > worst) worst = diff;
    }
    best = std::max(best, worst * inv);
  }
  return best;
}

double holder_norm(std::span<const double> field, double alpha, const Grid& grid) {
  return sup_norm(field) + holder_seminorm(field, alpha, grid);
}

HolderFit measure_holder_exponent(std::span<const double> field, const Grid& grid) {
  const int n = grid.size();
  HolderFit fit;
  std::vector<double> logd, logs;
  double global_max = 0.0;
  // Bounded fields saturate once the separation reaches a fraction of the
  // period, which flattens the log-log curve, so the fit stays inside the
  // scaling region. Small grids keep at least three dyadic points.
  const int cap = std::max(8, n / 16);
  for (int m = 2; m <= cap; m *= 2) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      int j = i + m;
      if (j >= n) j -= n;
      worst = std::max(worst, std::abs(field[i] - field[j]));
    }
    global_max = std::max(global_max, worst);
    if (worst > 0.0) {
      logd.push_back(std::log(grid.spacing * m));
      logs.push_back(std::log(worst));
    }
  }
  if (global_max == 0.0 || logd.size() < 2) {
    fit.degenerate = true;
    return fit;
  }
  LinearFit lf = linear_fit(logd, logs);
  fit.exponent = lf.slope;
  fit.r2 = lf.r2;
  fit.degenerate = lf.degenerate;
  if (fit.exponent > 0.0 && fit.exponent <= 1.0) {
    fit.seminorm = holder_seminorm(field, fit.exponent, grid);
  }
  return fit;
}

std::vector<double> random_smooth_field(const Grid& grid, std::uint64_t seed,
                                        int max_mode, double decay) {
  SplitMix64 rng(seed, 0x5eedf1e1dULL);
  const int n = grid.size();
  std::vector<double> out(n, 0.0);
  for (int k = 1; k <= max_mode; ++k) {
    double amp = std::pow(static_cast<double>(k), -decay);
    double a = amp * rng.uniform(-1.0, 1.0);
    double b = amp * rng.uniform(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
      double arg = 2.0 * std::numbers::pi * k * grid.point(i);
      out[i] += a * std::cos(arg) + b * std::sin(arg);
    }
  }
  return out;
}

}  // namespace levymfg
