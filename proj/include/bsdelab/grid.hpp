#pragma once

#include <cstddef>
#include <vector>

namespace bsdelab {

struct TimeGrid {
  double t0 = 0.0;
  double horizon = 0.0;
  std::size_t n_steps = 0;
  std::vector<double> times;

  std::size_t n_nodes() const { return n_steps + 1; }
  double dt(std::size_t j) const { return times[j + 1] - times[j]; }
  /// Largest node index with times[j] <= t (clamped to the grid).
  std::size_t index_at_or_before(double t) const;
};

/// Uniform partition of [t0, T] into n_steps steps.
TimeGrid build_grid(double t0, double T, std::size_t n_steps);

/// The first n_steps steps of `grid`.
TimeGrid truncate_grid(const TimeGrid& grid, std::size_t n_steps);

}  // namespace bsdelab
