#include "bsdelab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "bsdelab/errors.hpp"

namespace bsdelab {

std::size_t TimeGrid::index_at_or_before(double t) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(horizon));
  auto it = std::upper_bound(times.begin(), times.end(), t + tol);
  if (it == times.begin()) return 0;
  return static_cast<std::size_t>(it - times.begin()) - 1;
}

TimeGrid build_grid(double t0, double T, std::size_t n_steps) {
  if (!(T > t0) || !std::isfinite(T) || !std::isfinite(t0))
    throw Error(ErrorKind::kConfiguration, "time grid needs T > t0");
  if (n_steps == 0) throw Error(ErrorKind::kConfiguration, "time grid needs at least one step");
  TimeGrid grid;
  grid.t0 = t0;
  grid.horizon = T;
  grid.n_steps = n_steps;
  grid.times.resize(n_steps + 1);
  const double h = (T - t0) / static_cast<double>(n_steps);
  for (std::size_t j = 0; j <= n_steps; ++j) grid.times[j] = t0 + h * static_cast<double>(j);
  grid.times[n_steps] = T;
  return grid;
}

TimeGrid truncate_grid(const TimeGrid& grid, std::size_t n_steps) {
  if (n_steps == 0 || n_steps > grid.n_steps)
    throw Error(ErrorKind::kConfiguration, "grid truncation out of range");
  TimeGrid out;
  out.t0 = grid.t0;
  out.n_steps = n_steps;
  out.times.assign(grid.times.begin(), grid.times.begin() + static_cast<long>(n_steps) + 1);
  out.horizon = out.times.back();
  return out;
}

}  // namespace bsdelab
