#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "bsdelab/fd.hpp"
#include "bsdelab/solver.hpp"

namespace bsdelab {

struct BatchConfig {
  std::size_t n_paths = 100000;
  /// Steps per unit of time.
  double steps_per_unit = 64.0;
  std::uint64_t seed = 1;
};

struct SurfacePoint {
  double t = 0.0;
  double x = 0.0;
  Estimate u;
  int picard_iterations = 0;
  std::size_t capped_paths = 0;  // elliptic: paths still inside at the cap
};

/// u(t, x) = Y_t^{t,x}: forward Euler paths from (t, x), then picard_solve.
/// Points with t >= T return h(x) exactly.
std::vector<SurfacePoint> bsde_surface(const ParabolicProblem& problem,
                                       std::span<const std::pair<double, double>> points,
                                       const BatchConfig& batch, const SolverConfig& solver);

/// u(x) = Y_0^x with the first exit time from (a, b) capped at t_max. The
/// monitored barriers sit 0.5826 sigma sqrt(dt) inside the interval to offset
/// discrete monitoring. Paths still inside at the cap take the boundary value
/// of the nearer end.
std::vector<SurfacePoint> bsde_surface(const EllipticProblem& problem, std::span<const double> xs,
                                       const BatchConfig& batch, const SolverConfig& solver);

struct FkRow {
  double t = 0.0;
  double x = 0.0;
  double u_fd = 0.0;
  double u_bsde = 0.0;
  double se = 0.0;
  double diff = 0.0;  // u_bsde - u_fd
};

struct FkComparison {
  std::vector<FkRow> rows;
  double max_abs_diff = 0.0;
  double mean_abs_diff = 0.0;
  /// |diff| <= abs_tol + n_se * se on every row.
  bool within(double abs_tol, double n_se) const;
};

FkComparison fk_compare(const FDSolution& fd, std::span<const SurfacePoint> surface);

struct GrowthCheck {
  double C = 0.0;
  double q = 0.0;
  double fitted_slope = 0.0;  // least-squares slope of log|u| on log(1 + |x|)
  double worst_ratio = 0.0;   // max |u| / (C (1 + |x|^q))
  bool pass = false;
};

/// |u(t, x)| <= C (1 + |x|^q) at every sample point.
GrowthCheck growth_bound_check(std::span<const SurfacePoint> surface, double C, double q);

/// CSV with header t,x,u_fd,u_bsde,se,diff and 10 significant digits.
void write_fk_csv(std::ostream& out, std::span<const FkRow> rows);

}  // namespace bsdelab
