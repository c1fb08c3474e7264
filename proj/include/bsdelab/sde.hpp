#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bsdelab/paths.hpp"

namespace bsdelab {

/// n_paths independent d-dimensional Brownian paths on `grid`, started at 0.
/// Path i depends only on (seed, i). States hold B itself; stop_index is the
/// last node.
PathBatch simulate_brownian(std::size_t n_paths, const TimeGrid& grid, std::size_t d,
                            std::uint64_t seed);

/// The same Brownian paths on a grid with `factor` times fewer steps:
/// increments are summed in consecutive groups, so B at the shared nodes is
/// identical. Needs a plain Brownian batch (states = B, no stopping).
PathBatch coarsen_brownian(const PathBatch& fine, std::size_t factor);

struct DriftDiffusionSpec {
  std::size_t state_dim = 1;
  std::size_t noise_dim = 1;
  /// b(t, x) -> out[state_dim]
  std::function<void(double t, std::span<const double> x, std::span<double> out)> drift;
  /// sigma(t, x) -> out[state_dim x noise_dim], row-major
  std::function<void(double t, std::span<const double> x, std::span<double> out)> diffusion;
  std::vector<double> x0;
  double lipschitz = 0.0;  // declared K1, informational
};

/// Scalar diffusion dX = b(t,X) dt + s(t,X) dB from x0.
DriftDiffusionSpec scalar_diffusion(std::function<double(double, double)> b,
                                    std::function<double(double, double)> s, double x0);

/// Euler-Maruyama states driven by the increments of `driver`. The result
/// keeps the driver's increments; stop indices are reset to the last node.
PathBatch euler_maruyama(const DriftDiffusionSpec& spec, const PathBatch& driver);

/// First node with states[component] outside the open interval (a, b), else
/// the last node at or before t_max. States beyond the stop are frozen.
void first_exit_time(PathBatch& batch, double a, double b, double t_max, std::size_t component = 0);

/// Density process q(t, x) -> out[d] evaluated at the left end of each step.
using DensityProcess = std::function<void(const NodeView& node, std::span<double> out)>;

DensityProcess constant_density(std::vector<double> q);

/// Stochastic exponential L^q in log space, one value per node, frozen after
/// each path's stop index.
struct GirsanovWeightPath {
  Field log_L;  // width 1

  double L(std::size_t i, std::size_t j) const;
  /// L at the stopping node of path i.
  double terminal(const PathBatch& batch, std::size_t i) const;
  double log_terminal(const PathBatch& batch, std::size_t i) const;
};

/// Builds L^q. Throws a core-domain violation when |q| exceeds nu + 1e-12 at
/// a sampled node.
GirsanovWeightPath girsanov_weights(const DensityProcess& q, const ScalarField& nu,
                                    const PathBatch& batch);

}  // namespace bsdelab
