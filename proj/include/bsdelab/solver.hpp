#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bsdelab/generator.hpp"
#include "bsdelab/norms.hpp"
#include "bsdelab/paths.hpp"

namespace bsdelab {

enum class ZEstimator {
  /// Y_{j+1} regressed jointly on [phi(X_j), phi(X_j) dB_j / sqrt(dt)]; the
  /// second block gives Z. Exact for targets linear in dB.
  kMartingaleRegression,
  /// Z_j = E[Y_{j+1} dB_j] / dt regressed on phi(X_j) alone.
  kIncrementProduct,
};

struct SolverConfig {
  int basis_degree = 3;
  double picard_tol = 1e-6;
  int max_picard = 30;
  ZEstimator z_estimator = ZEstimator::kMartingaleRegression;
  /// Y_j = E_j + g(Y_j, ...) dt. Scalar equations are solved by a bracketed
  /// root search; systems use `implicit_substeps` fixed-point sweeps.
  bool implicit_y = true;
  int implicit_substeps = 1;
  double ridge = 1e-10;
  /// Refuse coefficient sets that violate the structural condition.
  bool check_structure = true;
};

struct BSDESolution {
  std::size_t k = 1;
  std::size_t d = 1;
  Field Y;  // n_nodes x k
  Field Z;  // n_steps x (k d)
  WeightedNormReport norms;
  int picard_iterations = 0;
  bool converged = true;
  std::vector<double> picard_distances;
  double residual = 0.0;  // max |Y at stop - xi|
  /// Y_0 per component with SE from the pathwise sum xi + sum g dt.
  std::vector<Estimate> y0;
};

/// One backward sweep with the z argument of the generator frozen at V
/// (n_steps x kd; an empty Field means V = 0). `xi` is [n_paths x k].
BSDESolution backward_euler_pass(const GeneratorSpec& gen, std::span<const double> xi,
                                 const Field& V, const PathBatch& batch, const SolverConfig& config);

/// Iterates V <- Z(backward_euler_pass(V)) from V = 0 until the M^2(rho)
/// distance of successive iterates falls below picard_tol.
BSDESolution picard_solve(const GeneratorSpec& gen, std::span<const double> xi,
                          const PathBatch& batch, const SolverConfig& config);

/// mean_i sum_{j < stop_i} e^{2 int_0^{t_j} rho} |A_j - B_j|^2 dt_j.
double m2_distance_sq(const Field& A, const Field& B, const Field& rho_integral,
                      const PathBatch& batch);

/// ||Phi(V1) - Phi(V2)||^2 / ||V1 - V2||^2 in M^2(rho) on the same batch.
double contraction_ratio(const GeneratorSpec& gen, std::span<const double> xi, const Field& V1,
                         const Field& V2, const PathBatch& batch, const SolverConfig& config);

/// Weighted norms of (xi, Y, Z) with the generator's rho and p.
WeightedNormReport solution_norms(const GeneratorSpec& gen, std::span<const double> xi,
                                  const BSDESolution& sol, const PathBatch& batch);

}  // namespace bsdelab
