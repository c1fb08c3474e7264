#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bsdelab/conjugate.hpp"
#include "bsdelab/sde.hpp"
#include "bsdelab/solver.hpp"

namespace bsdelab {

struct UtilityConfig {
  double p = 2.0;
  double theta = 2.0;
  ScalarField rho = constant_field(0.0);
  ScalarField mu = constant_field(0.0);
  /// Half width of the conjugate z grid; 0 picks 10 (1 + nu).
  double z_half_width = 0.0;
  std::size_t z_nodes = 4001;
  std::size_t q_resolution = 256;
  SolverConfig solver;
};

/// Primal side: the BSDE with generator mu y - g(t, -z).
struct UtilityBsde {
  GeneratorSpec generator;
  BSDESolution solution;
  Estimate u0;
  /// Set for homogeneous d = 1 cores.
  std::shared_ptr<const ConjugateTable> table;
  Estimate xi_norm;
  Estimate h_integral_norm;
};

/// Generator mu y - g(t, x, -z) for a core, conjugated through a shared table
/// when the core is homogeneous with d = 1 and pointwise otherwise.
GeneratorSpec utility_generator(const CoreFunctionSpec& core, const UtilityConfig& config,
                                std::shared_ptr<const ConjugateTable>* table_out = nullptr);

UtilityBsde utility_via_bsde(std::span<const double> xi, const CoreFunctionSpec& core,
                             const UtilityConfig& config, const PathBatch& batch);

struct DualCandidate {
  std::string label;
  DensityProcess q;
};

struct DualRow {
  std::string label;
  Estimate value;
  /// Sample mean of L_tau; near 1 for a true martingale density.
  Estimate martingale_mean;
  bool rejected = false;  // |q| > nu somewhere
  bool flagged = false;   // non-finite weight or value
  std::string note;
};

struct DualResult {
  std::vector<DualRow> rows;
  /// Index of the smallest admissible value, or rows.size() when none.
  std::size_t best = 0;
  Estimate best_value;
};

/// E[L_tau^q (e^{int mu} xi + int e^{int mu} f(s, q_s) ds)] per candidate on
/// the same batch.
DualResult utility_via_dual(std::span<const double> xi, const CoreFunctionSpec& core,
                            const ScalarField& mu, std::span<const DualCandidate> candidates,
                            const PathBatch& batch);

/// Constant densities on a uniform grid of `n` values over [-nu, nu]
/// (homogeneous d = 1 cores).
std::vector<DualCandidate> constant_candidates(const CoreFunctionSpec& core, std::size_t n);

struct DensityCertificate {
  /// log E[exp(pbar/2 int nu^2)] at pbar = 4 and pbar = 1, and the effective
  /// sample size fraction of the pbar = 4 weights.
  double log_moment_strong = 0.0;
  double log_moment_weak = 0.0;
  double ess_fraction = 1.0;
  double h_integral_max = 0.0;
  Estimate martingale_mean;
  bool cond_i = false;
  bool cond_ii = false;
  bool cond_iii = false;
  /// "i", "ii", "iii" or "uncertified".
  std::string mode;
};

struct OptimalDensity {
  Field q;  // n_steps x d
  DensityProcess process;
  DensityCertificate certificate;
};

/// q~ at -Z per path and node, with the attainability certificate.
OptimalDensity optimal_density(const UtilityBsde& primal, const CoreFunctionSpec& core,
                               const UtilityConfig& config, const PathBatch& batch);

struct UtilityReport {
  Estimate u_bsde;
  Estimate u_dual;
  std::string q_opt;
  double gap = 0.0;
  double combined_se = 0.0;
  Estimate dual_at_optimum;
  std::string attainability_mode;
  DensityCertificate certificate;
  DualResult dual;
  std::string warning;
  /// gap <= 3 combined SE and, when certified, |dual(q~) - u_bsde| <= tolerance.
  bool consistent(double tolerance) const;
};

/// Primal, optimal density and the dual table over candidates plus q~.
UtilityReport evaluate_utility(std::span<const double> xi, const CoreFunctionSpec& core,
                               const UtilityConfig& config, const PathBatch& batch,
                               std::span<const DualCandidate> candidates);

struct AxiomRow {
  std::string axiom;
  double lambda = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // allowed noise
  bool pass = false;
};

struct AxiomReport {
  std::vector<AxiomRow> rows;
  bool pass() const;
};

/// Monotonicity (only when xi >= eta pathwise), concavity at lambda in
/// {0.25, 0.5, 0.75}, and time consistency U_0(U_{T/2}(xi)) = U_0(xi) by a
/// re-solve on [0, T/2] with terminal Y_{T/2}.
AxiomReport axiom_check(std::span<const double> xi, std::span<const double> eta,
                        const CoreFunctionSpec& core, const UtilityConfig& config,
                        const PathBatch& batch);

}  // namespace bsdelab
