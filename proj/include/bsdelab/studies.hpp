#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bsdelab/solver.hpp"

namespace bsdelab {

/// Process f_t of the a priori estimate, evaluated per node.
using NodeFunction = std::function<double(const NodeView& node)>;

struct TruncationRow {
  double n = 0.0;
  Estimate dy;    // ||y^{2n} - y^n||_{S^p;rho}
  Estimate dz;    // ||z^{2n} - z^n||_{M^p;rho}
  Estimate tail;  // ||xi 1_{|xi| > n gamma_tau}||_{p;rho}
  bool active = false;  // truncation at level n touched some path
};

/// Solves BSDE(xi_n, g^n) for every n and 2n and tabulates the Cauchy
/// differences. Uses gen.coeffs.rho and gen.coeffs.p.
std::vector<TruncationRow> truncation_study(const GeneratorSpec& gen, std::span<const double> xi,
                                            std::span<const double> n_values,
                                            const PathBatch& batch, const SolverConfig& config);

struct AprioriReport {
  double lhs = 0.0;  // ||Y||^p_{S} + ||Z||^p_{M}
  double rhs = 0.0;  // ||xi||^p + E[(int e^{int rho} f)^p]
  double ratio = 0.0;
};

AprioriReport apriori_report(const GeneratorSpec& gen, std::span<const double> xi,
                             const BSDESolution& solution, const NodeFunction& f,
                             const PathBatch& batch);

struct DependenceReport {
  double numerator = 0.0;    // ||dY||^p_S + ||dZ||^p_M
  double denominator = 0.0;  // ||dxi||^p + E[(int e^{int rho} |g - g'|(Y', Z'))^p]
  double ratio = 0.0;        // 0 when both vanish
  Estimate y0_difference;
};

DependenceReport continuous_dependence_check(const GeneratorSpec& gen, const GeneratorSpec& gen2,
                                             std::span<const double> xi, std::span<const double> xi2,
                                             const PathBatch& batch, const SolverConfig& config);

/// Same quantities for two already computed solutions.
DependenceReport compare_solutions(const GeneratorSpec& gen, const GeneratorSpec& gen2,
                                   std::span<const double> xi, std::span<const double> xi2,
                                   const BSDESolution& a, const BSDESolution& b,
                                   const PathBatch& batch);

struct StabilityRow {
  std::size_t index = 0;
  double distance = 0.0;  // ||Y_n - Y||_S + ||Z_n - Z||_M
  double y0_gap = 0.0;
};

std::vector<StabilityRow> stability_check(std::span<const GeneratorSpec> gen_sequence,
                                          std::span<const std::vector<double>> xi_sequence,
                                          const GeneratorSpec& gen, std::span<const double> xi,
                                          const PathBatch& batch, const SolverConfig& config);

struct DivergenceRow {
  double T = 0.0;
  std::size_t n_steps = 0;
  double y0 = 0.0;
  double oracle = 0.0;  // c e^{-T}
  double rel_error = 0.0;
};

struct DivergenceStudy {
  double c = 1.0;
  std::vector<DivergenceRow> rows;
  /// Y_0(T) strictly decreasing in |.| and the last value below c e^{-1}.
  bool decays = false;
};

/// g = -y, xi = c on growing horizons; Y_0(T) tends to 0 although xi = c.
DivergenceStudy horizon_divergence_study(std::span<const double> T_values, double c = 1.0,
                                       std::size_t steps_per_unit = 256, std::size_t n_paths = 64,
                                       std::uint64_t seed = 1, const SolverConfig& config = {});

/// Generator g(y) = -y with rho = mu = nu = 0.
GeneratorSpec decay_generator();

}  // namespace bsdelab
