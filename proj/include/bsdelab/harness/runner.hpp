#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsdelab/generator.hpp"
#include "bsdelab/harness/report.hpp"
#include "bsdelab/harness/scenario.hpp"
#include "bsdelab/solver.hpp"

namespace bsdelab::harness {

struct RunOptions {
  /// Artifacts (CSV tables) are written here when non-empty.
  std::string out_dir;
};

/// Executes the scenario pipeline. Usage errors propagate; numeric failures
/// become a failed "run" check. Every expectation receives a verdict.
RunReport run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Brownian or scalar-SDE batch from "grid", "batch", "state", "stopping" and
/// "augment".
PathBatch build_batch(const Node& root, std::uint64_t seed);

/// p, theta, rho, mu, nu; rho defaults to mu + theta nu^2 / (2 [1 ^ (p-1)]).
CoefficientSpec build_coefficients(const Node& node);

/// Generator from "generator" (one expression per component), with `coeffs`
/// as its declared envelopes.
GeneratorSpec build_generator(const Node& root, const CoefficientSpec& coeffs, std::size_t d,
                              std::size_t state_dim);

SolverConfig build_solver(const Node& node);

/// xi[i * k + c] = terminal[c](tau_i, X_tau_i).
std::vector<double> build_terminal(const std::vector<Expr>& terminal, const PathBatch& batch);

}  // namespace bsdelab::harness
