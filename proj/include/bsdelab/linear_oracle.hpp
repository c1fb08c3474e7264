#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bsdelab/coefficients.hpp"
#include "bsdelab/parallel.hpp"
#include "bsdelab/paths.hpp"

namespace bsdelab {

/// Linear BSDE y_t = xi + int (mu y + nu . z) ds - int z dB. `coeffs.rho`
/// is the caller's weight; coeffs.nu is the d = 1 coefficient unless
/// `nu_vector` gives one component per Brownian dimension.
struct LinearScenario {
  CoefficientSpec coeffs;
  std::vector<ScalarField> nu_vector;
};

struct LinearValue {
  Estimate y0;
  std::vector<std::size_t> nodes;  // nodes at which y_t was estimated
  Field y;                         // n_paths x nodes.size()
};

/// y_t = E[xi e^{int_t^tau mu + int_t^tau nu dB - 1/2 int_t^tau |nu|^2} | F_t]:
/// y_0 by reweighted Monte Carlo, y_t at the requested nodes by polynomial
/// regression of the reweighted tail. Throws an ill-posed-scenario error when
/// the structural condition (with the caller's p, theta) fails or a log
/// weight is not finite.
LinearValue linear_bsde_value(const LinearScenario& scenario, std::span<const double> xi,
                              const PathBatch& batch, std::span<const std::size_t> nodes = {},
                              int degree = 3);

struct MarginRow {
  double theta_prime = 1.0;
  Estimate sup_moment;       // E[sup_t e^{p int_0^t rho} |y_t|^p]
  Estimate terminal_moment;  // E[e^{p int_0^T rho} |xi|^p]
  /// E[sup - terminal] per path, the excess of the sup over the terminal node
  Estimate sup_excess;
};

struct MarginStudy {
  double p = 2.0;
  std::vector<MarginRow> rows;
  /// Doob L^r constant (r/(r-1))^r with r = p / (1 + (p-1)/theta') per row,
  /// zero for theta' <= 1 where the maximal inequality gives nothing.
  std::vector<double> doob_constant;
  /// Same-sample differences sup(theta'_i) - sup(theta'_0) per path.
  std::vector<Estimate> paired_difference;
};

/// xi = exp((1/(p-1)) int b dB - ((2p-1)/(2(p-1)^2)) int b^2) with mu = 0,
/// nu = b and rho = theta' b^2 / (2(p-1)). y is estimated at every node.
MarginStudy supnorm_margin_study(const ScalarField& b, double p, std::span<const double> theta_values,
                                 const PathBatch& batch, int degree = 3);

}  // namespace bsdelab
