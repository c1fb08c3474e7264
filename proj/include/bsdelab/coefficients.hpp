#pragma once

#include <cstddef>

#include "bsdelab/paths.hpp"

namespace bsdelab {

/// Weight process rho, monotonicity process mu and Lipschitz process nu
/// together with the integrability exponent p and the margin theta.
struct CoefficientSpec {
  double p = 2.0;
  double theta = 2.0;
  ScalarField rho = constant_field(0.0);
  ScalarField mu = constant_field(0.0);
  ScalarField nu = constant_field(0.0);

  /// theta / (2 [1 ^ (p - 1)]).
  double nu_factor() const;
  /// rho - mu - nu_factor() nu^2 at one point.
  double margin(double t, std::span<const double> x) const;
};

CoefficientSpec constant_coefficients(double p, double theta, double rho, double mu, double nu);

struct StructuralReport {
  bool pass = false;
  double worst_margin = 0.0;
  std::size_t worst_path = 0;
  std::size_t worst_node = 0;
  /// Trapezoid value of int_0^tau (|rho| + |mu| + nu^2) is finite on every path.
  bool integrals_finite = true;
};

StructuralReport check_structural_condition(const CoefficientSpec& spec, const PathBatch& batch,
                                            double tolerance = 1e-12);

}  // namespace bsdelab
