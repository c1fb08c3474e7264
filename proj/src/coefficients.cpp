#include "bsdelab/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bsdelab/errors.hpp"
#include "bsdelab/parallel.hpp"

namespace bsdelab {

double CoefficientSpec::nu_factor() const { return theta / (2.0 * std::min(1.0, p - 1.0)); }

double CoefficientSpec::margin(double t, std::span<const double> x) const {
  const double n = nu(t, x);
  return rho(t, x) - mu(t, x) - nu_factor() * n * n;
}

CoefficientSpec constant_coefficients(double p, double theta, double rho, double mu, double nu) {
  if (!(p > 1.0) || !(theta > 1.0))
    throw Error(ErrorKind::kConfiguration, "coefficients need p > 1 and theta > 1");
  if (nu < 0.0) throw Error(ErrorKind::kConfiguration, "nu must be nonnegative");
  CoefficientSpec spec;
  spec.p = p;
  spec.theta = theta;
  spec.rho = constant_field(rho);
  spec.mu = constant_field(mu);
  spec.nu = constant_field(nu);
  return spec;
}

StructuralReport check_structural_condition(const CoefficientSpec& spec, const PathBatch& batch,
                                            double tolerance) {
  const std::size_t n = batch.n_paths;
  std::vector<double> worst(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> worst_node(n, 0);
  std::vector<char> finite(n, 1);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < n; ++i) {
    double integral = 0.0;
    double prev = 0.0;
    for (std::size_t j = 0; j <= batch.stop_index[i]; ++j) {
      const double t = batch.grid.times[j];
      const auto x = batch.state_row(i, j);
      const double r = spec.rho(t, x), m = spec.mu(t, x), v = spec.nu(t, x);
      const double margin = r - m - spec.nu_factor() * v * v;
      if (margin < worst[i] || std::isnan(margin)) {
        worst[i] = margin;
        worst_node[i] = j;
      }
      const double density = std::abs(r) + std::abs(m) + v * v;
      if (j > 0) integral += 0.5 * (prev + density) * batch.grid.dt(j - 1);
      prev = density;
    }
    finite[i] = std::isfinite(integral) ? 1 : 0;
  }
  StructuralReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (worst[i] < report.worst_margin || std::isnan(worst[i])) {
      report.worst_margin = worst[i];
      report.worst_path = i;
      report.worst_node = worst_node[i];
    }
    if (!finite[i]) report.integrals_finite = false;
  }
  report.pass = report.worst_margin >= -tolerance && report.integrals_finite;
  return report;
}

}  // namespace bsdelab
