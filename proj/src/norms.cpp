#include "bsdelab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bsdelab/errors.hpp"
#include "bsdelab/kernels.hpp"

namespace bsdelab {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_abs_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s > 0.0 ? 0.5 * std::log(s) : kNegInf;
}

void require_finite(std::span<const double> values, const std::string& scenario, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw Error(ErrorKind::kNumericalOverflow,
                  std::string(what) + " is not finite on path " + std::to_string(i) +
                      (scenario.empty() ? "" : " in scenario '" + scenario + "'"));
}

}  // namespace

LogEstimate log_space_mean(std::span<const double> log_terms) {
  double top = kNegInf;
  for (double v : log_terms) top = std::max(top, v);
  if (top == kNegInf) return {kNegInf, 0.0};
  std::vector<double> scaled(log_terms.size());
  for (std::size_t i = 0; i < log_terms.size(); ++i) scaled[i] = std::exp(log_terms[i] - top);
  const Estimate e = kernels::parallel::mean(scaled);
  return {top + std::log(e.value), e.se / e.value};
}

Estimate pth_root(const LogEstimate& m, double p, const std::string& scenario) {
  if (m.log_value == kNegInf) return {0.0, 0.0};
  const double value = std::exp(m.log_value / p);
  if (!std::isfinite(value))
    throw Error(ErrorKind::kNumericalOverflow,
                "weighted norm overflows" + (scenario.empty() ? "" : " in scenario '" + scenario + "'"));
  return {value, value * m.rel_se / p};
}

Estimate weighted_terminal_norm(std::span<const double> xi, std::size_t k, const Field& rho_integral,
                                const PathBatch& batch, double p, const std::string& scenario) {
  require_finite(xi, scenario, "terminal value");
  std::vector<double> log_abs(batch.n_paths);
  for (std::size_t i = 0; i < batch.n_paths; ++i) log_abs[i] = log_abs_norm(xi.subspan(i * k, k));
  return weighted_terminal_norm_log(log_abs, rho_integral, batch, p, scenario);
}

Estimate weighted_terminal_norm_log(std::span<const double> log_abs_xi, const Field& rho_integral,
                                    const PathBatch& batch, double p, const std::string& scenario) {
  std::vector<double> lw(batch.n_paths);
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    const double l = log_abs_xi[i];
    if (std::isnan(l) || l == std::numeric_limits<double>::infinity())
      throw Error(ErrorKind::kNumericalOverflow,
                  "terminal value is not finite on path " + std::to_string(i) +
                      (scenario.empty() ? "" : " in scenario '" + scenario + "'"));
    lw[i] = l == kNegInf ? kNegInf : p * (rho_integral.at(i, batch.stop_index[i]) + l);
  }
  return pth_root(log_space_mean(lw), p, scenario);
}

Estimate weighted_sup_norm(const Field& Y, const Field& rho_integral, const PathBatch& batch,
                           double p, const std::string& scenario) {
  require_finite(Y.data, scenario, "Y");
  std::vector<double> lw(batch.n_paths, kNegInf);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    double best = kNegInf;
    for (std::size_t j = 0; j <= batch.stop_index[i]; ++j) {
      const double l = log_abs_norm(Y.row(i, j));
      if (l != kNegInf) best = std::max(best, p * (rho_integral.at(i, j) + l));
    }
    lw[i] = best;
  }
  return pth_root(log_space_mean(lw), p, scenario);
}

Estimate weighted_z_norm(const Field& Z, const Field& rho_integral, const PathBatch& batch, double p,
                         const std::string& scenario) {
  require_finite(Z.data, scenario, "Z");
  std::vector<double> lw(batch.n_paths, kNegInf);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    const std::size_t stop = std::min(batch.stop_index[i], Z.n_nodes);
    // log of each quadrature term, then a shifted sum
    double top = kNegInf;
    std::vector<double> terms(stop, kNegInf);
    for (std::size_t j = 0; j < stop; ++j) {
      const double l = log_abs_norm(Z.row(i, j));
      if (l == kNegInf) continue;
      terms[j] = 2.0 * (rho_integral.at(i, j) + l) + std::log(batch.grid.dt(j));
      top = std::max(top, terms[j]);
    }
    if (top == kNegInf) continue;
    double s = 0.0;
    for (double v : terms) s += std::exp(v - top);
    lw[i] = 0.5 * p * (top + std::log(s));
  }
  return pth_root(log_space_mean(lw), p, scenario);
}

}  // namespace bsdelab
