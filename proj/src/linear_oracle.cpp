#include "bsdelab/linear_oracle.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bsdelab/errors.hpp"
#include "bsdelab/kernels.hpp"
#include "bsdelab/norms.hpp"
#include "bsdelab/regression.hpp"
#include "bsdelab/sde.hpp"

namespace bsdelab {
namespace {

// log of e^{int_0^{t_j} mu} L_{t_j} per node, using the signed nu.
Field log_discount(const LinearScenario& s, const PathBatch& batch) {
  const Field mu_int = running_integral(s.coeffs.mu, batch);
  const std::size_t d = batch.dim;
  DensityProcess q;
  if (s.nu_vector.empty()) {
    q = [&s, d](const NodeView& node, std::span<double> out) {
      out[0] = s.coeffs.nu(node.t, node.x);
      for (std::size_t k = 1; k < d; ++k) out[k] = 0.0;
    };
  } else {
    q = [&s, d](const NodeView& node, std::span<double> out) {
      for (std::size_t k = 0; k < d; ++k)
        out[k] = k < s.nu_vector.size() && s.nu_vector[k] ? s.nu_vector[k](node.t, node.x) : 0.0;
    };
  }
  const GirsanovWeightPath L =
      girsanov_weights(q, constant_field(std::numeric_limits<double>::infinity()), batch);
  Field out(batch.n_paths, batch.n_nodes(), 1);
  for (std::size_t n = 0; n < out.data.size(); ++n) out.data[n] = mu_int.data[n] + L.log_L.data[n];
  return out;
}

}  // namespace

LinearValue linear_bsde_value(const LinearScenario& scenario, std::span<const double> xi,
                              const PathBatch& batch, std::span<const std::size_t> nodes,
                              int degree) {
  if (xi.size() != batch.n_paths) throw Error(ErrorKind::kConfiguration, "xi must be one value per path");
  const StructuralReport s = check_structural_condition(scenario.coeffs, batch);
  if (!s.pass)
    throw Error(ErrorKind::kIllPosed,
                "structural margin is negative (" + std::to_string(s.worst_margin) + ")");
  const Field lw = log_discount(scenario, batch);
  const std::size_t n = batch.n_paths;
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(lw.at(i, batch.stop_index[i])) || !std::isfinite(xi[i]))
      throw Error(ErrorKind::kIllPosed, "terminal weight is not finite on path " + std::to_string(i));

  LinearValue out;
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) terms[i] = xi[i] * std::exp(lw.at(i, batch.stop_index[i]));
  out.y0 = kernels::parallel::mean(terms);

  out.nodes.assign(nodes.begin(), nodes.end());
  out.y = Field(n, out.nodes.size(), 1);
  std::vector<std::size_t> rows;
  std::vector<double> targets;
  for (std::size_t c = 0; c < out.nodes.size(); ++c) {
    const std::size_t j = out.nodes[c];
    if (j >= batch.n_nodes()) throw Error(ErrorKind::kConfiguration, "node index out of range");
    rows.clear();
    targets.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t stop = batch.stop_index[i];
      if (stop <= j) {
        out.y.at(i, c) = xi[i];
        continue;
      }
      rows.push_back(i);
      targets.push_back(xi[i] * std::exp(lw.at(i, stop) - lw.at(i, j)));
    }
    if (rows.empty()) continue;
    const std::vector<double> fitted =
        conditional_expectation(batch, j, rows, targets, 1, degree);
    for (std::size_t r = 0; r < rows.size(); ++r) out.y.at(rows[r], c) = fitted[r];
  }
  return out;
}

MarginStudy supnorm_margin_study(const ScalarField& b, double p, std::span<const double> theta_values,
                                 const PathBatch& batch, int degree) {
  if (!(p > 1.0)) throw Error(ErrorKind::kConfiguration, "margin study needs p > 1");
  const std::size_t n = batch.n_paths;
  const ScalarField b2 = [b](double t, std::span<const double> x) {
    const double v = b(t, x);
    return v * v;
  };
  const Field b2_int = running_integral(b2, batch);

  // int b dB, left point
  std::vector<double> xi(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < batch.stop_index[i]; ++j)
      s += b(batch.grid.times[j], batch.state_row(i, j)) * batch.dB(i, j);
    const double a = 1.0 / (p - 1.0), c = (2.0 * p - 1.0) / (2.0 * (p - 1.0) * (p - 1.0));
    xi[i] = std::exp(a * s - c * b2_int.at(i, batch.stop_index[i]));
  }

  LinearScenario scenario;
  scenario.coeffs.p = p;
  scenario.coeffs.theta = 1.0 + 1e-9;
  scenario.coeffs.nu = b;
  // only gates well-posedness; y does not depend on rho
  const double factor = scenario.coeffs.nu_factor();
  scenario.coeffs.rho = [b2, factor](double t, std::span<const double> x) {
    return factor * b2(t, x);
  };
  std::vector<std::size_t> nodes(batch.n_nodes());
  std::iota(nodes.begin(), nodes.end(), 0);
  const LinearValue lv = linear_bsde_value(scenario, xi, batch, nodes, degree);

  MarginStudy study;
  study.p = p;
  std::vector<std::vector<double>> sup_terms;
  for (double theta : theta_values) {
    const double k_rho = theta / (2.0 * (p - 1.0));
    std::vector<double> sup(n), term(n), excess(n);
    for (std::size_t i = 0; i < n; ++i) {
      double best = 0.0;
      for (std::size_t j = 0; j <= batch.stop_index[i]; ++j) {
        const double w = std::exp(p * k_rho * b2_int.at(i, j)) * std::pow(std::abs(lv.y.at(i, j)), p);
        best = std::max(best, w);
      }
      term[i] = std::exp(p * k_rho * b2_int.at(i, batch.stop_index[i])) * std::pow(std::abs(xi[i]), p);
      sup[i] = best;
      excess[i] = best - term[i];
    }
    MarginRow row;
    row.theta_prime = theta;
    row.sup_moment = kernels::parallel::mean(sup);
    row.terminal_moment = kernels::parallel::mean(term);
    row.sup_excess = kernels::parallel::mean(excess);
    study.rows.push_back(row);
    if (theta > 1.0) {
      const double r = p / (1.0 + (p - 1.0) / theta);
      study.doob_constant.push_back(std::pow(r / (r - 1.0), r));
    } else {
      study.doob_constant.push_back(0.0);
    }
    sup_terms.push_back(std::move(sup));
  }
  for (std::size_t c = 0; c < sup_terms.size(); ++c) {
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = sup_terms[c][i] - sup_terms[0][i];
    study.paired_difference.push_back(kernels::parallel::mean(diff));
  }
  return study;
}

}  // namespace bsdelab
