#include "bsdelab/utility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "bsdelab/errors.hpp"
#include "bsdelab/kernels.hpp"
#include "bsdelab/norms.hpp"

namespace bsdelab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ess_fraction(std::span<const double> log_w) {
  double top = -kInf;
  for (double v : log_w) top = std::max(top, v);
  if (!std::isfinite(top)) return 0.0;
  double s = 0.0, s2 = 0.0;
  for (double v : log_w) {
    const double w = std::exp(v - top);
    s += w;
    s2 += w * w;
  }
  return s * s / (static_cast<double>(log_w.size()) * s2);
}

std::string format_q(double q) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "q=%.4g", q);
  return buf;
}

Estimate combine(const Estimate& a, const Estimate& b) {
  return {a.value, std::sqrt(a.se * a.se + b.se * b.se)};
}

}  // namespace

GeneratorSpec utility_generator(const CoreFunctionSpec& core, const UtilityConfig& config,
                                std::shared_ptr<const ConjugateTable>* table_out) {
  GeneratorSpec gen;
  gen.name = "concave-utility";
  gen.k = 1;
  gen.d = core.d;
  gen.coeffs.p = config.p;
  gen.coeffs.theta = config.theta;
  gen.coeffs.rho = config.rho;
  gen.coeffs.mu = config.mu;
  gen.coeffs.nu = core.nu;
  const ScalarField mu = config.mu;

  if (core.homogeneous && core.d == 1) {
    const double nu = core.nu(0.0, {});
    const double half = config.z_half_width > 0.0 ? config.z_half_width : 10.0 * (1.0 + nu);
    const std::vector<double> grid = uniform_grid(-half, half, std::max<std::size_t>(config.z_nodes, 3));
    auto table = std::make_shared<const ConjugateTable>(
        legendre_fenchel(core, 0.0, {}, grid, config.q_resolution));
    if (table_out) *table_out = table;
    gen.g = [table, mu](const NodeView& n, std::span<const double> y, std::span<const double> z,
                        std::span<double> out) {
      out[0] = mu(n.t, n.x) * y[0] - table->value(-z[0]);
    };
  } else {
    const CoreFunctionSpec c = core;
    gen.g = [c, mu](const NodeView& n, std::span<const double> y, std::span<const double> z,
                    std::span<double> out) {
      double neg[2] = {0.0, 0.0};
      for (std::size_t k = 0; k < c.d; ++k) neg[k] = -z[k];
      out[0] = mu(n.t, n.x) * y[0] - conjugate_point(c, n.t, n.x, {neg, c.d}, 64).value;
    };
  }
  return gen;
}

UtilityBsde utility_via_bsde(std::span<const double> xi, const CoreFunctionSpec& core,
                             const UtilityConfig& config, const PathBatch& batch) {
  if (core.d != batch.dim)
    throw Error(ErrorKind::kConfiguration, "core dimension differs from the Brownian dimension");
  if (xi.size() != batch.n_paths)
    throw Error(ErrorKind::kConfiguration, "terminal value needs one entry per path");
  UtilityBsde r;
  r.generator = utility_generator(core, config, &r.table);

  const Field rho_int = running_integral(config.rho, batch);
  r.xi_norm = weighted_terminal_norm(xi, 1, rho_int, batch, config.p, "utility terminal value");

  std::vector<double> h_int(batch.n_paths, 0.0);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < batch.stop_index[i]; ++j) {
      const double t = batch.grid.times[j];
      acc += std::exp(rho_int.at(i, j)) * core.h(t, batch.state_row(i, j)) * batch.grid.dt(j);
    }
    h_int[i] = std::pow(std::abs(acc), config.p);
  }
  const Estimate hp = kernels::parallel::mean(h_int);
  if (!std::isfinite(hp.value))
    throw Error(ErrorKind::kIllPosed, "int e^{int rho} h ds has no finite p-th moment estimate");
  r.h_integral_norm = {std::pow(hp.value, 1.0 / config.p),
                       hp.value > 0 ? std::pow(hp.value, 1.0 / config.p) * hp.se / (config.p * hp.value)
                                    : 0.0};

  r.solution = picard_solve(r.generator, xi, batch, config.solver);
  r.u0 = r.solution.y0.at(0);
  return r;
}

DualResult utility_via_dual(std::span<const double> xi, const CoreFunctionSpec& core,
                            const ScalarField& mu, std::span<const DualCandidate> candidates,
                            const PathBatch& batch) {
  if (core.d != batch.dim)
    throw Error(ErrorKind::kConfiguration, "core dimension differs from the Brownian dimension");
  const Field mu_int = running_integral(mu, batch);
  DualResult result;
  result.best = candidates.size();
  double best = kInf;
  for (const DualCandidate& c : candidates) {
    DualRow row;
    row.label = c.label;
    GirsanovWeightPath w;
    try {
      w = girsanov_weights(c.q, core.nu, batch);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kDomainViolation) throw;
      row.rejected = true;
      row.note = e.what();
      result.rows.push_back(row);
      continue;
    }
    std::vector<double> values(batch.n_paths), weights(batch.n_paths);
#pragma omp parallel for schedule(static) num_threads(jobs())
    for (std::size_t i = 0; i < batch.n_paths; ++i) {
      std::vector<double> qv(core.d);
      const std::size_t stop = batch.stop_index[i];
      double cost = std::exp(mu_int.at(i, stop)) * xi[i];
      for (std::size_t j = 0; j < stop; ++j) {
        const double t = batch.grid.times[j];
        const auto x = batch.state_row(i, j);
        c.q(NodeView{t, i, j, x}, qv);
        cost += std::exp(mu_int.at(i, j)) * core(t, x, qv) * batch.grid.dt(j);
      }
      const double L = w.terminal(batch, i);
      weights[i] = L;
      values[i] = L * cost;
    }
    const bool finite_all =
        std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); }) &&
        std::all_of(weights.begin(), weights.end(), [](double v) { return std::isfinite(v); });
    if (!finite_all) {
      row.flagged = true;
      row.note = "non-finite density weight or cost";
      row.value = {std::numeric_limits<double>::quiet_NaN(), 0.0};
    } else {
      row.value = kernels::parallel::mean(values);
      row.martingale_mean = kernels::parallel::mean(weights);
      if (row.value.value < best) {
        best = row.value.value;
        result.best = result.rows.size();
      }
    }
    result.rows.push_back(row);
  }
  if (result.best < result.rows.size()) result.best_value = result.rows[result.best].value;
  return result;
}

std::vector<DualCandidate> constant_candidates(const CoreFunctionSpec& core, std::size_t n) {
  const double nu = core.nu(0.0, {});
  std::vector<DualCandidate> out;
  for (double q : uniform_grid(-nu, nu, n)) {
    std::vector<double> v(core.d, 0.0);
    v[0] = q;
    out.push_back({format_q(q), constant_density(v)});
  }
  return out;
}

OptimalDensity optimal_density(const UtilityBsde& primal, const CoreFunctionSpec& core,
                               const UtilityConfig& config, const PathBatch& batch) {
  const std::size_t d = core.d;
  auto q = std::make_shared<Field>(batch.n_paths, batch.n_steps(), d, 0.0);
  const Field& Z = primal.solution.Z;
  const ConjugateTable* table = primal.table.get();
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    for (std::size_t j = 0; j < batch.stop_index[i]; ++j) {
      const auto x = batch.state_row(i, j);
      const double t = batch.grid.times[j];
      if (table && d == 1) {
        q->at(i, j) = table->subgradient(-Z.at(i, j));
      } else {
        double neg[2] = {0.0, 0.0};
        for (std::size_t k = 0; k < d; ++k) neg[k] = -Z.at(i, j, k);
        const ConjugatePoint pt = conjugate_point(core, t, x, {neg, d}, 64);
        for (std::size_t k = 0; k < d; ++k) q->at(i, j, k) = pt.argmax[k];
      }
      double r2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) r2 += q->at(i, j, k) * q->at(i, j, k);
      const double nu = core.nu(t, x);
      if (std::sqrt(r2) > nu)
        for (std::size_t k = 0; k < d; ++k) q->at(i, j, k) *= nu / std::sqrt(r2);
    }
  }

  OptimalDensity out;
  std::shared_ptr<const Field> qc = q;
  out.process = [qc](const NodeView& n, std::span<double> v) {
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = qc->at(n.path, n.node, k);
  };

  DensityCertificate& cert = out.certificate;
  const ScalarField nu = core.nu;
  const Field nu2 = running_integral(
      [nu](double t, std::span<const double> x) { return nu(t, x) * nu(t, x); }, batch);
  const Field mu_int = running_integral(config.mu, batch);
  std::vector<double> strong(batch.n_paths), weak(batch.n_paths), h_int(batch.n_paths);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    const std::size_t stop = batch.stop_index[i];
    strong[i] = 2.0 * nu2.at(i, stop);
    weak[i] = 0.5 * nu2.at(i, stop);
    double acc = 0.0;
    for (std::size_t j = 0; j < stop; ++j) {
      const double t = batch.grid.times[j];
      acc += std::exp(mu_int.at(i, j)) * core.h(t, batch.state_row(i, j)) * batch.grid.dt(j);
    }
    h_int[i] = acc;
  }
  cert.log_moment_strong = kernels::parallel::log_mean_exp(strong);
  cert.log_moment_weak = kernels::parallel::log_mean_exp(weak);
  cert.ess_fraction = ess_fraction(strong);
  const double ess_weak = ess_fraction(weak);
  cert.h_integral_max = *std::max_element(h_int.begin(), h_int.end());
  const double h_mean = kernels::parallel::mean(h_int).value;
  const bool h_bounded = std::isfinite(core.h_integral_bound)
                             ? cert.h_integral_max <= core.h_integral_bound
                             : (cert.h_integral_max == 0.0 ||
                                (std::isfinite(cert.h_integral_max) && cert.h_integral_max <= 10.0 * h_mean));

  const GirsanovWeightPath w = girsanov_weights(out.process, core.nu, batch);
  std::vector<double> L(batch.n_paths);
  for (std::size_t i = 0; i < batch.n_paths; ++i) L[i] = w.terminal(batch, i);
  cert.martingale_mean = kernels::parallel::mean(L);

  cert.cond_i = std::isfinite(cert.log_moment_strong) && cert.ess_fraction >= 0.1;
  cert.cond_ii = std::isfinite(cert.log_moment_weak) && ess_weak >= 0.1 && h_bounded;
  cert.cond_iii = std::isfinite(cert.martingale_mean.value) &&
                  std::abs(cert.martingale_mean.value - 1.0) <= 3.0 * cert.martingale_mean.se + 1e-12 &&
                  h_bounded;
  cert.mode = cert.cond_i ? "i" : cert.cond_ii ? "ii" : cert.cond_iii ? "iii" : "uncertified";
  out.q = *q;
  return out;
}

bool UtilityReport::consistent(double tolerance) const {
  if (!(gap <= 3.0 * combined_se)) return false;
  if (attainability_mode == "uncertified") return true;
  return std::abs(dual_at_optimum.value - u_bsde.value) <= std::max(tolerance, 3.0 * combined_se);
}

UtilityReport evaluate_utility(std::span<const double> xi, const CoreFunctionSpec& core,
                               const UtilityConfig& config, const PathBatch& batch,
                               std::span<const DualCandidate> candidates) {
  const UtilityBsde primal = utility_via_bsde(xi, core, config, batch);
  const OptimalDensity opt = optimal_density(primal, core, config, batch);
  std::vector<DualCandidate> all(candidates.begin(), candidates.end());
  all.push_back({"q_opt", opt.process});
  UtilityReport r;
  r.u_bsde = primal.u0;
  r.dual = utility_via_dual(xi, core, config.mu, all, batch);
  r.certificate = opt.certificate;
  r.attainability_mode = opt.certificate.mode;
  r.dual_at_optimum = r.dual.rows.back().value;
  if (r.dual.best < r.dual.rows.size()) {
    r.u_dual = r.dual.best_value;
    r.q_opt = r.dual.rows[r.dual.best].label;
  } else {
    r.u_dual = {std::numeric_limits<double>::quiet_NaN(), 0.0};
    r.q_opt = "none";
  }
  r.gap = r.u_bsde.value - r.u_dual.value;
  r.combined_se = combine(r.u_bsde, r.u_dual).se;
  if (r.attainability_mode == "uncertified")
    r.warning = "attainability uncertified: no condition could be verified on this sample";
  return r;
}

bool AxiomReport::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const AxiomRow& r) { return r.pass; });
}

AxiomReport axiom_check(std::span<const double> xi, std::span<const double> eta,
                        const CoreFunctionSpec& core, const UtilityConfig& config,
                        const PathBatch& batch) {
  AxiomReport report;
  const UtilityBsde ux = utility_via_bsde(xi, core, config, batch);
  const UtilityBsde ue = utility_via_bsde(eta, core, config, batch);

  bool ordered = true;
  for (std::size_t i = 0; i < xi.size(); ++i) ordered = ordered && xi[i] >= eta[i];
  if (ordered) {
    AxiomRow row{"monotonicity", 0.0, ux.u0.value, ue.u0.value, 3.0 * combine(ux.u0, ue.u0).se, false};
    row.pass = row.lhs >= row.rhs - row.slack;
    report.rows.push_back(row);
  }

  for (double lambda : {0.25, 0.5, 0.75}) {
    std::vector<double> mix(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) mix[i] = lambda * xi[i] + (1.0 - lambda) * eta[i];
    const UtilityBsde um = utility_via_bsde(mix, core, config, batch);
    const double se = std::sqrt(um.u0.se * um.u0.se + lambda * lambda * ux.u0.se * ux.u0.se +
                                (1.0 - lambda) * (1.0 - lambda) * ue.u0.se * ue.u0.se);
    AxiomRow row{"concavity", lambda, um.u0.value,
                 lambda * ux.u0.value + (1.0 - lambda) * ue.u0.value, 3.0 * se, false};
    row.pass = row.lhs >= row.rhs - row.slack;
    report.rows.push_back(row);
  }

  {
    const TimeGrid& g = batch.grid;
    const std::size_t half = g.index_at_or_before(g.t0 + 0.5 * (g.horizon - g.t0));
    const PathBatch head = truncate_batch(batch, half);
    std::vector<double> y_half(batch.n_paths);
    for (std::size_t i = 0; i < batch.n_paths; ++i) y_half[i] = ux.solution.Y.at(i, std::min(half, batch.stop_index[i]));
    const UtilityBsde uh = utility_via_bsde(y_half, core, config, head);
    AxiomRow row{"time-consistency", 0.5, uh.u0.value, ux.u0.value,
                 3.0 * combine(uh.u0, ux.u0).se + config.solver.picard_tol, false};
    row.pass = std::abs(row.lhs - row.rhs) <= row.slack;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace bsdelab
