#include "bsdelab/studies.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "bsdelab/errors.hpp"
#include "bsdelab/kernels.hpp"
#include "bsdelab/sde.hpp"

namespace bsdelab {
namespace {

Field difference(const Field& a, const Field& b) {
  Field out = a;
  for (std::size_t n = 0; n < out.data.size(); ++n) out.data[n] -= b.data[n];
  return out;
}

// E[(int_0^tau e^{int rho} h ds)^p] with the trapezoid rule; h per node.
double integral_moment(const Field& h, const Field& rho, const PathBatch& batch, double p) {
  std::vector<double> v(batch.n_paths);
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < batch.stop_index[i]; ++j)
      s += 0.5 * (std::exp(rho.at(i, j)) * h.at(i, j) + std::exp(rho.at(i, j + 1)) * h.at(i, j + 1)) *
           batch.grid.dt(j);
    v[i] = std::pow(std::abs(s), p);
  }
  return kernels::parallel::mean(v).value;
}

}  // namespace

std::vector<TruncationRow> truncation_study(const GeneratorSpec& gen, std::span<const double> xi,
                                            std::span<const double> n_values,
                                            const PathBatch& batch, const SolverConfig& config) {
  const auto rho = std::make_shared<const Field>(running_integral(gen.coeffs.rho, batch));
  const double p = gen.coeffs.p;
  const std::size_t k = gen.k;
  std::map<double, BSDESolution> solved;
  std::map<double, std::vector<double>> terminals;
  auto solve = [&](double n) -> const BSDESolution& {
    auto it = solved.find(n);
    if (it != solved.end()) return it->second;
    terminals[n] = truncated_terminal(xi, k, n, *rho, batch);
    const GeneratorSpec gn = truncated_generator(gen, n, rho);
    return solved.emplace(n, picard_solve(gn, terminals[n], batch, config)).first->second;
  };
  std::vector<TruncationRow> rows;
  for (double n : n_values) {
    const BSDESolution& a = solve(n);
    const BSDESolution& b = solve(2.0 * n);
    TruncationRow row;
    row.n = n;
    row.dy = weighted_sup_norm(difference(b.Y, a.Y), *rho, batch, p, gen.name);
    row.dz = weighted_z_norm(difference(b.Z, a.Z), *rho, batch, p, gen.name);
    std::vector<double> tail(xi.begin(), xi.end());
    for (std::size_t i = 0; i < batch.n_paths; ++i) {
      const double gamma = std::exp(-rho->at(i, batch.stop_index[i]));
      double norm = 0.0;
      for (std::size_t c = 0; c < k; ++c) norm += xi[i * k + c] * xi[i * k + c];
      if (std::sqrt(norm) <= n * gamma)
        for (std::size_t c = 0; c < k; ++c) tail[i * k + c] = 0.0;
      else
        row.active = true;
    }
    row.tail = weighted_terminal_norm(tail, k, *rho, batch, p, gen.name);
    rows.push_back(row);
  }
  return rows;
}

AprioriReport apriori_report(const GeneratorSpec& gen, std::span<const double> xi,
                             const BSDESolution& solution, const NodeFunction& f,
                             const PathBatch& batch) {
  const Field rho = running_integral(gen.coeffs.rho, batch);
  const double p = gen.coeffs.p;
  const WeightedNormReport norms = solution_norms(gen, xi, solution, batch);
  Field fv(batch.n_paths, batch.n_nodes(), 1);
  for (std::size_t i = 0; i < batch.n_paths; ++i)
    for (std::size_t j = 0; j <= batch.stop_index[i]; ++j)
      fv.at(i, j) = f(NodeView{batch.grid.times[j], i, j, batch.state_row(i, j)});
  AprioriReport r;
  r.lhs = std::pow(norms.sup.value, p) + std::pow(norms.z.value, p);
  r.rhs = std::pow(norms.terminal.value, p) + integral_moment(fv, rho, batch, p);
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : (r.lhs > 0.0 ? INFINITY : 0.0);
  return r;
}

DependenceReport compare_solutions(const GeneratorSpec& gen, const GeneratorSpec& gen2,
                                   std::span<const double> xi, std::span<const double> xi2,
                                   const BSDESolution& a, const BSDESolution& b,
                                   const PathBatch& batch) {
  const Field rho = running_integral(gen.coeffs.rho, batch);
  const double p = gen.coeffs.p;
  const std::size_t k = gen.k, kd = gen.k * gen.d;
  DependenceReport r;
  r.numerator = std::pow(weighted_sup_norm(difference(a.Y, b.Y), rho, batch, p).value, p) +
                std::pow(weighted_z_norm(difference(a.Z, b.Z), rho, batch, p).value, p);
  std::vector<double> dxi(xi.size());
  for (std::size_t n = 0; n < xi.size(); ++n) dxi[n] = xi[n] - xi2[n];
  Field dg(batch.n_paths, batch.n_nodes(), 1);
  std::vector<double> zero(kd, 0.0);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    std::vector<double> g1(k), g2(k);
    for (std::size_t j = 0; j < batch.stop_index[i]; ++j) {
      const NodeView node{batch.grid.times[j], i, j, batch.state_row(i, j)};
      const auto y = b.Y.row(i, j);
      const auto z = b.Z.row(i, j);
      gen.g(node, y, z, g1);
      gen2.g(node, y, z, g2);
      double s = 0.0;
      for (std::size_t c = 0; c < k; ++c) s += (g1[c] - g2[c]) * (g1[c] - g2[c]);
      dg.at(i, j) = std::sqrt(s);
    }
    // node value at the stop is only a trapezoid endpoint; reuse the last interior value
    if (batch.stop_index[i] > 0) dg.at(i, batch.stop_index[i]) = dg.at(i, batch.stop_index[i] - 1);
  }
  r.denominator = std::pow(weighted_terminal_norm(dxi, k, rho, batch, p).value, p) +
                  integral_moment(dg, rho, batch, p);
  r.ratio = r.denominator > 0.0 ? r.numerator / r.denominator : (r.numerator > 0.0 ? INFINITY : 0.0);
  std::vector<double> dy0(batch.n_paths);
  for (std::size_t i = 0; i < batch.n_paths; ++i) dy0[i] = a.Y.at(i, 0) - b.Y.at(i, 0);
  r.y0_difference = {kernels::parallel::mean(dy0).value, std::hypot(a.y0[0].se, b.y0[0].se)};
  return r;
}

DependenceReport continuous_dependence_check(const GeneratorSpec& gen, const GeneratorSpec& gen2,
                                             std::span<const double> xi, std::span<const double> xi2,
                                             const PathBatch& batch, const SolverConfig& config) {
  const BSDESolution a = picard_solve(gen, xi, batch, config);
  const BSDESolution b = picard_solve(gen2, xi2, batch, config);
  return compare_solutions(gen, gen2, xi, xi2, a, b, batch);
}

std::vector<StabilityRow> stability_check(std::span<const GeneratorSpec> gen_sequence,
                                          std::span<const std::vector<double>> xi_sequence,
                                          const GeneratorSpec& gen, std::span<const double> xi,
                                          const PathBatch& batch, const SolverConfig& config) {
  if (gen_sequence.size() != xi_sequence.size())
    throw Error(ErrorKind::kConfiguration, "stability sequences differ in length");
  const Field rho = running_integral(gen.coeffs.rho, batch);
  const double p = gen.coeffs.p;
  const BSDESolution limit = picard_solve(gen, xi, batch, config);
  std::vector<StabilityRow> rows;
  for (std::size_t n = 0; n < gen_sequence.size(); ++n) {
    const BSDESolution s = picard_solve(gen_sequence[n], xi_sequence[n], batch, config);
    StabilityRow row;
    row.index = n;
    row.distance = weighted_sup_norm(difference(s.Y, limit.Y), rho, batch, p).value +
                   weighted_z_norm(difference(s.Z, limit.Z), rho, batch, p).value;
    row.y0_gap = s.y0[0].value - limit.y0[0].value;
    rows.push_back(row);
  }
  return rows;
}

GeneratorSpec decay_generator() {
  return scalar_generator(
      "decay", [](double, std::span<const double>, double y, double) { return -y; },
      constant_coefficients(2.0, 2.0, 0.0, 0.0, 0.0));
}

DivergenceStudy horizon_divergence_study(std::span<const double> T_values, double c,
                                       std::size_t steps_per_unit, std::size_t n_paths,
                                       std::uint64_t seed, const SolverConfig& config) {
  DivergenceStudy study;
  study.c = c;
  const GeneratorSpec gen = decay_generator();
  for (double T : T_values) {
    const auto steps = static_cast<std::size_t>(std::ceil(steps_per_unit * T));
    const PathBatch batch = simulate_brownian(n_paths, build_grid(0.0, T, steps), 1, seed);
    const std::vector<double> xi(n_paths, c);
    const BSDESolution sol = picard_solve(gen, xi, batch, config);
    DivergenceRow row;
    row.T = T;
    row.n_steps = steps;
    row.y0 = sol.y0[0].value;
    row.oracle = c * std::exp(-T);
    row.rel_error = c == 0.0 ? std::abs(row.y0) : std::abs(row.y0 - row.oracle) / std::abs(row.oracle);
    study.rows.push_back(row);
  }
  study.decays = !study.rows.empty();
  for (std::size_t r = 1; r < study.rows.size(); ++r)
    if (!(std::abs(study.rows[r].y0) < std::abs(study.rows[r - 1].y0))) study.decays = false;
  if (!study.rows.empty() && !(std::abs(study.rows.back().y0) < std::abs(c) * std::exp(-1.0)))
    study.decays = false;
  return study;
}

}  // namespace bsdelab
