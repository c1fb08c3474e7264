#include "bsdelab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bsdelab/errors.hpp"
#include "bsdelab/kernels.hpp"
#include "bsdelab/regression.hpp"

namespace bsdelab {
namespace {

struct StepFit {
  std::vector<double> E;  // [n_active x k]
  std::vector<double> Z;  // [n_active x kd]
};

PolynomialBasis choose_basis(const PathBatch& batch, std::size_t node,
                             std::span<const std::size_t> rows, int degree, std::size_t blocks) {
  for (;; --degree) {
    PolynomialBasis basis = fit_basis(batch, node, rows, degree);
    if (degree <= 0 || rows.size() >= 2 * blocks * basis.size()) return basis;
  }
}

StepFit regress_step(const PathBatch& batch, std::size_t j, std::span<const std::size_t> active,
                     const Field& Y, std::size_t k, const SolverConfig& cfg) {
  const std::size_t d = batch.dim, kd = k * d, n = active.size();
  const double dt = batch.grid.dt(j), sq = std::sqrt(dt);
  const bool joint = cfg.z_estimator == ZEstimator::kMartingaleRegression;
  const PolynomialBasis basis = choose_basis(batch, j, active, cfg.basis_degree, joint ? 1 + d : 1);
  const std::size_t nphi = basis.size();
  StepFit fit;
  fit.E.assign(n * k, 0.0);
  fit.Z.assign(n * kd, 0.0);

  std::vector<double> targets(n * k);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < k; ++c) targets[r * k + c] = Y.at(active[r], j + 1, c);

  if (n < 2 * (1 + d)) {
    // too few paths for a Z estimate: conditional mean only
    for (std::size_t c = 0; c < k; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += targets[r * k + c];
      for (std::size_t r = 0; r < n; ++r) fit.E[r * k + c] = s / static_cast<double>(n);
    }
    return fit;
  }

  const std::size_t n_cols = joint ? nphi * (1 + d) : nphi;
  std::vector<double> design(n * n_cols);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t r = 0; r < n; ++r) {
    double* row = design.data() + r * n_cols;
    basis.eval(batch.state_row(active[r], j), std::span<double>(row, nphi));
    if (joint)
      for (std::size_t l = 0; l < d; ++l) {
        const double w = batch.dB(active[r], j, l) / sq;
        for (std::size_t m = 0; m < nphi; ++m) row[(1 + l) * nphi + m] = row[m] * w;
      }
  }

  if (joint) {
    const std::vector<double> coef = least_squares(design, n_cols, targets, k, cfg.ridge);
#pragma omp parallel for schedule(static) num_threads(jobs())
    for (std::size_t r = 0; r < n; ++r) {
      const double* phi = design.data() + r * n_cols;
      for (std::size_t c = 0; c < k; ++c) {
        double e = 0.0;
        for (std::size_t m = 0; m < nphi; ++m) e += phi[m] * coef[m * k + c];
        fit.E[r * k + c] = e;
        for (std::size_t l = 0; l < d; ++l) {
          double z = 0.0;
          for (std::size_t m = 0; m < nphi; ++m) z += phi[m] * coef[((1 + l) * nphi + m) * k + c];
          fit.Z[r * kd + c * d + l] = z / sq;
        }
      }
    }
    return fit;
  }

  const std::vector<double> coefE = least_squares(design, n_cols, targets, k, cfg.ridge);
  kernels::parallel::predict(design, n_cols, coefE, k, fit.E);
  std::vector<double> ztargets(n * kd);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t l = 0; l < d; ++l)
        ztargets[r * kd + c * d + l] = targets[r * k + c] * batch.dB(active[r], j, l) / dt;
  const std::vector<double> coefZ = least_squares(design, n_cols, ztargets, kd, cfg.ridge);
  kernels::parallel::predict(design, n_cols, coefZ, kd, fit.Z);
  return fit;
}

// Root of y - dt g(y) = e for scalar g. The bracket is grown geometrically
// from e in the direction of g(e), then refined by Illinois false position.
// Monotone generators with mu dt < 1 make the left side strictly increasing.
template <class G>
double implicit_root(G&& g, double e, double dt) {
  auto F = [&](double y) { return y - dt * g(y) - e; };
  double a = e, fa = F(a);
  if (fa == 0.0 || !std::isfinite(fa)) return e - fa;
  const double dir = fa < 0.0 ? 1.0 : -1.0;
  double step = std::max(std::abs(fa), 1e-12 * (1.0 + std::abs(e)));
  double b = e + dir * step, fb = F(b);
  for (int grow = 0; std::isfinite(fb) && (fb < 0.0) == (fa < 0.0) && fb != 0.0; ++grow) {
    if (grow == 200) return std::numeric_limits<double>::quiet_NaN();
    a = b;
    fa = fb;
    step *= 2.0;
    b = e + dir * step;
    fb = F(b);
  }
  if (!std::isfinite(fb)) return fb;
  if (fb == 0.0) return b;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    const double c = (fa * b - fb * a) / (fa - fb);
    if (std::abs(b - a) <= 1e-14 * (1.0 + std::abs(c))) return c;
    const double fc = F(c);
    if (!std::isfinite(fc)) return fc;
    if (std::abs(fc) <= 1e-15 * (1.0 + std::abs(c))) return c;
    if ((fc < 0.0) == (fb < 0.0)) {
      b = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

BSDESolution backward_euler_pass(const GeneratorSpec& gen, std::span<const double> xi,
                                 const Field& V, const PathBatch& batch, const SolverConfig& config) {
  const std::size_t n = batch.n_paths, k = gen.k, d = batch.dim, kd = k * d;
  const std::size_t steps = batch.n_steps();
  if (gen.d != d) throw Error(ErrorKind::kConfiguration, "generator and batch disagree on d");
  if (xi.size() != n * k) throw Error(ErrorKind::kConfiguration, "terminal value has the wrong shape");
  const bool has_v = !V.data.empty();
  if (has_v && (V.n_paths != n || V.n_nodes != steps || V.width != kd))
    throw Error(ErrorKind::kConfiguration, "frozen z-field has the wrong shape");

  BSDESolution sol;
  sol.k = k;
  sol.d = d;
  sol.Y = Field(n, batch.n_nodes(), k);
  sol.Z = Field(n, steps, kd);
  std::vector<double> pathwise(xi.begin(), xi.end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = batch.stop_index[i]; j < batch.n_nodes(); ++j)
      for (std::size_t c = 0; c < k; ++c) sol.Y.at(i, j, c) = xi[i * k + c];

  std::vector<std::size_t> active;
  active.reserve(n);
  const int substeps = config.implicit_y ? std::max(0, config.implicit_substeps) : 0;
  for (std::size_t jj = steps; jj-- > 0;) {
    active.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (batch.stop_index[i] > jj) active.push_back(i);
    if (active.empty()) continue;
    const StepFit fit = regress_step(batch, jj, active, sol.Y, k, config);
    const double dt = batch.grid.dt(jj);
    const double t = batch.grid.times[jj];
    int bad = 0;
#pragma omp parallel for schedule(static) num_threads(jobs()) reduction(| : bad)
    for (std::size_t r = 0; r < active.size(); ++r) {
      const std::size_t i = active[r];
      const NodeView node{t, i, jj, batch.state_row(i, jj)};
      std::vector<double> v(kd, 0.0), ystar(k), g(k);
      if (has_v) {
        const auto row = V.row(i, jj);
        std::copy(row.begin(), row.end(), v.begin());
      }
      const double* e = fit.E.data() + r * k;
      std::copy(e, e + k, ystar.begin());
      if (k == 1 && config.implicit_y) {
        ystar[0] = implicit_root(
            [&](double y) {
              ystar[0] = y;
              gen.g(node, ystar, v, g);
              return g[0];
            },
            e[0], dt);
      } else {
        for (int s = 0; s < substeps; ++s) {
          gen.g(node, ystar, v, g);
          for (std::size_t c = 0; c < k; ++c) ystar[c] = e[c] + g[c] * dt;
        }
      }
      gen.g(node, ystar, v, g);
      for (std::size_t c = 0; c < k; ++c) {
        const double y = e[c] + g[c] * dt;
        if (!std::isfinite(y)) bad = 1;
        sol.Y.at(i, jj, c) = y;
        pathwise[i * k + c] += g[c] * dt;
      }
      auto zrow = sol.Z.row(i, jj);
      std::copy_n(fit.Z.data() + r * kd, kd, zrow.begin());
    }
    if (bad)
      throw Error(ErrorKind::kDivergence,
                  "Y is not finite at step " + std::to_string(jj) + " of '" + gen.name + "'");
  }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c)
      sol.residual = std::max(sol.residual,
                              std::abs(sol.Y.at(i, batch.stop_index[i], c) - xi[i * k + c]));
  sol.y0.resize(k);
  std::vector<double> col(n);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < n; ++i) col[i] = sol.Y.at(i, 0, c);
    const double y0 = kernels::parallel::mean(col).value;
    for (std::size_t i = 0; i < n; ++i) col[i] = pathwise[i * k + c];
    sol.y0[c] = {y0, kernels::parallel::mean(col).se};
  }
  return sol;
}

double m2_distance_sq(const Field& A, const Field& B, const Field& rho_integral,
                      const PathBatch& batch) {
  const Field& ref = A.data.empty() ? B : A;
  if (ref.data.empty()) return 0.0;
  std::vector<double> per_path(batch.n_paths, 0.0);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    const std::size_t stop = std::min(batch.stop_index[i], ref.n_nodes);
    double s = 0.0;
    for (std::size_t j = 0; j < stop; ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < ref.width; ++c) {
        const double a = A.data.empty() ? 0.0 : A.at(i, j, c);
        const double b = B.data.empty() ? 0.0 : B.at(i, j, c);
        d2 += (a - b) * (a - b);
      }
      s += std::exp(2.0 * rho_integral.at(i, j)) * d2 * batch.grid.dt(j);
    }
    per_path[i] = s;
  }
  return kernels::parallel::mean(per_path).value;
}

WeightedNormReport solution_norms(const GeneratorSpec& gen, std::span<const double> xi,
                                  const BSDESolution& sol, const PathBatch& batch) {
  const Field rho = running_integral(gen.coeffs.rho, batch);
  WeightedNormReport r;
  r.terminal = weighted_terminal_norm(xi, gen.k, rho, batch, gen.coeffs.p, gen.name);
  r.sup = weighted_sup_norm(sol.Y, rho, batch, gen.coeffs.p, gen.name);
  r.z = weighted_z_norm(sol.Z, rho, batch, gen.coeffs.p, gen.name);
  return r;
}

BSDESolution picard_solve(const GeneratorSpec& gen, std::span<const double> xi,
                          const PathBatch& batch, const SolverConfig& config) {
  if (!(config.picard_tol > 0.0)) throw Error(ErrorKind::kConfiguration, "picard_tol must be positive");
  if (config.check_structure) {
    const StructuralReport s = check_structural_condition(gen.coeffs, batch);
    if (!s.pass)
      throw Error(ErrorKind::kIllPosed, "structural condition fails for '" + gen.name +
                                            "' (worst margin " + std::to_string(s.worst_margin) + ")");
  }
  const Field rho = running_integral(gen.coeffs.rho, batch);
  Field V;
  BSDESolution sol;
  std::vector<double> distances;
  bool converged = false;
  int it = 0;
  while (it < std::max(1, config.max_picard)) {
    ++it;
    sol = backward_euler_pass(gen, xi, V, batch, config);
    const double dist = std::sqrt(m2_distance_sq(sol.Z, V, rho, batch));
    distances.push_back(dist);
    V = sol.Z;
    if (dist < config.picard_tol) {
      converged = true;
      break;
    }
  }
  sol.picard_iterations = it;
  sol.converged = converged;
  sol.picard_distances = std::move(distances);
  sol.norms = solution_norms(gen, xi, sol, batch);
  return sol;
}

double contraction_ratio(const GeneratorSpec& gen, std::span<const double> xi, const Field& V1,
                         const Field& V2, const PathBatch& batch, const SolverConfig& config) {
  const Field rho = running_integral(gen.coeffs.rho, batch);
  const double den = m2_distance_sq(V1, V2, rho, batch);
  if (!(den > 0.0)) throw Error(ErrorKind::kDegenerateInput, "V1 and V2 coincide");
  const BSDESolution a = backward_euler_pass(gen, xi, V1, batch, config);
  const BSDESolution b = backward_euler_pass(gen, xi, V2, batch, config);
  return m2_distance_sq(a.Z, b.Z, rho, batch) / den;
}

}  // namespace bsdelab
