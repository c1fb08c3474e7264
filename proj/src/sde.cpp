#include "bsdelab/sde.hpp"

#include <cmath>
#include <string>

#include "bsdelab/errors.hpp"
#include "bsdelab/kernels.hpp"
#include "bsdelab/parallel.hpp"

namespace bsdelab {

PathBatch simulate_brownian(std::size_t n_paths, const TimeGrid& grid, std::size_t d,
                            std::uint64_t seed) {
  if (n_paths == 0) throw Error(ErrorKind::kConfiguration, "n_paths must be positive");
  if (d == 0) throw Error(ErrorKind::kConfiguration, "Brownian dimension must be positive");
  PathBatch batch;
  batch.n_paths = n_paths;
  batch.dim = d;
  batch.state_dim = d;
  batch.seed = seed;
  batch.grid = grid;
  const std::size_t steps = grid.n_steps;
  batch.increments.resize(n_paths * steps * d);
  kernels::parallel::fill_normals(seed, 0, n_paths, steps * d, batch.increments);
  batch.states.assign(n_paths * (steps + 1) * d, 0.0);
  batch.stop_index.assign(n_paths, steps);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < n_paths; ++i) {
    for (std::size_t j = 0; j < steps; ++j) {
      const double s = std::sqrt(grid.dt(j));
      for (std::size_t k = 0; k < d; ++k) {
        double& inc = batch.increments[(i * steps + j) * d + k];
        inc *= s;
        batch.states[(i * (steps + 1) + j + 1) * d + k] =
            batch.states[(i * (steps + 1) + j) * d + k] + inc;
      }
    }
  }
  return batch;
}

PathBatch coarsen_brownian(const PathBatch& fine, std::size_t factor) {
  if (factor == 0 || fine.n_steps() % factor != 0)
    throw Error(ErrorKind::kConfiguration, "coarsening factor must divide the step count");
  if (fine.state_dim != fine.dim)
    throw Error(ErrorKind::kConfiguration, "coarsening needs a plain Brownian batch");
  const std::size_t steps = fine.n_steps() / factor;
  const std::size_t d = fine.dim;
  PathBatch batch;
  batch.n_paths = fine.n_paths;
  batch.dim = d;
  batch.state_dim = d;
  batch.seed = fine.seed;
  batch.grid = build_grid(fine.grid.t0, fine.grid.horizon, steps);
  batch.increments.assign(fine.n_paths * steps * d, 0.0);
  batch.states.assign(fine.n_paths * (steps + 1) * d, 0.0);
  batch.stop_index.assign(fine.n_paths, steps);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < fine.n_paths; ++i) {
    for (std::size_t j = 0; j < steps; ++j) {
      for (std::size_t k = 0; k < d; ++k) {
        double s = 0.0;
        for (std::size_t f = 0; f < factor; ++f) s += fine.dB(i, j * factor + f, k);
        batch.increments[(i * steps + j) * d + k] = s;
        batch.states[(i * (steps + 1) + j + 1) * d + k] = fine.state(i, (j + 1) * factor, k);
      }
    }
  }
  return batch;
}

DriftDiffusionSpec scalar_diffusion(std::function<double(double, double)> b,
                                    std::function<double(double, double)> s, double x0) {
  DriftDiffusionSpec spec;
  spec.drift = [b](double t, std::span<const double> x, std::span<double> out) { out[0] = b(t, x[0]); };
  spec.diffusion = [s](double t, std::span<const double> x, std::span<double> out) {
    out[0] = s(t, x[0]);
  };
  spec.x0 = {x0};
  return spec;
}

PathBatch euler_maruyama(const DriftDiffusionSpec& spec, const PathBatch& driver) {
  if (spec.noise_dim != driver.dim)
    throw Error(ErrorKind::kConfiguration, "diffusion noise dimension does not match the driver");
  if (spec.x0.size() != spec.state_dim)
    throw Error(ErrorKind::kConfiguration, "initial state has the wrong dimension");
  PathBatch out;
  out.n_paths = driver.n_paths;
  out.dim = driver.dim;
  out.state_dim = spec.state_dim;
  out.seed = driver.seed;
  out.grid = driver.grid;
  out.increments = driver.increments;
  out.stop_index.assign(driver.n_paths, driver.n_steps());
  const std::size_t m = spec.state_dim, d = spec.noise_dim, nodes = driver.n_nodes();
  out.states.resize(driver.n_paths * nodes * m);
  long bad_step = -1;
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < driver.n_paths; ++i) {
    std::vector<double> b(m), sig(m * d);
    double* x = out.states.data() + i * nodes * m;
    std::copy(spec.x0.begin(), spec.x0.end(), x);
    for (std::size_t j = 0; j < driver.n_steps(); ++j) {
      const double t = driver.grid.times[j];
      const double h = driver.grid.dt(j);
      std::span<const double> xj(x + j * m, m);
      spec.drift(t, xj, b);
      spec.diffusion(t, xj, sig);
      const auto dB = driver.dB_row(i, j);
      for (std::size_t c = 0; c < m; ++c) {
        double v = xj[c] + b[c] * h;
        for (std::size_t k = 0; k < d; ++k) v += sig[c * d + k] * dB[k];
        if (!std::isfinite(v)) {
#pragma omp critical(bsdelab_em_overflow)
          if (bad_step < 0 || static_cast<long>(j) < bad_step) bad_step = static_cast<long>(j);
        }
        x[(j + 1) * m + c] = v;
      }
    }
  }
  if (bad_step >= 0)
    throw Error(ErrorKind::kNumericalOverflow,
                "Euler-Maruyama state is not finite at step " + std::to_string(bad_step));
  return out;
}

void first_exit_time(PathBatch& batch, double a, double b, double t_max, std::size_t component) {
  const std::size_t cap = batch.grid.index_at_or_before(t_max);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    std::size_t stop = cap;
    for (std::size_t j = 0; j <= cap; ++j) {
      const double x = batch.state(i, j, component);
      if (!(x > a && x < b)) {
        stop = j;
        break;
      }
    }
    batch.stop_index[i] = stop;
  }
  freeze_after_stop(batch);
}

DensityProcess constant_density(std::vector<double> q) {
  return [q](const NodeView&, std::span<double> out) { std::copy(q.begin(), q.end(), out.begin()); };
}

double GirsanovWeightPath::L(std::size_t i, std::size_t j) const { return std::exp(log_L.at(i, j)); }

double GirsanovWeightPath::terminal(const PathBatch& batch, std::size_t i) const {
  return L(i, batch.stop_index[i]);
}

double GirsanovWeightPath::log_terminal(const PathBatch& batch, std::size_t i) const {
  return log_L.at(i, batch.stop_index[i]);
}

GirsanovWeightPath girsanov_weights(const DensityProcess& q, const ScalarField& nu,
                                    const PathBatch& batch) {
  GirsanovWeightPath w;
  w.log_L = Field(batch.n_paths, batch.n_nodes(), 1, 0.0);
  const std::size_t d = batch.dim;
  long bad_path = -1;
  double bad_q = 0.0, bad_nu = 0.0;
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    std::vector<double> qv(d);
    double acc = 0.0;
    const std::size_t stop = batch.stop_index[i];
    for (std::size_t j = 0; j < batch.n_steps(); ++j) {
      if (j < stop) {
        const double t = batch.grid.times[j];
        const auto x = batch.state_row(i, j);
        q(NodeView{t, i, j, x}, qv);
        double q2 = 0.0, qdB = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          q2 += qv[k] * qv[k];
          qdB += qv[k] * batch.dB(i, j, k);
        }
        const double bound = nu(t, x);
        if (std::sqrt(q2) > bound + 1e-12) {
#pragma omp critical(bsdelab_girsanov_domain)
          if (bad_path < 0) {
            bad_path = static_cast<long>(i);
            bad_q = std::sqrt(q2);
            bad_nu = bound;
          }
        }
        acc += qdB - 0.5 * q2 * batch.grid.dt(j);
      }
      w.log_L.at(i, j + 1) = acc;
    }
  }
  if (bad_path >= 0)
    throw Error(ErrorKind::kDomainViolation,
                "density |q| = " + std::to_string(bad_q) + " exceeds nu = " + std::to_string(bad_nu) +
                    " on path " + std::to_string(bad_path));
  return w;
}

}  // namespace bsdelab
