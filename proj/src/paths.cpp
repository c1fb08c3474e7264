#include "bsdelab/paths.hpp"

#include <algorithm>

#include "bsdelab/errors.hpp"
#include "bsdelab/parallel.hpp"

namespace bsdelab {

ScalarField constant_field(double value) {
  return [value](double, std::span<const double>) { return value; };
}

Field evaluate_field(const ScalarField& f, const PathBatch& batch) {
  Field out(batch.n_paths, batch.n_nodes(), 1);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    const std::size_t stop = batch.stop_index[i];
    for (std::size_t j = 0; j <= stop; ++j)
      out.at(i, j) = f(batch.grid.times[j], batch.state_row(i, j));
    for (std::size_t j = stop + 1; j < batch.n_nodes(); ++j) out.at(i, j) = out.at(i, stop);
  }
  return out;
}

Field cumulative_integral(const Field& values, const PathBatch& batch) {
  Field out(batch.n_paths, batch.n_nodes(), 1);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    const std::size_t stop = batch.stop_index[i];
    double acc = 0.0;
    for (std::size_t j = 1; j < batch.n_nodes(); ++j) {
      if (j <= stop) acc += 0.5 * (values.at(i, j - 1) + values.at(i, j)) * batch.grid.dt(j - 1);
      out.at(i, j) = acc;
    }
  }
  return out;
}

Field running_integral(const ScalarField& f, const PathBatch& batch) {
  return cumulative_integral(evaluate_field(f, batch), batch);
}

void augment_running_integral(PathBatch& batch, const ScalarField& f) {
  const Field integral = running_integral(f, batch);
  const std::size_t old_dim = batch.state_dim;
  const std::size_t nodes = batch.n_nodes();
  std::vector<double> states(batch.n_paths * nodes * (old_dim + 1));
  for (std::size_t i = 0; i < batch.n_paths; ++i)
    for (std::size_t j = 0; j < nodes; ++j) {
      double* dst = states.data() + (i * nodes + j) * (old_dim + 1);
      const auto src = batch.state_row(i, j);
      std::copy(src.begin(), src.end(), dst);
      dst[old_dim] = integral.at(i, j);
    }
  batch.states = std::move(states);
  batch.state_dim = old_dim + 1;
}

PathBatch truncate_batch(const PathBatch& batch, std::size_t n_steps) {
  PathBatch out;
  out.n_paths = batch.n_paths;
  out.dim = batch.dim;
  out.state_dim = batch.state_dim;
  out.seed = batch.seed;
  out.grid = truncate_grid(batch.grid, n_steps);
  out.increments.resize(batch.n_paths * n_steps * batch.dim);
  out.states.resize(batch.n_paths * (n_steps + 1) * batch.state_dim);
  out.stop_index.resize(batch.n_paths);
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    std::copy_n(batch.increments.begin() + static_cast<long>(i * batch.n_steps() * batch.dim),
                n_steps * batch.dim, out.increments.begin() + static_cast<long>(i * n_steps * batch.dim));
    std::copy_n(batch.states.begin() + static_cast<long>(i * batch.n_nodes() * batch.state_dim),
                (n_steps + 1) * batch.state_dim,
                out.states.begin() + static_cast<long>(i * (n_steps + 1) * batch.state_dim));
    out.stop_index[i] = std::min(batch.stop_index[i], n_steps);
  }
  return out;
}

void freeze_after_stop(PathBatch& batch) {
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    const std::size_t stop = batch.stop_index[i];
    const auto frozen = batch.state_row(i, stop);
    std::vector<double> keep(frozen.begin(), frozen.end());
    for (std::size_t j = stop + 1; j < batch.n_nodes(); ++j) {
      auto row = batch.state_row(i, j);
      std::copy(keep.begin(), keep.end(), row.begin());
    }
  }
}

}  // namespace bsdelab
