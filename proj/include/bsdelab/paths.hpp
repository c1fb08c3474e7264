#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bsdelab/grid.hpp"

namespace bsdelab {

/// Per-path, per-node array of `width` reals, stored path-major.
struct Field {
  std::size_t n_paths = 0;
  std::size_t n_nodes = 0;
  std::size_t width = 1;
  std::vector<double> data;

  Field() = default;
  Field(std::size_t paths, std::size_t nodes, std::size_t w, double fill = 0.0)
      : n_paths(paths), n_nodes(nodes), width(w), data(paths * nodes * w, fill) {}

  double& at(std::size_t i, std::size_t j, std::size_t c = 0) {
    return data[(i * n_nodes + j) * width + c];
  }
  double at(std::size_t i, std::size_t j, std::size_t c = 0) const {
    return data[(i * n_nodes + j) * width + c];
  }
  std::span<double> row(std::size_t i, std::size_t j) {
    return {data.data() + (i * n_nodes + j) * width, width};
  }
  std::span<const double> row(std::size_t i, std::size_t j) const {
    return {data.data() + (i * n_nodes + j) * width, width};
  }
};

/// Seeded sample of driving Brownian increments and the states they induce.
struct PathBatch {
  std::size_t n_paths = 0;
  std::size_t dim = 1;        // Brownian dimension d
  std::size_t state_dim = 1;  // columns of `states`
  std::uint64_t seed = 0;
  TimeGrid grid;
  std::vector<double> increments;  // [n_paths][n_steps][dim]
  std::vector<double> states;      // [n_paths][n_steps + 1][state_dim]
  std::vector<std::size_t> stop_index;

  std::size_t n_steps() const { return grid.n_steps; }
  std::size_t n_nodes() const { return grid.n_steps + 1; }

  double dB(std::size_t i, std::size_t j, std::size_t k = 0) const {
    return increments[(i * grid.n_steps + j) * dim + k];
  }
  std::span<const double> dB_row(std::size_t i, std::size_t j) const {
    return {increments.data() + (i * grid.n_steps + j) * dim, dim};
  }
  double state(std::size_t i, std::size_t j, std::size_t c = 0) const {
    return states[(i * n_nodes() + j) * state_dim + c];
  }
  std::span<const double> state_row(std::size_t i, std::size_t j) const {
    return {states.data() + (i * n_nodes() + j) * state_dim, state_dim};
  }
  std::span<double> state_row(std::size_t i, std::size_t j) {
    return {states.data() + (i * n_nodes() + j) * state_dim, state_dim};
  }
  /// State at the path's stopping node.
  std::span<const double> stopped_state(std::size_t i) const {
    return state_row(i, stop_index[i]);
  }
};

/// Where a callback is being evaluated. `path` and `node` let path-dependent
/// coefficients look up precomputed running quantities.
struct NodeView {
  double t = 0.0;
  std::size_t path = 0;
  std::size_t node = 0;
  std::span<const double> x;
};

/// Coefficient process given as a function of time and the Markov state.
using ScalarField = std::function<double(double t, std::span<const double> x)>;

ScalarField constant_field(double value);

/// Values of `f` at every node up to each path's stop index; frozen beyond.
Field evaluate_field(const ScalarField& f, const PathBatch& batch);

/// Running trapezoid integral int_{t0}^{t_j} of a width-1 node field, frozen
/// after each path's stop index.
Field cumulative_integral(const Field& values, const PathBatch& batch);

/// Shorthand for cumulative_integral(evaluate_field(f, batch), batch).
Field running_integral(const ScalarField& f, const PathBatch& batch);

/// Appends a state column holding the running trapezoid integral of `f`, so
/// path functionals such as int |B|^4 dt become part of the regression state.
void augment_running_integral(PathBatch& batch, const ScalarField& f);

/// Same increments on the first n_steps steps. Stop indices are clamped.
PathBatch truncate_batch(const PathBatch& batch, std::size_t n_steps);

/// Sets every state beyond a path's stop index to the stopped value.
void freeze_after_stop(PathBatch& batch);

}  // namespace bsdelab
