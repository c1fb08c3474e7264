#pragma once

// Data-parallel inner loops. Every kernel has an OpenMP implementation used by
// the library and a plain serial reference kept for tests and benchmarks.
// Parallel kernels partition work by data index only, never by worker id, so
// their output is identical for any worker count.

#include <cstddef>
#include <cstdint>
#include <span>

#include "bsdelab/parallel.hpp"

namespace bsdelab::kernels {

namespace parallel {

double sum(std::span<const double> values);

/// Sample mean and its standard error.
Estimate mean(std::span<const double> values);

/// log(mean(exp(values))), evaluated with a max shift. -inf entries are
/// treated as zero contributions.
double log_mean_exp(std::span<const double> values);

/// Fills `out` with per_path standard normals for each of n_paths paths,
/// path-major. Path i draws from PathStream(seed, first_path + i).
void fill_normals(std::uint64_t seed, std::uint64_t first_path, std::size_t n_paths,
                  std::size_t per_path, std::span<double> out);

/// Normal equations of a least-squares problem. `design` is row-major
/// [n_rows x n_cols]; `targets` row-major [n_rows x n_targets]. Writes the
/// full symmetric gram = X^T X and rhs = X^T Y (row-major [n_cols x n_targets]).
void normal_equations(std::span<const double> design, std::size_t n_cols,
                      std::span<const double> targets, std::size_t n_targets,
                      std::span<double> gram, std::span<double> rhs);

/// out[i, t] = sum_c design[i, c] * coef[c, t].
void predict(std::span<const double> design, std::size_t n_cols, std::span<const double> coef,
             std::size_t n_targets, std::span<double> out);

}  // namespace parallel

namespace reference {

double sum(std::span<const double> values);
Estimate mean(std::span<const double> values);
double log_mean_exp(std::span<const double> values);
void fill_normals(std::uint64_t seed, std::uint64_t first_path, std::size_t n_paths,
                  std::size_t per_path, std::span<double> out);
void normal_equations(std::span<const double> design, std::size_t n_cols,
                      std::span<const double> targets, std::size_t n_targets,
                      std::span<double> gram, std::span<double> rhs);
void predict(std::span<const double> design, std::size_t n_cols, std::span<const double> coef,
             std::size_t n_targets, std::span<double> out);

}  // namespace reference

}  // namespace bsdelab::kernels
