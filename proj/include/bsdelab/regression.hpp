#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bsdelab/paths.hpp"

namespace bsdelab {

/// Total-degree monomials in the per-node standardized state. Columns with
/// zero spread over the fitted rows are dropped.
struct PolynomialBasis {
  int degree = 0;
  std::vector<std::size_t> columns;
  std::vector<double> center;
  std::vector<double> scale;
  std::vector<std::vector<int>> exponents;

  std::size_t size() const { return exponents.size(); }
  void eval(std::span<const double> x, std::span<double> out) const;
};

PolynomialBasis fit_basis(const PathBatch& batch, std::size_t node,
                          std::span<const std::size_t> rows, int degree);

/// Ridge-guarded least squares. `design` is [n_rows x n_cols], `targets`
/// [n_rows x n_targets]; returns coefficients [n_cols x n_targets]. The
/// normal equations are scaled by 1/n_rows before the ridge is added. Throws a
/// degenerate-basis error when the column-equilibrated gram matrix has
/// reciprocal condition number below `min_rcond`.
std::vector<double> least_squares(std::span<const double> design, std::size_t n_cols,
                                  std::span<const double> targets, std::size_t n_targets,
                                  double ridge = 1e-10, double min_rcond = 1e-14);

/// E[target | state at node] for the given rows, fitted on a polynomial basis
/// and evaluated back on the same rows. `targets` is [rows.size() x n_targets].
std::vector<double> conditional_expectation(const PathBatch& batch, std::size_t node,
                                            std::span<const std::size_t> rows,
                                            std::span<const double> targets, std::size_t n_targets,
                                            int degree, double ridge = 1e-10);

}  // namespace bsdelab
