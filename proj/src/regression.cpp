#include "bsdelab/regression.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "bsdelab/errors.hpp"
#include "bsdelab/kernels.hpp"

namespace bsdelab {
namespace {

void monomials(std::size_t n_vars, int degree, std::vector<int>& current, std::size_t var,
               int remaining, std::vector<std::vector<int>>& out) {
  if (var == n_vars) {
    out.push_back(current);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    current[var] = e;
    monomials(n_vars, degree, current, var + 1, remaining - e, out);
  }
  current[var] = 0;
}

}  // namespace

void PolynomialBasis::eval(std::span<const double> x, std::span<double> out) const {
  double u[8];
  for (std::size_t c = 0; c < columns.size(); ++c) u[c] = (x[columns[c]] - center[c]) / scale[c];
  for (std::size_t t = 0; t < exponents.size(); ++t) {
    double v = 1.0;
    for (std::size_t c = 0; c < columns.size(); ++c)
      for (int e = 0; e < exponents[t][c]; ++e) v *= u[c];
    out[t] = v;
  }
}

PolynomialBasis fit_basis(const PathBatch& batch, std::size_t node,
                          std::span<const std::size_t> rows, int degree) {
  if (batch.state_dim > 8) throw Error(ErrorKind::kConfiguration, "regression state too wide");
  PolynomialBasis basis;
  basis.degree = degree;
  std::vector<double> column(rows.size());
  for (std::size_t c = 0; c < batch.state_dim && degree > 0; ++c) {
    for (std::size_t r = 0; r < rows.size(); ++r) column[r] = batch.state(rows[r], node, c);
    const Estimate m = kernels::parallel::mean(column);
    const double sd = m.se * std::sqrt(static_cast<double>(rows.size()));
    if (!(sd > 1e-12 * (1.0 + std::abs(m.value))) || !std::isfinite(sd)) continue;
    basis.columns.push_back(c);
    basis.center.push_back(m.value);
    basis.scale.push_back(sd);
  }
  std::vector<int> current(basis.columns.size(), 0);
  monomials(basis.columns.size(), degree, current, 0, basis.columns.empty() ? 0 : degree,
            basis.exponents);
  return basis;
}

std::vector<double> least_squares(std::span<const double> design, std::size_t n_cols,
                                  std::span<const double> targets, std::size_t n_targets,
                                  double ridge, double min_rcond) {
  const std::size_t n_rows = design.size() / n_cols;
  std::vector<double> gram(n_cols * n_cols), rhs(n_cols * n_targets);
  kernels::parallel::normal_equations(design, n_cols, targets, n_targets, gram, rhs);
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Mat G = Eigen::Map<Mat>(gram.data(), n_cols, n_cols) / static_cast<double>(n_rows);
  Mat R = Eigen::Map<Mat>(rhs.data(), n_cols, n_targets) / static_cast<double>(n_rows);

  Eigen::VectorXd d = G.diagonal();
  for (std::size_t c = 0; c < n_cols; ++c)
    if (!(d[c] > 0.0) || !std::isfinite(d[c]))
      throw Error(ErrorKind::kDegenerateBasis, "regression column " + std::to_string(c) + " vanishes");
  const Eigen::VectorXd inv_sqrt = d.cwiseSqrt().cwiseInverse();
  const Mat C = inv_sqrt.asDiagonal() * G * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> eig(C, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmin > min_rcond * lmax))
    throw Error(ErrorKind::kDegenerateBasis,
                "regression design is singular (rcond " + std::to_string(lmin / lmax) + ")");

  G.diagonal().array() += ridge;
  const Mat coef = G.ldlt().solve(R);
  std::vector<double> out(n_cols * n_targets);
  Eigen::Map<Mat>(out.data(), n_cols, n_targets) = coef;
  return out;
}

std::vector<double> conditional_expectation(const PathBatch& batch, std::size_t node,
                                            std::span<const std::size_t> rows,
                                            std::span<const double> targets, std::size_t n_targets,
                                            int degree, double ridge) {
  while (degree > 0) {
    const PolynomialBasis probe = fit_basis(batch, node, rows, degree);
    if (rows.size() >= 2 * probe.size()) break;
    --degree;
  }
  const PolynomialBasis basis = fit_basis(batch, node, rows, degree);
  const std::size_t n_cols = basis.size();
  std::vector<double> design(rows.size() * n_cols);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t r = 0; r < rows.size(); ++r)
    basis.eval(batch.state_row(rows[r], node), std::span<double>(design.data() + r * n_cols, n_cols));
  const std::vector<double> coef = least_squares(design, n_cols, targets, n_targets, ridge);
  std::vector<double> fitted(rows.size() * n_targets);
  kernels::parallel::predict(design, n_cols, coef, n_targets, fitted);
  return fitted;
}

}  // namespace bsdelab
