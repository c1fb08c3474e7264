#include <cmath>
#include <vector>

#include "bsdelab/errors.hpp"
#include "bsdelab/kernels.hpp"
#include "bsdelab/linear_oracle.hpp"
#include "bsdelab/sde.hpp"
#include "doctest.h"

using namespace bsdelab;

namespace {

std::vector<double> terminal_B(const PathBatch& b) {
  std::vector<double> xi(b.n_paths);
  for (std::size_t i = 0; i < b.n_paths; ++i) xi[i] = b.state(i, b.n_steps());
  return xi;
}

}  // namespace

TEST_SUITE("linear-oracle") {

TEST_CASE("deterministic exponential") {
  const PathBatch b = simulate_brownian(1000, build_grid(0, 1, 32), 1, 1);
  const std::vector<double> one(b.n_paths, 1.0);
  const LinearValue v = linear_bsde_value({constant_coefficients(2, 2, 0.5, 0.5, 0.0), {}}, one, b);
  CHECK(v.y0.value == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
}

TEST_CASE("Gaussian shift: y0 = nu T and y_t = B_t + nu (T - t)") {
  const PathBatch b = simulate_brownian(100000, build_grid(0, 1, 32), 1, 2);
  const std::vector<double> xi = terminal_B(b);
  const std::size_t mid = 16;
  const std::size_t nodes[] = {mid};
  const LinearValue v = linear_bsde_value({constant_coefficients(2, 2, 0.09, 0.0, 0.3), {}}, xi, b, nodes);
  CHECK(std::abs(v.y0.value - 0.3) <= 3.0 * v.y0.se);
  double worst = 0.0;
  for (std::size_t i = 0; i < b.n_paths; ++i)
    if (std::abs(b.state(i, mid)) < 2.0)
      worst = std::max(worst, std::abs(v.y.at(i, 0) - (b.state(i, mid) + 0.3 * 0.5)));
  CHECK(worst < 0.05);
}

TEST_CASE("product oracle 0.3 e^0.5") {
  const PathBatch b = simulate_brownian(100000, build_grid(0, 1, 64), 1, 3);
  const LinearValue v = linear_bsde_value({constant_coefficients(2, 2, 0.59, 0.5, 0.3), {}}, terminal_B(b), b);
  const double exact = 0.3 * std::exp(0.5);
  CHECK(std::abs(v.y0.value - exact) <= std::max(3.0 * v.y0.se, 0.01 * exact));
}

TEST_CASE("structural violation is an ill-posed scenario") {
  const PathBatch b = simulate_brownian(100, build_grid(0, 1, 8), 1, 3);
  try {
    linear_bsde_value({constant_coefficients(2, 2, 0.0, 0.5, 0.3), {}}, terminal_B(b), b);
    FAIL("expected an ill-posed scenario");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIllPosed);
  }
}

TEST_CASE("margin study: b = 0 collapses to y = 1") {
  const PathBatch b = simulate_brownian(2000, build_grid(0, 1, 16), 1, 4);
  const double thetas[] = {1.0, 2.0};
  const MarginStudy s = supnorm_margin_study(constant_field(0.0), 2.0, thetas, b);
  for (const MarginRow& r : s.rows) {
    CHECK(r.sup_moment.value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.terminal_moment.value == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("margin study: heavier weight dominates pathwise on the same sample") {
  const PathBatch b = simulate_brownian(20000, build_grid(0, 1, 32), 1, 5);
  const double thetas[] = {1.0, 2.0};
  const MarginStudy s = supnorm_margin_study(constant_field(1.0), 2.0, thetas, b);
  REQUIRE(s.rows.size() == 2);
  CHECK(s.doob_constant[0] == 0.0);
  CHECK(s.doob_constant[1] == doctest::Approx(std::pow(4.0 / 3.0 / (4.0 / 3.0 - 1.0), 4.0 / 3.0)));
  // Pathwise sup(theta'=2) >= sup(theta'=1) because rho grows with theta'.
  CHECK(s.paired_difference[1].value > 0.0);
  CHECK(s.rows[1].sup_moment.value > s.rows[0].sup_moment.value);
}

}  // TEST_SUITE
