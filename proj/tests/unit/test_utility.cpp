#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "bsdelab/conjugate.hpp"
#include "bsdelab/errors.hpp"
#include "bsdelab/kernels.hpp"
#include "bsdelab/sde.hpp"
#include "bsdelab/utility.hpp"
#include "doctest.h"

using namespace bsdelab;

namespace {

CoreFunctionSpec core_of(std::function<double(double)> f, double nu) {
  CoreFunctionSpec c;
  c.f = [f](double, std::span<const double>, std::span<const double> q) { return f(q[0]); };
  c.nu = constant_field(nu);
  return c;
}

UtilityConfig config_for(double nu) {
  UtilityConfig cfg;
  cfg.rho = constant_field(nu * nu);
  return cfg;
}

std::vector<double> terminal_B(const PathBatch& b) {
  std::vector<double> xi(b.n_paths);
  for (std::size_t i = 0; i < b.n_paths; ++i) xi[i] = b.state(i, b.n_steps());
  return xi;
}

}  // namespace

TEST_SUITE("concave-utility") {

TEST_CASE("conjugate of the zero core on a ball is nu |z|") {
  const CoreFunctionSpec c = core_of([](double) { return 0.0; }, 0.5);
  const double x[] = {0.0};
  for (double z : {-3.0, -0.2, 0.0, 1.0, 7.5}) {
    const double zz[] = {z};
    CHECK(conjugate_point(c, 0, x, zz).value == doctest::Approx(0.5 * std::abs(z)).epsilon(1e-12));
  }
  const ConjugateTable t = legendre_fenchel(c, 0, x, uniform_grid(-5, 5, 201));
  CHECK(t.value(9.0) == doctest::Approx(4.5));
  CHECK(t.subgradient(2.0) == doctest::Approx(0.5));
  CHECK(t.subgradient(-2.0) == doctest::Approx(-0.5));
  CHECK(t.convex());
}

TEST_CASE("single-point domain gives g = 0") {
  const CoreFunctionSpec c = core_of([](double) { return 0.0; }, 0.0);
  const double x[] = {0.0};
  for (double z : {-2.0, 0.0, 3.0}) {
    const double zz[] = {z};
    CHECK(conjugate_point(c, 0, x, zz).value == 0.0);
  }
}

TEST_CASE("clipped quadratic conjugate") {
  const CoreFunctionSpec c = core_of([](double q) { return 0.5 * q * q; }, 2.0);
  const double x[] = {0.0};
  for (double z : {-1.5, 0.3, 1.9}) {
    const double zz[] = {z};
    CHECK(conjugate_point(c, 0, x, zz).value == doctest::Approx(0.5 * z * z).epsilon(1e-9));
  }
  for (double z : {2.5, 6.0}) {
    const double zz[] = {z};
    CHECK(conjugate_point(c, 0, x, zz).value == doctest::Approx(2.0 * z - 2.0).epsilon(1e-9));
  }
  const ConjugateTable t = legendre_fenchel(c, 0, x, uniform_grid(-8, 8, 1601));
  CHECK(t.subgradient(1.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(biconjugation_error(c, t, 0, x) < 1e-3);
  CHECK(conjugate_band(t, 2.0).pass);
}

TEST_CASE("empty core domain is a degenerate core") {
  CoreFunctionSpec c = core_of([](double) { return std::numeric_limits<double>::infinity(); }, 1.0);
  const double x[] = {0.0}, z[] = {1.0};
  try {
    conjugate_point(c, 0, x, z);
    FAIL("expected a degenerate core");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerateCore);
  }
}

TEST_CASE("single-measure utility is the expectation") {
  const PathBatch b = simulate_brownian(50000, build_grid(0, 1, 16), 1, 1);
  std::vector<double> xi(b.n_paths);
  for (std::size_t i = 0; i < b.n_paths; ++i) xi[i] = std::exp(b.state(i, 16));
  const CoreFunctionSpec c = core_of([](double) { return 0.0; }, 0.0);
  const UtilityBsde u = utility_via_bsde(xi, c, config_for(0.0), b);
  CHECK(std::abs(u.u0.value - std::exp(0.5)) <= 3.0 * u.u0.se);
}

TEST_CASE("worst-case drift utility, cash additivity and the dual") {
  const PathBatch b = simulate_brownian(100000, build_grid(0, 1, 32), 1, 2);
  const CoreFunctionSpec c = core_of([](double) { return 0.0; }, 0.5);
  const UtilityConfig cfg = config_for(0.5);
  const std::vector<double> xi = terminal_B(b);
  const UtilityBsde u = utility_via_bsde(xi, c, cfg, b);
  CHECK(std::abs(u.u0.value + 0.5) <= 0.02);

  std::vector<double> shifted(xi);
  for (double& v : shifted) v += 0.7;
  const UtilityBsde us = utility_via_bsde(shifted, c, cfg, b);
  CHECK(std::abs(us.u0.value - u.u0.value - 0.7) <= 3.0 * std::hypot(u.u0.se, us.u0.se));

  const std::vector<DualCandidate> cands{{"q=-0.5", constant_density({-0.5})},
                                         {"q=0", constant_density({0.0})},
                                         {"q=0.5", constant_density({0.5})},
                                         {"q=0.9", constant_density({0.9})}};
  const DualResult d = utility_via_dual(xi, c, cfg.mu, cands, b);
  REQUIRE(d.best < d.rows.size());
  CHECK(d.rows[d.best].label == "q=-0.5");
  CHECK(std::abs(d.best_value.value + 0.5) <= 3.0 * d.best_value.se);
  CHECK(d.rows[3].rejected);
  const Estimate mean_xi = kernels::parallel::mean(xi);
  CHECK(d.rows[1].value.value == doctest::Approx(mean_xi.value).epsilon(1e-12));
  for (const DualRow& r : d.rows)
    if (!r.rejected) CHECK(r.value.value >= u.u0.value - 3.0 * std::hypot(r.value.se, u.u0.se));

  const OptimalDensity q = optimal_density(u, c, cfg, b);
  double worst = 0.0;
  for (double v : q.q.data) worst = std::max(worst, std::abs(v + 0.5));
  CHECK(worst < 1e-6);
}

TEST_CASE("zero-radius core has q~ = 0 and no gap") {
  const PathBatch b = simulate_brownian(20000, build_grid(0, 1, 16), 1, 3);
  const CoreFunctionSpec c = core_of([](double) { return 0.0; }, 0.0);
  const std::vector<double> xi = terminal_B(b);
  const UtilityReport r = evaluate_utility(xi, c, config_for(0.0), b, constant_candidates(c, 1));
  for (double v : optimal_density(utility_via_bsde(xi, c, config_for(0.0), b), c, config_for(0.0), b).q.data)
    CHECK(v == 0.0);
  CHECK(std::abs(r.dual_at_optimum.value - r.u_bsde.value) <= 3.0 * r.combined_se + 1e-12);
}

TEST_CASE("clipped quadratic: q~ = clip(-Z, -nu, nu) closes the gap") {
  const PathBatch b = simulate_brownian(100000, build_grid(0, 1, 32), 1, 4);
  const CoreFunctionSpec c = core_of([](double q) { return 0.5 * q * q; }, 2.0);
  const UtilityConfig cfg = config_for(2.0);
  const std::vector<double> xi = terminal_B(b);
  const UtilityBsde u = utility_via_bsde(xi, c, cfg, b);
  CHECK(std::abs(u.u0.value + 0.5) <= 0.02);
  const OptimalDensity q = optimal_density(u, c, cfg, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < b.n_paths; i += 101)
    for (std::size_t j = 0; j < b.n_steps(); ++j)
      worst = std::max(worst, std::abs(q.q.at(i, j) - std::clamp(-u.solution.Z.at(i, j), -2.0, 2.0)));
  CHECK(worst < 1e-3);
  const UtilityReport r = evaluate_utility(xi, c, cfg, b, constant_candidates(c, 5));
  CHECK(std::abs(r.dual_at_optimum.value - r.u_bsde.value) <= 0.02);
}

TEST_CASE("axioms on cash-shifted and identical payoffs") {
  const PathBatch b = simulate_brownian(20000, build_grid(0, 1, 16), 1, 5);
  const CoreFunctionSpec c = core_of([](double) { return 0.0; }, 0.5);
  const UtilityConfig cfg = config_for(0.5);
  const std::vector<double> xi = terminal_B(b);
  std::vector<double> eta(xi);
  for (double& v : eta) v -= 1.0;
  const AxiomReport a = axiom_check(xi, eta, c, cfg, b);
  CHECK(a.pass());
  REQUIRE(a.rows.front().axiom == "monotonicity");
  CHECK(a.rows.front().lhs - a.rows.front().rhs == doctest::Approx(1.0).epsilon(0.02));
  for (const AxiomRow& r : a.rows)
    if (r.axiom == "time-consistency") CHECK(std::abs(r.lhs - r.rhs) <= 0.02);

  const AxiomReport same = axiom_check(xi, xi, c, cfg, b);
  for (const AxiomRow& r : same.rows)
    if (r.axiom == "concavity") CHECK(r.lhs == doctest::Approx(r.rhs).epsilon(1e-9));

  std::vector<double> neg(xi);
  for (double& v : neg) v = -v;
  const AxiomReport un = axiom_check(xi, neg, c, cfg, b);
  for (const AxiomRow& r : un.rows) CHECK(r.axiom != "monotonicity");
}

}  // TEST_SUITE
