#include <cmath>
#include <vector>

#include "bsdelab/errors.hpp"
#include "bsdelab/kernels.hpp"
#include "bsdelab/sde.hpp"
#include "doctest.h"

using namespace bsdelab;

namespace {

Estimate mean_of(const std::vector<double>& v) { return kernels::parallel::mean(v); }

}  // namespace

TEST_SUITE("sde-sim") {

TEST_CASE("increments have the Brownian law") {
  const PathBatch b = simulate_brownian(20000, build_grid(0, 1, 8), 1, 3);
  const double dt = 1.0 / 8.0;
  for (std::size_t j = 0; j < 8; ++j) {
    std::vector<double> inc(b.n_paths), sq(b.n_paths);
    for (std::size_t i = 0; i < b.n_paths; ++i) {
      inc[i] = b.dB(i, j);
      sq[i] = inc[i] * inc[i];
    }
    const Estimate m = mean_of(inc), v = mean_of(sq);
    CHECK(std::abs(m.value) <= 4.0 * m.se);
    CHECK(std::abs(v.value - dt) <= 4.0 * v.se);
  }
}

TEST_CASE("same seed gives bit-identical batches") {
  const PathBatch a = simulate_brownian(500, build_grid(0, 1, 16), 2, 42);
  const PathBatch b = simulate_brownian(500, build_grid(0, 1, 16), 2, 42);
  const PathBatch c = simulate_brownian(500, build_grid(0, 1, 16), 2, 43);
  CHECK(a.increments == b.increments);
  CHECK(a.states == b.states);
  CHECK(a.increments != c.increments);
}

TEST_CASE("E[B_1^2] = 1") {
  const PathBatch b = simulate_brownian(100000, build_grid(0, 1, 4), 1, 8);
  std::vector<double> sq(b.n_paths);
  for (std::size_t i = 0; i < b.n_paths; ++i) sq[i] = b.state(i, 4) * b.state(i, 4);
  const Estimate e = mean_of(sq);
  CHECK(std::abs(e.value - 1.0) <= 3.0 * e.se);
}

TEST_CASE("coarsening keeps B at shared nodes") {
  const PathBatch fine = simulate_brownian(50, build_grid(0, 1, 16), 1, 2);
  const PathBatch coarse = coarsen_brownian(fine, 4);
  REQUIRE(coarse.n_steps() == 4);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = 0; j <= 4; ++j) CHECK(coarse.state(i, j) == fine.state(i, 4 * j));
  CHECK_THROWS_AS(coarsen_brownian(fine, 3), Error);
}

TEST_CASE("Euler-Maruyama identity, GBM mean and deterministic drift") {
  const PathBatch driver = simulate_brownian(100000, build_grid(0, 1, 64), 1, 17);
  const PathBatch id = euler_maruyama(scalar_diffusion([](double, double) { return 0.0; },
                                                       [](double, double) { return 1.0; }, 0.0),
                                      driver);
  for (std::size_t i = 0; i < 100; ++i)
    for (std::size_t j = 0; j <= 64; ++j) CHECK(id.state(i, j) == doctest::Approx(driver.state(i, j)).epsilon(1e-12));

  const PathBatch gbm = euler_maruyama(scalar_diffusion([](double, double x) { return 0.1 * x; },
                                                        [](double, double x) { return 0.2 * x; }, 1.0),
                                       driver);
  std::vector<double> xt(gbm.n_paths);
  for (std::size_t i = 0; i < gbm.n_paths; ++i) xt[i] = gbm.state(i, 64);
  const Estimate m = mean_of(xt);
  CHECK(std::abs(m.value - std::exp(0.1)) <= 3.0 * m.se + 0.5 / 64.0);

  const PathBatch ode = euler_maruyama(scalar_diffusion([](double, double) { return 1.0; },
                                                        [](double, double) { return 0.0; }, 0.25),
                                       driver);
  CHECK(ode.state(0, 64) == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("first exit times") {
  PathBatch out = simulate_brownian(10, build_grid(0, 2, 8), 1, 1);
  for (double& x : out.states) x += 3.0;  // start outside (-1, 1)
  first_exit_time(out, -1, 1, 2.0);
  for (std::size_t s : out.stop_index) CHECK(s == 0);

  const PathBatch drv = simulate_brownian(10, build_grid(0, 2, 8), 1, 1);
  PathBatch still = euler_maruyama(scalar_diffusion([](double, double) { return 0.0; },
                                                    [](double, double) { return 0.0; }, 0.0),
                                   drv);
  first_exit_time(still, -1, 1, 1.5);
  for (std::size_t s : still.stop_index) CHECK(s == 6);

  PathBatch bm = simulate_brownian(5000, build_grid(0, 8, 2000), 1, 23);
  first_exit_time(bm, -1, 1, 8.0);
  std::vector<double> tau(bm.n_paths);
  for (std::size_t i = 0; i < bm.n_paths; ++i) tau[i] = bm.grid.times[bm.stop_index[i]];
  const Estimate e = mean_of(tau);
  // Discrete monitoring overshoots by about 0.5826 sqrt(dt) in space.
  const double bias = 2.0 * 0.5826 * std::sqrt(4e-3) + 4e-3;
  CHECK(std::abs(e.value - 1.0) <= 3.0 * e.se + bias);
}

TEST_CASE("Girsanov weights") {
  const PathBatch b = simulate_brownian(100000, build_grid(0, 1, 16), 1, 5);
  const GirsanovWeightPath null = girsanov_weights(constant_density({0.0}), constant_field(1.0), b);
  for (std::size_t i = 0; i < 10; ++i) CHECK(null.terminal(b, i) == 1.0);

  const GirsanovWeightPath w = girsanov_weights(constant_density({0.5}), constant_field(1.0), b);
  std::vector<double> L(b.n_paths), LB(b.n_paths);
  for (std::size_t i = 0; i < b.n_paths; ++i) {
    L[i] = w.terminal(b, i);
    LB[i] = L[i] * b.state(i, 16);
  }
  const Estimate eL = mean_of(L), eLB = mean_of(LB);
  CHECK(std::abs(eL.value - 1.0) <= 3.0 * eL.se);
  CHECK(std::abs(eLB.value - 0.5) <= 3.0 * eLB.se);

  try {
    girsanov_weights(constant_density({0.7}), constant_field(0.5), b);
    FAIL("expected a core-domain violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDomainViolation);
  }
}

}  // TEST_SUITE
