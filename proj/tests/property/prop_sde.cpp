#include <cmath>
#include <vector>

#include "bsdelab/kernels.hpp"
#include "bsdelab/sde.hpp"
#include "doctest.h"

using namespace bsdelab;

TEST_SUITE("sde-sim") {

TEST_CASE("GBM weak error halves when the step count doubles") {
  const double b = 1.0, s = 0.1, exact = std::exp(1.0);
  const PathBatch fine = simulate_brownian(100000, build_grid(0, 1, 64), 1, 201);
  const DriftDiffusionSpec gbm =
      scalar_diffusion([b](double, double x) { return b * x; }, [s](double, double x) { return s * x; }, 1.0);
  std::vector<double> bias;
  for (std::size_t factor : {8, 4, 2, 1}) {
    const PathBatch paths = euler_maruyama(gbm, factor == 1 ? fine : coarsen_brownian(fine, factor));
    std::vector<double> xT(paths.n_paths);
    for (std::size_t i = 0; i < paths.n_paths; ++i) xT[i] = paths.state(i, paths.n_steps());
    bias.push_back(exact - kernels::parallel::mean(xT).value);
  }
  for (std::size_t k = 0; k + 1 < bias.size(); ++k) {
    CAPTURE(k);
    const double ratio = bias[k] / bias[k + 1];
    CHECK(ratio >= 1.4);
    CHECK(ratio <= 2.6);
  }
}

TEST_CASE("reweighting agrees with direct simulation under the shifted drift") {
  const TimeGrid grid = build_grid(0, 1, 32);
  const auto phi = [](double x) { return std::sin(2.0 * x) + (x > 0.5 ? 1.0 : 0.0); };
  for (double q : {-0.6, 0.3, 0.8}) {
    CAPTURE(q);
    const PathBatch base = simulate_brownian(50000, grid, 1, 202);
    const GirsanovWeightPath L = girsanov_weights(constant_density({q}), constant_field(1.0), base);
    std::vector<double> weighted(base.n_paths), direct(base.n_paths);
    for (std::size_t i = 0; i < base.n_paths; ++i) {
      CHECK(L.L(i, 0) == 1.0);
      weighted[i] = L.terminal(base, i) * phi(base.state(i, base.n_steps()));
    }
    const PathBatch other = simulate_brownian(50000, grid, 1, 203);
    const PathBatch shifted =
        euler_maruyama(scalar_diffusion([q](double, double) { return q; }, [](double, double) { return 1.0; }, 0.0), other);
    for (std::size_t i = 0; i < shifted.n_paths; ++i) direct[i] = phi(shifted.state(i, shifted.n_steps()));
    const Estimate a = kernels::parallel::mean(weighted), c = kernels::parallel::mean(direct);
    CHECK(std::abs(a.value - c.value) <= 3.0 * std::hypot(a.se, c.se));
  }
}

TEST_CASE("weights are positive with unit mean") {
  const PathBatch b = simulate_brownian(50000, build_grid(0, 1, 32), 1, 204);
  const GirsanovWeightPath L = girsanov_weights(
      [](const NodeView& n, std::span<double> out) { out[0] = 0.5 * std::tanh(n.x[0]); }, constant_field(0.5), b);
  std::vector<double> terminal(b.n_paths);
  for (std::size_t i = 0; i < b.n_paths; ++i) {
    terminal[i] = L.terminal(b, i);
    CHECK(terminal[i] > 0.0);
  }
  const Estimate m = kernels::parallel::mean(terminal);
  CHECK(std::abs(m.value - 1.0) <= 3.0 * m.se);
}

TEST_CASE("states and weights freeze after the stopping node") {
  const PathBatch driver = simulate_brownian(3000, build_grid(0, 2, 200), 1, 205);
  PathBatch ou = euler_maruyama(
      scalar_diffusion([](double, double x) { return -x; }, [](double, double) { return 0.8; }, 0.2), driver);
  first_exit_time(ou, -0.5, 0.7, 2.0);
  const GirsanovWeightPath L = girsanov_weights(constant_density({0.4}), constant_field(1.0), ou);
  std::size_t stopped_early = 0;
  for (std::size_t i = 0; i < ou.n_paths; ++i) {
    const std::size_t s = ou.stop_index[i];
    stopped_early += s < ou.n_steps();
    for (std::size_t j = s; j < ou.n_nodes(); ++j) {
      CHECK(ou.state(i, j) == ou.state(i, s));
      CHECK(L.log_L.at(i, j) == L.log_L.at(i, s));
    }
    for (std::size_t j = 0; j < s; ++j) CHECK((ou.state(i, j) > -0.5 && ou.state(i, j) < 0.7));
  }
  CHECK(stopped_early > ou.n_paths / 2);
}

TEST_CASE("path generation is reproducible and worker-count free") {
  const TimeGrid g = build_grid(0, 1, 8);
  const PathBatch a = simulate_brownian(5000, g, 2, 206);
  const PathBatch b = simulate_brownian(5000, g, 2, 206);
  CHECK(a.increments == b.increments);
  const PathBatch head = simulate_brownian(10, g, 2, 206);
  for (std::size_t k = 0; k < head.increments.size(); ++k) CHECK(head.increments[k] == a.increments[k]);
}

}  // TEST_SUITE
