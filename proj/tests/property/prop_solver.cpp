#include <cmath>
#include <string>
#include <vector>

#include "bsdelab/generator.hpp"
#include "bsdelab/harness/catalog.hpp"
#include "bsdelab/harness/runner.hpp"
#include "bsdelab/norms.hpp"
#include "bsdelab/sde.hpp"
#include "bsdelab/solver.hpp"
#include "bsdelab/studies.hpp"
#include "doctest.h"

using namespace bsdelab;

namespace {

GeneratorSpec sine_generator() {
  return scalar_generator(
      "sine", [](double, std::span<const double>, double y, double z) { return -y + 0.5 * std::sin(z) + 0.2; },
      constant_coefficients(2, 2, 0.0, -1.0, 0.5));
}

/// Runs a catalog generator with the solve disabled, so only the structural
/// and envelope checks execute.
harness::RunReport probe_only(const std::string& id) {
  harness::Json cfg = harness::catalog_config(id);
  cfg["solve"] = false;
  return harness::run_scenario(harness::parse_scenario(cfg));
}

}  // namespace

TEST_SUITE("bsde-solver") {

TEST_CASE("Y at the stopping node equals xi path-wise") {
  PathBatch b = simulate_brownian(5000, build_grid(0, 2, 64), 1, 401);
  first_exit_time(b, -0.8, 1.0, 2.0);
  std::vector<double> xi(b.n_paths);
  for (std::size_t i = 0; i < b.n_paths; ++i) xi[i] = std::exp(b.stopped_state(i)[0]);
  const BSDESolution s = picard_solve(sine_generator(), xi, b, {});
  for (std::size_t i = 0; i < b.n_paths; ++i)
    for (std::size_t j = b.stop_index[i]; j < b.n_nodes(); ++j) CHECK(s.Y.at(i, j) == xi[i]);
  CHECK(s.residual == 0.0);

  GeneratorSpec pair;
  pair.name = "pair";
  pair.k = 2;
  pair.g = [](const NodeView&, std::span<const double> y, std::span<const double> z, std::span<double> out) {
    out[0] = -y[0] + 0.1 * y[1] + 0.3 * std::tanh(z[0]);
    out[1] = 0.1 * y[0] - y[1] + 0.3 * std::sin(z[1]);
  };
  pair.coeffs = constant_coefficients(2, 2, 0.0, -0.9, 0.3);
  std::vector<double> xi2(2 * b.n_paths);
  for (std::size_t i = 0; i < b.n_paths; ++i) {
    xi2[2 * i] = b.stopped_state(i)[0];
    xi2[2 * i + 1] = 1.0;
  }
  const BSDESolution s2 = picard_solve(pair, xi2, b, {});
  for (std::size_t i = 0; i < b.n_paths; ++i)
    for (std::size_t c = 0; c < 2; ++c) CHECK(s2.Y.at(i, b.stop_index[i], c) == xi2[2 * i + c]);
}

TEST_CASE("comparison: ordered terminal values give ordered Y_0") {
  const PathBatch b = simulate_brownian(50000, build_grid(0, 1, 32), 1, 402);
  std::vector<double> hi(b.n_paths), lo(b.n_paths);
  for (std::size_t i = 0; i < b.n_paths; ++i) {
    const double x = b.state(i, b.n_steps());
    lo[i] = std::sin(x);
    hi[i] = lo[i] + 0.05 * (1.0 + std::tanh(x));
  }
  const BSDESolution a = picard_solve(sine_generator(), hi, b, {});
  const BSDESolution c = picard_solve(sine_generator(), lo, b, {});
  CHECK(a.y0[0].value >= c.y0[0].value - 3.0 * a.y0[0].se);
  CHECK(a.y0[0].value > c.y0[0].value);
}

TEST_CASE("one more Picard step at the fixed point moves V by less than the tolerance") {
  const PathBatch b = simulate_brownian(20000, build_grid(0, 1, 32), 1, 403);
  std::vector<double> xi(b.n_paths);
  for (std::size_t i = 0; i < b.n_paths; ++i) xi[i] = std::cos(b.state(i, b.n_steps()));
  SolverConfig cfg;
  cfg.picard_tol = 1e-7;
  const GeneratorSpec gen = sine_generator();
  const BSDESolution s = picard_solve(gen, xi, b, cfg);
  REQUIRE(s.converged);
  const BSDESolution next = backward_euler_pass(gen, xi, s.Z, b, cfg);
  const Field rho = running_integral(gen.coeffs.rho, b);
  CHECK(std::sqrt(m2_distance_sq(next.Z, s.Z, rho, b)) < cfg.picard_tol);
  const Field zero(b.n_paths, b.n_steps(), 1);
  const double n0 = std::sqrt(m2_distance_sq(s.Z, zero, rho, b));
  const double n1 = std::sqrt(m2_distance_sq(next.Z, zero, rho, b));
  CHECK(std::abs(n1 - n0) < cfg.picard_tol);
}

TEST_CASE("g = -y: the error against c e^{-T} halves when the step count doubles") {
  for (double T : {1.0, 2.0}) {
    std::vector<double> err;
    for (std::size_t n : {16, 32, 64, 128}) {
      const PathBatch b = simulate_brownian(32, build_grid(0, T, n), 1, 404);
      const std::vector<double> xi(b.n_paths, 1.5);
      const BSDESolution s = picard_solve(decay_generator(), xi, b, {});
      err.push_back(std::abs(s.y0[0].value - 1.5 * std::exp(-T)));
    }
    for (std::size_t k = 0; k + 1 < err.size(); ++k) {
      const double ratio = err[k] / err[k + 1];
      CAPTURE(T);
      CAPTURE(ratio);
      CHECK(ratio >= 1.2);
      CHECK(ratio <= 2.8);
    }
  }
}

TEST_CASE("envelope probes hold for the catalog generators") {
  for (const char* id : {"stoch-lipschitz-sqrt", "exp-monotone-sine", "cubic-stiff", "sqrt-kink-exit",
                         "quartic-weight", "piecewise-exp"}) {
    CAPTURE(id);
    const harness::RunReport r = probe_only(id);
    CHECK(r.value("envelope_pass") == 1.0);
    CHECK(r.value("structural_pass") == 1.0);
  }
}

TEST_CASE("envelope probes: coupled pair exit") {
  // Checked against the declared constants with no extra allowance.
  const harness::RunReport r = probe_only("coupled-pair-exit");
  CHECK(r.value("structural_pass") == 1.0);
  CHECK(r.value("envelope_pass") == 1.0);
}

TEST_CASE("probing is deterministic and bounded by the declared constants") {
  const PathBatch b = simulate_brownian(1000, build_grid(0, 1, 8), 1, 405);
  const EnvelopeProbeReport a = probe_envelopes(sine_generator(), b, 10000, 7);
  const EnvelopeProbeReport c = probe_envelopes(sine_generator(), b, 10000, 7);
  CHECK(a.n_probes == 10000);
  CHECK(a.pass());
  CHECK(a.worst_monotonicity == c.worst_monotonicity);
  GeneratorSpec tight = sine_generator();
  tight.coeffs.nu = constant_field(0.4);
  CHECK_FALSE(probe_envelopes(tight, b, 10000, 7).lipschitz);
}

}  // TEST_SUITE
