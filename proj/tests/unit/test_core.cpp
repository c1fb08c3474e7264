#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bsdelab/coefficients.hpp"
#include "bsdelab/errors.hpp"
#include "bsdelab/grid.hpp"
#include "bsdelab/norms.hpp"
#include "bsdelab/rng.hpp"
#include "bsdelab/sde.hpp"
#include "doctest.h"

using namespace bsdelab;

TEST_SUITE("stochastic-core") {

TEST_CASE("philox4x32-10 known answers") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::apply({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::apply({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::apply({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("path streams are pure functions of (seed, path)") {
  PathStream a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 10; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    CHECK(x != c.normal());
  }
}

TEST_CASE("build_grid partitions") {
  const TimeGrid g = build_grid(0.0, 1.0, 4);
  REQUIRE(g.times.size() == 5);
  const double want[] = {0, 0.25, 0.5, 0.75, 1};
  for (int j = 0; j < 5; ++j) CHECK(g.times[j] == doctest::Approx(want[j]).epsilon(1e-15));
  const TimeGrid one = build_grid(0.0, 1.0, 1);
  CHECK(one.times == std::vector<double>{0.0, 1.0});
  const TimeGrid shifted = build_grid(0.5, 1.5, 2);
  CHECK(shifted.times[0] == 0.5);
  CHECK(shifted.times[1] == doctest::Approx(1.0));
  CHECK(shifted.times[2] == 1.5);
  CHECK(g.index_at_or_before(0.6) == 2);
  CHECK(g.index_at_or_before(5.0) == 4);
  CHECK_THROWS_AS(build_grid(1.0, 0.5, 4), Error);
  CHECK_THROWS_AS(build_grid(0.0, 1.0, 0), Error);
}

TEST_CASE("weighted terminal norm examples") {
  const PathBatch batch = simulate_brownian(100000, build_grid(0, 1, 16), 1, 11);
  const std::size_t n = batch.n_paths;

  std::vector<double> c(n, -2.5);
  const Field zero = running_integral(constant_field(0.0), batch);
  const Estimate e0 = weighted_terminal_norm(c, 1, zero, batch, 2.0);
  CHECK(e0.value == doctest::Approx(2.5).epsilon(1e-14));

  std::vector<double> one(n, 1.0);
  const Field r = running_integral(constant_field(0.3), batch);
  CHECK(weighted_terminal_norm(one, 1, r, batch, 3.0).value == doctest::Approx(std::exp(0.3)).epsilon(1e-13));

  std::vector<double> xi(n);
  for (std::size_t i = 0; i < n; ++i) xi[i] = std::exp(batch.state(i, batch.n_steps()) - 0.5);
  const Estimate e = weighted_terminal_norm(xi, 1, zero, batch, 2.0);
  CHECK(std::abs(e.value - std::exp(0.5)) <= 3.0 * e.se);
}

TEST_CASE("weighted terminal norm flags non-finite values with the scenario name") {
  const PathBatch batch = simulate_brownian(16, build_grid(0, 1, 4), 1, 1);
  std::vector<double> xi(16, 1.0);
  xi[3] = std::numeric_limits<double>::infinity();
  const Field zero = running_integral(constant_field(0.0), batch);
  try {
    weighted_terminal_norm(xi, 1, zero, batch, 2.0, "blowup");
    FAIL("expected an overflow error");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::kNumericalOverflow);
    CHECK(std::string(err.what()).find("blowup") != std::string::npos);
  }
}

TEST_CASE("weighted sup and z norms") {
  const PathBatch batch = simulate_brownian(2000, build_grid(0, 1, 4096), 1, 5);
  const Field zero = running_integral(constant_field(0.0), batch);
  Field Y(batch.n_paths, batch.n_nodes(), 1, 1.75);
  CHECK(weighted_sup_norm(Y, zero, batch, 2.0).value == doctest::Approx(1.75).epsilon(1e-14));
  Field Z(batch.n_paths, batch.n_steps(), 1, 0.0);
  CHECK(weighted_z_norm(Z, zero, batch, 2.0).value == 0.0);

  // Y = B: brute-force sup over the same dense grid.
  double acc = 0.0;
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    double m = 0.0;
    for (std::size_t j = 0; j < batch.n_nodes(); ++j) {
      Y.at(i, j) = batch.state(i, j);
      m = std::max(m, Y.at(i, j) * Y.at(i, j));
    }
    acc += m;
  }
  const double brute = std::sqrt(acc / batch.n_paths);
  CHECK(weighted_sup_norm(Y, zero, batch, 2.0).value == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("structural condition examples") {
  const PathBatch batch = simulate_brownian(8, build_grid(0, 1, 4), 1, 1);
  const StructuralReport eq = check_structural_condition(constant_coefficients(2, 2, 0, -1, 1), batch);
  CHECK(eq.pass);
  CHECK(eq.worst_margin == doctest::Approx(0.0));
  const StructuralReport strict = check_structural_condition(constant_coefficients(2, 2, 1, -1, 1), batch);
  CHECK(strict.pass);
  CHECK(strict.worst_margin == doctest::Approx(1.0));
  const StructuralReport bad = check_structural_condition(constant_coefficients(2, 2, 0.5, 0, 1), batch);
  CHECK_FALSE(bad.pass);
  CHECK(bad.worst_margin == doctest::Approx(-0.5));
}

TEST_CASE("nu factor uses 1 ^ (p - 1)") {
  CHECK(constant_coefficients(2, 2, 0, 0, 0).nu_factor() == doctest::Approx(1.0));
  CHECK(constant_coefficients(1.5, 2, 0, 0, 0).nu_factor() == doctest::Approx(2.0));
  CHECK(constant_coefficients(4, 3, 0, 0, 0).nu_factor() == doctest::Approx(1.5));
}

}  // TEST_SUITE
