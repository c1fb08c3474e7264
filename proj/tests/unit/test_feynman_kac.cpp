#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "bsdelab/errors.hpp"
#include "bsdelab/fd.hpp"
#include "bsdelab/feynman_kac.hpp"
#include "doctest.h"

using namespace bsdelab;

namespace {

ParabolicProblem heat() {
  ParabolicProblem p;
  p.h = [](double x) { return x * x; };
  return p;
}

}  // namespace

TEST_SUITE("feynman-kac") {

TEST_CASE("thomas solver") {
  std::vector<double> lo{0, 1, 1}, di{4, 4, 4}, up{1, 1, 0}, rhs{5, 6, 5};
  thomas_solve(lo, di, up, rhs);
  for (double v : rhs) CHECK(v == doctest::Approx(1.0));
  std::vector<double> zlo{0, 0}, zdi{0, 1}, zup{0, 0}, zr{1, 1};
  CHECK_THROWS_AS(thomas_solve(zlo, zdi, zup, zr), Error);
}

TEST_CASE("parabolic FD oracles") {
  const FDSolution s = solve_parabolic_fd(heat(), 201, 200);
  for (double t : {0.0, 0.5})
    for (double x : {-2.0, 0.0, 1.5}) CHECK(std::abs(s.interpolate(t, x) - (x * x + 1.0 - t)) < 1e-3);

  ParabolicProblem d;
  d.g = [](double, double, double u, double) { return -u; };
  d.m = [](double, double) { return -1.0; };
  d.h = [](double x) { return x; };
  const FDSolution sd = solve_parabolic_fd(d, 201, 200);
  for (double x : {-1.0, 0.5, 2.0}) CHECK(std::abs(sd.interpolate(0.0, x) - x * std::exp(-1.0)) < 1e-3);

  ParabolicProblem c;
  c.h = [](double) { return 3.0; };
  const FDSolution sc = solve_parabolic_fd(c, 101, 50);
  for (double v : sc.values) CHECK(v == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("elliptic FD oracles") {
  EllipticProblem harm;
  harm.h_a = -1.0;
  harm.h_b = 1.0;
  const FDSolution h = solve_elliptic_fd(harm, 401);
  for (std::size_t i = 0; i < h.x_grid.size(); ++i) CHECK(h.values[i] == doctest::Approx(h.x_grid[i]).epsilon(1e-12).scale(1.0));

  EllipticProblem ch;
  ch.g = [](double, double u, double) { return -u; };
  ch.m = [](double) { return -1.0; };
  ch.h_a = ch.h_b = 1.0;
  const FDSolution c = solve_elliptic_fd(ch, 401);
  for (double x : {-0.5, 0.0, 0.7})
    CHECK(std::abs(c.interpolate(0.0, x) - std::cosh(std::sqrt(2.0) * x) / std::cosh(std::sqrt(2.0))) < 1e-4);

  EllipticProblem q;
  q.g = [](double, double, double) { return 1.0; };
  const FDSolution qs = solve_elliptic_fd(q, 401);
  for (std::size_t i = 0; i < qs.x_grid.size(); ++i)
    CHECK(std::abs(qs.values[i] - (1.0 - qs.x_grid[i] * qs.x_grid[i])) < 1e-6);
}

TEST_CASE("principal exit rate of (-1, 1) is pi^2 / 8") {
  CHECK(principal_exit_rate(EllipticProblem{}) == doctest::Approx(M_PI * M_PI / 8.0).epsilon(1e-4));
}

TEST_CASE("BSDE surface: heat at (0, 0), terminal points and the harmonic exit problem") {
  const std::pair<double, double> pts[] = {{0.0, 0.0}, {1.0, 1.7}};
  const std::vector<SurfacePoint> s = bsde_surface(heat(), pts, {20000, 32.0, 3}, {});
  CHECK(std::abs(s[0].u.value - 1.0) <= 0.05);
  CHECK(s[1].u.value == doctest::Approx(1.7 * 1.7));

  EllipticProblem harm;
  harm.h_a = -1.0;
  harm.h_b = 1.0;
  const double xs[] = {0.5};
  const std::vector<SurfacePoint> e = bsde_surface(harm, xs, {10000, 100.0, 4}, {});
  CHECK(std::abs(e[0].u.value - 0.5) <= 0.05);
}

TEST_CASE("fk_compare, growth check and CSV schema") {
  const FDSolution fd = solve_parabolic_fd(heat(), 201, 200);
  std::vector<SurfacePoint> self;
  for (double x : {-3.0, -1.0, 0.0, 2.0, 3.0}) self.push_back({0.0, x, {fd.interpolate(0.0, x), 0.0}, 0, 0});
  const FkComparison cmp = fk_compare(fd, self);
  CHECK(cmp.max_abs_diff == 0.0);
  CHECK(cmp.within(0.0, 0.0));

  const GrowthCheck g = growth_bound_check(self, 2.0, 2.0);
  CHECK(g.pass);
  CHECK(g.worst_ratio <= 1.0);

  std::ostringstream os;
  write_fk_csv(os, cmp.rows);
  CHECK(os.str().rfind("t,x,u_fd,u_bsde,se,diff\n", 0) == 0);
  std::ostringstream empty;
  write_fk_csv(empty, {});
  CHECK(empty.str() == "t,x,u_fd,u_bsde,se,diff\n");
}

TEST_CASE("envelope checks") {
  ParabolicProblem p = heat();
  p.n = [](double, double) { return 0.5; };
  p.K1 = 0.25;
  CHECK(check_parabolic_envelope(p, 51, 10).pass);
  p.K1 = 0.2;
  CHECK_FALSE(check_parabolic_envelope(p, 51, 10).pass);

  EllipticProblem e;
  e.m = [](double) { return 0.5; };
  CHECK(check_elliptic_envelope(e).pass);
  e.m = [](double) { return 0.7; };
  CHECK_FALSE(check_elliptic_envelope(e).pass);
}

}  // TEST_SUITE
