#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bsdelab {

/// Solves a tridiagonal system in place: rhs <- A^{-1} rhs with A given by
/// its sub-diagonal (lower[0] unused), diagonal and super-diagonal
/// (upper[n-1] unused). Throws a discretization error on a zero pivot.
void thomas_solve(std::span<const double> lower, std::span<const double> diag,
                  std::span<const double> upper, std::span<double> rhs);

using SpaceTimeFn = std::function<double(double t, double x)>;

/// u_t + 1/2 sigma^2 u_xx + b u_x + g(t, x, u, u_x sigma) = 0, u(T) = h.
struct ParabolicProblem {
  SpaceTimeFn b = [](double, double) { return 0.0; };
  SpaceTimeFn sigma = [](double, double) { return 1.0; };
  /// Nonlinear term; empty means g = 0.
  std::function<double(double t, double x, double u, double p)> g;
  SpaceTimeFn m = [](double, double) { return 0.0; };  // monotonicity envelope in u
  SpaceTimeFn n = [](double, double) { return 0.0; };  // Lipschitz envelope in p
  double K1 = 0.0;
  double p = 2.0;
  double theta = 2.0;
  std::function<double(double x)> h;
  double T = 1.0;
  double x_min = -6.0;
  double x_max = 6.0;
};

/// 1/2 sigma^2 u'' + b u' + g(x, u, u' sigma) = 0 on (a, b), u = h on the ends.
struct EllipticProblem {
  double a = -1.0;
  double b = 1.0;
  std::function<double(double x)> drift = [](double) { return 0.0; };
  std::function<double(double x)> sigma = [](double) { return 1.0; };
  std::function<double(double x, double u, double p)> g;
  std::function<double(double x)> m = [](double) { return 0.0; };
  std::function<double(double x)> n = [](double) { return 0.0; };
  double h_a = 0.0;
  double h_b = 0.0;
  double t_max = 10.0;
  double p = 2.0;
  double theta = 2.0;
};

struct FDSolution {
  std::vector<double> t_grid;  // empty for elliptic problems
  std::vector<double> x_grid;
  std::vector<double> values;  // [t index][x index], or [x index]
  double scheme_weight = 0.5;
  std::size_t steps = 0;
  int max_sweeps = 0;

  double at(std::size_t n, std::size_t i) const { return values[n * x_grid.size() + i]; }
  /// Bilinear interpolation (linear in x for elliptic solutions).
  double interpolate(double t, double x) const;
};

/// theta-scheme in time (0.5 = Crank-Nicolson) with the nonlinear term lagged
/// and Picard-corrected per step until the update is below 1e-8. Window edges
/// use linear extrapolation. An explicit weight must respect dt <= dx^2 /
/// max sigma^2.
FDSolution solve_parabolic_fd(const ParabolicProblem& problem, std::size_t nx, std::size_t nt,
                              double scheme_weight = 0.5);

/// Centered second-order discretization, Dirichlet ends pinned to the data,
/// damped Picard sweeps on the nonlinear term.
FDSolution solve_elliptic_fd(const EllipticProblem& problem, std::size_t nx);

/// Principal Dirichlet eigenvalue of -(1/2 sigma^2 D^2 + drift D) on (a, b):
/// the exponential decay rate of P(tau > t), so E[e^{r tau}] < inf iff r is
/// below it.
double principal_exit_rate(const EllipticProblem& problem, std::size_t nx = 801);

struct EnvelopeCheck {
  double worst = 0.0;  // max over the FD grid of the constrained quantity
  double bound = 0.0;
  bool pass = false;
};

/// max of m + theta n^2 / (2 [1 ^ (p-1)]) over the FD grid against K1.
EnvelopeCheck check_parabolic_envelope(const ParabolicProblem& problem, std::size_t nx,
                                       std::size_t nt);

/// p max over [a, b] of (m + theta n^2 / (2 [1 ^ (p-1)])) against the exit
/// rate (strict inequality).
EnvelopeCheck check_elliptic_envelope(const EllipticProblem& problem, std::size_t nx = 801);

}  // namespace bsdelab
