#include "bsdelab/fd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bsdelab/errors.hpp"

namespace bsdelab {

void thomas_solve(std::span<const double> lower, std::span<const double> diag,
                  std::span<const double> upper, std::span<double> rhs) {
  const std::size_t n = diag.size();
  if (n == 0) return;
  std::vector<double> c(n);
  double beta = diag[0];
  if (beta == 0.0 || !std::isfinite(beta))
    throw Error(ErrorKind::kDiscretization, "zero pivot in tridiagonal solve");
  rhs[0] /= beta;
  for (std::size_t i = 1; i < n; ++i) {
    c[i - 1] = upper[i - 1] / beta;
    beta = diag[i] - lower[i] * c[i - 1];
    if (beta == 0.0 || !std::isfinite(beta))
      throw Error(ErrorKind::kDiscretization, "zero pivot in tridiagonal solve at row " + std::to_string(i));
    rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

double FDSolution::interpolate(double t, double x) const {
  const std::size_t nx = x_grid.size();
  const double dx = x_grid[1] - x_grid[0];
  double fx = (x - x_grid[0]) / dx;
  fx = std::clamp(fx, 0.0, static_cast<double>(nx - 1));
  const std::size_t i = std::min(static_cast<std::size_t>(fx), nx - 2);
  const double wx = fx - static_cast<double>(i);
  auto row = [&](std::size_t n) { return (1.0 - wx) * at(n, i) + wx * at(n, i + 1); };
  if (t_grid.empty()) return row(0);
  const std::size_t nt = t_grid.size();
  const double dt = t_grid[1] - t_grid[0];
  double ft = std::clamp((t - t_grid[0]) / dt, 0.0, static_cast<double>(nt - 1));
  const std::size_t n = std::min(static_cast<std::size_t>(ft), nt - 2);
  const double wt = ft - static_cast<double>(n);
  return (1.0 - wt) * row(n) + wt * row(n + 1);
}

namespace {

struct Stencil {
  std::vector<double> lo, di, up;  // L u at node i = lo u_{i-1} + di u_i + up u_{i+1}
};

Stencil parabolic_stencil(const ParabolicProblem& pb, const std::vector<double>& x, double t) {
  const std::size_t nx = x.size();
  const double dx = x[1] - x[0];
  Stencil s{std::vector<double>(nx), std::vector<double>(nx), std::vector<double>(nx)};
  for (std::size_t i = 1; i + 1 < nx; ++i) {
    const double sg = pb.sigma(t, x[i]), bb = pb.b(t, x[i]);
    const double diff = 0.5 * sg * sg / (dx * dx), adv = bb / (2.0 * dx);
    s.lo[i] = diff - adv;
    s.di[i] = -2.0 * diff;
    s.up[i] = diff + adv;
  }
  return s;
}

void extrapolate_edges(std::vector<double>& u) {
  const std::size_t n = u.size();
  u[0] = 2.0 * u[1] - u[2];
  u[n - 1] = 2.0 * u[n - 2] - u[n - 3];
}

}  // namespace

FDSolution solve_parabolic_fd(const ParabolicProblem& pb, std::size_t nx, std::size_t nt,
                              double w) {
  if (nx < 5 || nt < 1) throw Error(ErrorKind::kConfiguration, "FD grid too small");
  if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorKind::kConfiguration, "scheme weight must lie in [0, 1]");
  if (!pb.h) throw Error(ErrorKind::kConfiguration, "parabolic problem needs terminal data");
  FDSolution sol;
  sol.scheme_weight = w;
  sol.steps = nt;
  sol.x_grid.resize(nx);
  sol.t_grid.resize(nt + 1);
  const double dx = (pb.x_max - pb.x_min) / static_cast<double>(nx - 1);
  const double dt = pb.T / static_cast<double>(nt);
  for (std::size_t i = 0; i < nx; ++i) sol.x_grid[i] = pb.x_min + dx * static_cast<double>(i);
  for (std::size_t n = 0; n <= nt; ++n) sol.t_grid[n] = dt * static_cast<double>(n);
  const auto& x = sol.x_grid;
  if (w < 0.5) {
    double smax = 0.0;
    for (std::size_t n = 0; n <= nt; ++n)
      for (double xi : x) smax = std::max(smax, std::abs(pb.sigma(sol.t_grid[n], xi)));
    if (dt * (1.0 - 2.0 * w) * smax * smax > dx * dx)
      throw Error(ErrorKind::kConfiguration, "time step violates the CFL bound for this weight");
  }
  sol.values.assign((nt + 1) * nx, 0.0);
  std::vector<double> next(nx), cur(nx), iter(nx);
  for (std::size_t i = 0; i < nx; ++i) next[i] = pb.h(x[i]);
  std::copy(next.begin(), next.end(), sol.values.begin() + static_cast<long>(nt * nx));

  const std::size_t m = nx - 2;
  std::vector<double> lo(m), di(m), up(m), rhs(m), explicit_part(m), gnext(nx, 0.0), gcur(nx, 0.0);
  auto eval_g = [&](double t, const std::vector<double>& u, std::vector<double>& out) {
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const double grad = (u[i + 1] - u[i - 1]) / (2.0 * dx);
      out[i] = pb.g(t, x[i], u[i], grad * pb.sigma(t, x[i]));
    }
  };
  for (std::size_t n = nt; n-- > 0;) {
    const double t1 = sol.t_grid[n + 1], t0 = sol.t_grid[n];
    const Stencil s1 = parabolic_stencil(pb, x, t1), s0 = parabolic_stencil(pb, x, t0);
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t i = r + 1;
      explicit_part[r] =
          next[i] + (1.0 - w) * dt * (s1.lo[i] * next[i - 1] + s1.di[i] * next[i] + s1.up[i] * next[i + 1]);
      lo[r] = -w * dt * s0.lo[i];
      di[r] = 1.0 - w * dt * s0.di[i];
      up[r] = -w * dt * s0.up[i];
    }
    // u_0 = 2u_1 - u_2 and u_{nx-1} = 2u_{nx-2} - u_{nx-3} folded into the end rows
    di[0] += 2.0 * lo[0];
    up[0] -= lo[0];
    di[m - 1] += 2.0 * up[m - 1];
    lo[m - 1] -= up[m - 1];
    if (pb.g) eval_g(t1, next, gnext);
    cur = next;
    int sweeps = 0;
    for (;;) {
      ++sweeps;
      if (pb.g) eval_g(t0, cur, gcur);
      for (std::size_t r = 0; r < m; ++r)
        rhs[r] = explicit_part[r] + (pb.g ? dt * (w * gcur[r + 1] + (1.0 - w) * gnext[r + 1]) : 0.0);
      thomas_solve(lo, di, up, rhs);
      iter[0] = 0.0;
      for (std::size_t r = 0; r < m; ++r) iter[r + 1] = rhs[r];
      extrapolate_edges(iter);
      double change = 0.0;
      for (std::size_t i = 0; i < nx; ++i) change = std::max(change, std::abs(iter[i] - cur[i]));
      cur.swap(iter);
      if (!std::isfinite(change))
        throw Error(ErrorKind::kFdNonconvergence, "parabolic sweep produced non-finite values");
      if (!pb.g || change < 1e-8) break;
      if (sweeps >= 200)
        throw Error(ErrorKind::kFdNonconvergence,
                    "nonlinear sweep did not settle at t = " + std::to_string(t0));
    }
    sol.max_sweeps = std::max(sol.max_sweeps, sweeps);
    std::copy(cur.begin(), cur.end(), sol.values.begin() + static_cast<long>(n * nx));
    next.swap(cur);
  }
  return sol;
}

FDSolution solve_elliptic_fd(const EllipticProblem& pb, std::size_t nx) {
  if (nx < 3 || !(pb.b > pb.a)) throw Error(ErrorKind::kConfiguration, "elliptic grid is degenerate");
  FDSolution sol;
  sol.scheme_weight = 1.0;
  sol.x_grid.resize(nx);
  const double dx = (pb.b - pb.a) / static_cast<double>(nx - 1);
  for (std::size_t i = 0; i < nx; ++i) sol.x_grid[i] = pb.a + dx * static_cast<double>(i);
  sol.x_grid[nx - 1] = pb.b;
  const auto& x = sol.x_grid;
  for (double xi : x) {
    const double s = pb.sigma(xi);
    if (!(s * s > 0.0)) throw Error(ErrorKind::kConfiguration, "elliptic problem is not uniformly elliptic");
  }
  const std::size_t m = nx - 2;
  std::vector<double> lo(m), di(m), up(m), shift(m), rhs(m);
  for (std::size_t r = 0; r < m; ++r) {
    const double xi = x[r + 1], s = pb.sigma(xi), bb = pb.drift(xi);
    const double diff = 0.5 * s * s / (dx * dx), adv = bb / (2.0 * dx);
    shift[r] = std::min(0.0, pb.m(xi));
    lo[r] = diff - adv;
    di[r] = -2.0 * diff + shift[r];
    up[r] = diff + adv;
  }
  std::vector<double> u(nx, 0.0), trial(nx);
  for (std::size_t i = 0; i < nx; ++i)
    u[i] = pb.h_a + (pb.h_b - pb.h_a) * (x[i] - pb.a) / (pb.b - pb.a);
  double omega = 1.0, last_change = INFINITY;
  int sweeps = 0;
  for (;;) {
    ++sweeps;
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t i = r + 1;
      double nonlinear = 0.0;
      if (pb.g) {
        const double grad = (u[i + 1] - u[i - 1]) / (2.0 * dx);
        nonlinear = pb.g(x[i], u[i], grad * pb.sigma(x[i])) - shift[r] * u[i];
      }
      rhs[r] = -nonlinear;
    }
    rhs[0] -= lo[0] * pb.h_a;
    rhs[m - 1] -= up[m - 1] * pb.h_b;
    thomas_solve(lo, di, up, rhs);
    trial[0] = pb.h_a;
    trial[nx - 1] = pb.h_b;
    double change = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      trial[r + 1] = omega * rhs[r] + (1.0 - omega) * u[r + 1];
      change = std::max(change, std::abs(trial[r + 1] - u[r + 1]));
    }
    u.swap(trial);
    if (!std::isfinite(change))
      throw Error(ErrorKind::kFdNonconvergence, "elliptic sweep produced non-finite values");
    if (!pb.g || change < 1e-11) break;
    if (change > last_change) omega = std::max(0.05, 0.5 * omega);
    last_change = change;
    if (sweeps >= 2000) throw Error(ErrorKind::kFdNonconvergence, "elliptic sweeps did not settle");
  }
  sol.max_sweeps = sweeps;
  sol.values = std::move(u);
  return sol;
}

double principal_exit_rate(const EllipticProblem& pb, std::size_t nx) {
  const double dx = (pb.b - pb.a) / static_cast<double>(nx - 1);
  const std::size_t m = nx - 2;
  std::vector<double> lo(m), di(m), up(m);
  for (std::size_t r = 0; r < m; ++r) {
    const double xi = pb.a + dx * static_cast<double>(r + 1), s = pb.sigma(xi), bb = pb.drift(xi);
    const double diff = 0.5 * s * s / (dx * dx), adv = bb / (2.0 * dx);
    lo[r] = -(diff - adv);
    di[r] = 2.0 * diff;
    up[r] = -(diff + adv);
  }
  std::vector<double> v(m, 1.0), next(m);
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    next = v;
    thomas_solve(lo, di, up, next);
    double nv = 0.0, nn = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      nv += v[r] * v[r];
      nn += next[r] * next[r];
    }
    const double est = std::sqrt(nv / nn);
    const double scale = 1.0 / std::sqrt(nn);
    for (std::size_t r = 0; r < m; ++r) v[r] = next[r] * scale;
    if (it > 0 && std::abs(est - lambda) < 1e-14 * est) {
      lambda = est;
      break;
    }
    lambda = est;
  }
  return lambda;
}

EnvelopeCheck check_parabolic_envelope(const ParabolicProblem& pb, std::size_t nx, std::size_t nt) {
  const double f = pb.theta / (2.0 * std::min(1.0, pb.p - 1.0));
  EnvelopeCheck c;
  c.bound = pb.K1;
  c.worst = -INFINITY;
  for (std::size_t n = 0; n <= nt; ++n) {
    const double t = pb.T * static_cast<double>(n) / static_cast<double>(nt);
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = pb.x_min + (pb.x_max - pb.x_min) * static_cast<double>(i) / static_cast<double>(nx - 1);
      const double nn = pb.n(t, x);
      c.worst = std::max(c.worst, pb.m(t, x) + f * nn * nn);
    }
  }
  c.pass = c.worst <= c.bound;
  return c;
}

EnvelopeCheck check_elliptic_envelope(const EllipticProblem& pb, std::size_t nx) {
  const double f = pb.theta / (2.0 * std::min(1.0, pb.p - 1.0));
  EnvelopeCheck c;
  c.bound = principal_exit_rate(pb, nx);
  c.worst = -INFINITY;
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = pb.a + (pb.b - pb.a) * static_cast<double>(i) / static_cast<double>(nx - 1);
    const double nn = pb.n(x);
    c.worst = std::max(c.worst, pb.m(x) + f * nn * nn);
  }
  c.worst *= pb.p;
  c.pass = c.worst < c.bound;
  return c;
}

}  // namespace bsdelab
