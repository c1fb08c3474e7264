#include "bsdelab/conjugate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "bsdelab/errors.hpp"

namespace bsdelab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm(std::span<const double> q) {
  double s = 0.0;
  for (double v : q) s += v * v;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool better(double candidate, double best) {
  return candidate > best + 1e-14 * (1.0 + std::abs(best));
}

bool tied(double candidate, double best) {
  return std::abs(candidate - best) <= 1e-14 * (1.0 + std::abs(best));
}

ConjugatePoint conjugate_1d(const CoreFunctionSpec& core, double t, std::span<const double> x,
                            double z, double nu, std::size_t res) {
  auto objective = [&](double q) {
    const double fq = core(t, x, std::span<const double>(&q, 1));
    return std::isinf(fq) && fq > 0 ? -kInf : q * z - fq;
  };
  if (nu == 0.0) {
    const double v = objective(0.0);
    if (!std::isfinite(v)) throw Error(ErrorKind::kDegenerateCore, "core is +inf on its domain");
    return {v, {0.0}};
  }
  const double step = 2.0 * nu / static_cast<double>(res - 1);
  std::size_t best_k = 0;
  double best_q = -nu;
  double best = -kInf;
  for (std::size_t k = 0; k < res; ++k) {
    const double q = k + 1 == res ? nu : -nu + step * static_cast<double>(k);
    const double v = objective(q);
    if (better(v, best) || (tied(v, best) && std::abs(q) < std::abs(best_q))) {
      best = v;
      best_q = q;
      best_k = k;
    }
  }
  if (!std::isfinite(best)) throw Error(ErrorKind::kDegenerateCore, "core is +inf on its domain");

  double lo = std::max(-nu, best_q - (best_k > 0 ? step : 0.0));
  double hi = std::min(nu, best_q + (best_k + 1 < res ? step : 0.0));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = objective(a);
  double fb = objective(b);
  for (int it = 0; it < 80 && hi - lo > 1e-13 * (1.0 + nu); ++it) {
    if (fa >= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = objective(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = objective(b);
    }
  }
  const double q_ref = 0.5 * (lo + hi);
  const double v_ref = objective(q_ref);
  if (better(v_ref, best)) return {v_ref, {q_ref}};
  return {best, {best_q}};
}

ConjugatePoint conjugate_2d(const CoreFunctionSpec& core, double t, std::span<const double> x,
                            std::span<const double> z, double nu, std::size_t res) {
  auto objective = [&](const std::array<double, 2>& q) {
    const double fq = core(t, x, q);
    return std::isinf(fq) && fq > 0 ? -kInf : dot(q, z) - fq;
  };
  if (nu == 0.0) {
    const double v = objective({0.0, 0.0});
    if (!std::isfinite(v)) throw Error(ErrorKind::kDegenerateCore, "core is +inf on its domain");
    return {v, {0.0, 0.0}};
  }
  const double step = 2.0 * nu / static_cast<double>(res - 1);
  std::array<double, 2> best_q{-nu, -nu};
  double best = -kInf;
  for (std::size_t a = 0; a < res; ++a) {
    for (std::size_t b = 0; b < res; ++b) {
      const std::array<double, 2> q{-nu + step * static_cast<double>(a),
                                    -nu + step * static_cast<double>(b)};
      if (norm(q) > nu) continue;
      const double v = objective(q);
      if (better(v, best) || (tied(v, best) && norm(q) < norm(best_q))) {
        best = v;
        best_q = q;
      }
    }
  }
  if (!std::isfinite(best)) throw Error(ErrorKind::kDegenerateCore, "core is +inf on its domain");

  double h = step;
  for (int it = 0; it < 200 && h > 1e-12 * (1.0 + nu); ++it) {
    bool moved = false;
    for (int da = -1; da <= 1; ++da) {
      for (int db = -1; db <= 1; ++db) {
        if (da == 0 && db == 0) continue;
        std::array<double, 2> q{best_q[0] + da * h, best_q[1] + db * h};
        const double r = norm(q);
        if (r > nu) {
          q[0] *= nu / r;
          q[1] *= nu / r;
        }
        const double v = objective(q);
        if (better(v, best)) {
          best = v;
          best_q = q;
          moved = true;
        }
      }
    }
    if (!moved) h *= 0.5;
  }
  return {best, {best_q[0], best_q[1]}};
}

}  // namespace

double CoreFunctionSpec::operator()(double t, std::span<const double> x,
                                    std::span<const double> q) const {
  if (norm(q) > nu(t, x)) return kInf;
  return f(t, x, q);
}

ConjugatePoint conjugate_point(const CoreFunctionSpec& core, double t, std::span<const double> x,
                               std::span<const double> z, std::size_t q_resolution) {
  if (core.d == 0 || core.d > 2 || z.size() != core.d)
    throw Error(ErrorKind::kConfiguration, "conjugation supports d = 1 or 2 with matching z");
  if (q_resolution < 64) throw Error(ErrorKind::kConfiguration, "q_resolution must be >= 64");
  const double nu = core.nu(t, x);
  if (!(nu >= 0.0) || !std::isfinite(nu))
    throw Error(ErrorKind::kConfiguration, "barrier nu must be finite and nonnegative");
  return core.d == 1 ? conjugate_1d(core, t, x, z[0], nu, q_resolution)
                     : conjugate_2d(core, t, x, z, nu, q_resolution);
}

double ConjugateTable::value(double z) const {
  const std::size_t n = z_grid.size();
  if (z <= z_grid.front()) return g_values.front() + nu * (z_grid.front() - z);
  if (z >= z_grid.back()) return g_values.back() + nu * (z - z_grid.back());
  const std::size_t k =
      static_cast<std::size_t>(std::upper_bound(z_grid.begin(), z_grid.end(), z) - z_grid.begin()) - 1;
  if (k + 1 >= n) return g_values.back();
  const double w = (z - z_grid[k]) / (z_grid[k + 1] - z_grid[k]);
  return (1.0 - w) * g_values[k] + w * g_values[k + 1];
}

double ConjugateTable::subgradient(double z) const {
  if (z < z_grid.front()) return -nu;
  if (z > z_grid.back()) return nu;
  const std::size_t k =
      static_cast<std::size_t>(std::upper_bound(z_grid.begin(), z_grid.end(), z) - z_grid.begin()) - 1;
  if (k + 1 >= z_grid.size() || z == z_grid[k]) return argmax_q[k];
  const double w = (z - z_grid[k]) / (z_grid[k + 1] - z_grid[k]);
  return (1.0 - w) * argmax_q[k] + w * argmax_q[k + 1];
}

bool ConjugateTable::convex(double tol) const {
  for (std::size_t k = 1; k + 1 < z_grid.size(); ++k) {
    const double left = (g_values[k] - g_values[k - 1]) / (z_grid[k] - z_grid[k - 1]);
    const double right = (g_values[k + 1] - g_values[k]) / (z_grid[k + 1] - z_grid[k]);
    if (right - left < -tol * (1.0 + std::abs(left) + std::abs(right))) return false;
  }
  return true;
}

ConjugateTable legendre_fenchel(const CoreFunctionSpec& core, double t, std::span<const double> x,
                                std::span<const double> z_grid, std::size_t q_resolution) {
  if (core.d != 1) throw Error(ErrorKind::kConfiguration, "conjugate tables need d = 1");
  if (z_grid.size() < 2 || !std::is_sorted(z_grid.begin(), z_grid.end()))
    throw Error(ErrorKind::kConfiguration, "z grid must be sorted with at least two nodes");
  ConjugateTable table;
  table.nu = core.nu(t, x);
  table.z_grid.assign(z_grid.begin(), z_grid.end());
  table.g_values.resize(z_grid.size());
  table.argmax_q.resize(z_grid.size());
  for (std::size_t k = 0; k < z_grid.size(); ++k) {
    const ConjugatePoint pt = conjugate_point(core, t, x, z_grid.subspan(k, 1), q_resolution);
    table.g_values[k] = pt.value;
    table.argmax_q[k] = pt.argmax[0];
  }
  return table;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k)
    g[k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  if (n > 1) g.back() = hi;
  return g;
}

double convexity_defect(const CoreFunctionSpec& core, double t, std::span<const double> x,
                        std::size_t n_probe) {
  const double nu = core.nu(t, x);
  const std::vector<double> qs = uniform_grid(-nu, nu, n_probe);
  double worst = -kInf;
  for (std::size_t a = 0; a < qs.size(); ++a) {
    for (std::size_t b = a + 1; b < qs.size(); ++b) {
      const double m = 0.5 * (qs[a] + qs[b]);
      const double fa = core(t, x, std::span<const double>(&qs[a], 1));
      const double fb = core(t, x, std::span<const double>(&qs[b], 1));
      const double fm = core(t, x, std::span<const double>(&m, 1));
      if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
      worst = std::max(worst, fm - 0.5 * (fa + fb));
    }
  }
  return std::isfinite(worst) ? worst : 0.0;
}

BandReport conjugate_band(const ConjugateTable& table, double h, double tol) {
  BandReport r;
  r.worst_lower = -kInf;
  r.worst_upper = -kInf;
  for (std::size_t k = 0; k < table.z_grid.size(); ++k) {
    const double g = table.g_values[k];
    r.worst_lower = std::max(r.worst_lower, -h - g);
    r.worst_upper = std::max(r.worst_upper, g - table.nu * std::abs(table.z_grid[k]) - h);
  }
  r.pass = r.worst_lower <= tol && r.worst_upper <= tol;
  return r;
}

double biconjugate(const ConjugateTable& table, double q) {
  double best = -kInf;
  for (std::size_t k = 0; k < table.z_grid.size(); ++k)
    best = std::max(best, q * table.z_grid[k] - table.g_values[k]);
  return best;
}

double biconjugation_error(const CoreFunctionSpec& core, const ConjugateTable& table, double t,
                           std::span<const double> x, std::size_t n_q, double interior) {
  const double nu = core.nu(t, x);
  double worst = 0.0;
  for (double q : uniform_grid(-interior * nu, interior * nu, n_q)) {
    const double fq = core(t, x, std::span<const double>(&q, 1));
    if (!std::isfinite(fq)) continue;
    worst = std::max(worst, std::abs(biconjugate(table, q) - fq));
  }
  return worst;
}

}  // namespace bsdelab
