#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "bsdelab/paths.hpp"

namespace bsdelab {

/// Convex core function f(t, x, q) with barrier nu (f = +inf for |q| > nu)
/// and envelope h (|f(t,0)| <= h, f >= -h).
struct CoreFunctionSpec {
  std::size_t d = 1;
  std::function<double(double t, std::span<const double> x, std::span<const double> q)> f;
  ScalarField nu = constant_field(0.0);
  ScalarField h = constant_field(0.0);
  /// f, nu and h depend on neither t nor x, so one conjugate table serves
  /// every node.
  bool homogeneous = true;
  /// Declared bound K on int_0^tau e^{int mu} h ds, or +inf when unknown.
  double h_integral_bound = std::numeric_limits<double>::infinity();

  /// f with the barrier rule applied exactly.
  double operator()(double t, std::span<const double> x, std::span<const double> q) const;
};

struct ConjugatePoint {
  double value = 0.0;
  std::vector<double> argmax;  // d entries
};

/// sup_{|q| <= nu} (q.z - f(t,x,q)) by a grid search with q_resolution nodes
/// per dimension, followed by golden-section (d = 1) or pattern (d = 2)
/// refinement. Ties go to the smallest |q|. Supports d <= 2.
ConjugatePoint conjugate_point(const CoreFunctionSpec& core, double t, std::span<const double> x,
                               std::span<const double> z, std::size_t q_resolution = 256);

/// Conjugate of a d = 1 core on a sorted z grid.
struct ConjugateTable {
  double nu = 0.0;
  std::vector<double> z_grid;
  std::vector<double> g_values;
  std::vector<double> argmax_q;

  /// Linear interpolation inside the grid, slope-nu extension outside.
  double value(double z) const;
  /// Subgradient selector: node argmax at grid nodes, linear interpolation
  /// between them, +-nu beyond the grid.
  double subgradient(double z) const;
  /// Discrete second differences are >= -tol.
  bool convex(double tol = 1e-10) const;
};

ConjugateTable legendre_fenchel(const CoreFunctionSpec& core, double t, std::span<const double> x,
                                std::span<const double> z_grid, std::size_t q_resolution = 256);

std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

/// Largest midpoint excess f((a+b)/2) - (f(a)+f(b))/2 over a probe grid in the
/// domain (d = 1; finite values only).
double convexity_defect(const CoreFunctionSpec& core, double t, std::span<const double> x,
                        std::size_t n_probe = 65);

struct BandReport {
  double worst_lower = 0.0;  // max of -h - g
  double worst_upper = 0.0;  // max of g - nu|z| - h
  bool pass = true;
};

/// -h <= g(z) <= nu |z| + h on every table node.
BandReport conjugate_band(const ConjugateTable& table, double h, double tol = 1e-12);

/// sup_z (q z - g(z)) over the table nodes.
double biconjugate(const ConjugateTable& table, double q);

/// Largest |f**(q) - f(q)| over q in the interior, |q| <= interior * nu.
double biconjugation_error(const CoreFunctionSpec& core, const ConjugateTable& table, double t,
                           std::span<const double> x, std::size_t n_q = 41,
                           double interior = 0.9);

}  // namespace bsdelab
