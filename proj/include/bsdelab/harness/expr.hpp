#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace bsdelab::harness {

/// Values visible to an expression. Unknown names are rejected at compile
/// time, so the slot list is fixed.
struct ExprVars {
  double t = 0.0;
  std::span<const double> x;  // x, x1, x2, ...
  std::span<const double> y;  // y, y1, y2, ...
  std::span<const double> z;  // z, z1, z2, ...
  double u = 0.0;
  double p = 0.0;
  double q = 0.0;
};

/// Compiled arithmetic expression over t, x, xk, y, yk, z, zk, yn (|y|),
/// zn (|z|), u, p, q and the constants pi, e. Operators: + - * / ^, unary
/// minus, comparisons (1 or 0), |a| for absolute value. Functions: abs, exp,
/// log, sqrt, sin, cos, sinh, cosh, tanh, min, max, pow, ind (1 when the
/// argument is > 0), clip(a, lo, hi).
class Expr {
 public:
  Expr() = default;
  static Expr compile(const std::string& source);

  double operator()(const ExprVars& v) const;
  const std::string& source() const { return source_; }
  /// Largest k such that xk is referenced (x counts as x1).
  std::size_t max_x_index() const { return max_x_; }
  bool empty() const { return code_.empty(); }

  struct Op {
    int code;
    double value;
    int slot;
  };

 private:
  std::string source_;
  std::vector<Op> code_;
  std::size_t max_x_ = 0;
  std::size_t stack_size_ = 0;
};

}  // namespace bsdelab::harness
