#include "bsdelab/harness/expr.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>

#include "bsdelab/errors.hpp"

namespace bsdelab::harness {
namespace {

enum Code : int {
  kConst,
  kT,
  kX,
  kY,
  kZ,
  kYNorm,
  kZNorm,
  kU,
  kP,
  kQ,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kNeg,
  kLt,
  kLe,
  kGt,
  kGe,
  kEq,
  kNe,
  kAbs,
  kExp,
  kLog,
  kSqrt,
  kSin,
  kCos,
  kSinh,
  kCosh,
  kTanh,
  kInd,
  kMin,
  kMax,
  kClip,
};

struct Function {
  const char* name;
  int arity;
  Code code;
};

constexpr std::array<Function, 14> kFunctions{{
    {"abs", 1, kAbs},   {"exp", 1, kExp},   {"log", 1, kLog},   {"sqrt", 1, kSqrt},
    {"sin", 1, kSin},   {"cos", 1, kCos},   {"sinh", 1, kSinh}, {"cosh", 1, kCosh},
    {"tanh", 1, kTanh}, {"ind", 1, kInd},   {"min", 2, kMin},   {"max", 2, kMax},
    {"pow", 2, kPow},   {"clip", 3, kClip},
}};

class Parser {
 public:
  Parser(const std::string& src, std::vector<Expr::Op>& out, std::size_t& max_x)
      : s_(src), out_(out), max_x_(max_x) {}

  void parse() {
    comparison();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::kUsage,
                "expression \"" + s_ + "\" at offset " + std::to_string(pos_) + ": " + msg);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(const char* tok) {
    skip();
    std::size_t n = 0;
    while (tok[n]) ++n;
    if (s_.compare(pos_, n, tok) == 0) {
      pos_ += n;
      return true;
    }
    return false;
  }

  void emit(int code, double value = 0.0, int slot = 0) { out_.push_back({code, value, slot}); }

  void comparison() {
    additive();
    skip();
    struct Cmp {
      const char* tok;
      Code code;
    };
    static constexpr Cmp kCmp[] = {{"<=", kLe}, {">=", kGe}, {"==", kEq},
                                   {"!=", kNe}, {"<", kLt},  {">", kGt}};
    for (const Cmp& c : kCmp) {
      if (accept(c.tok)) {
        additive();
        emit(c.code);
        return;
      }
    }
  }

  void additive() {
    multiplicative();
    for (;;) {
      if (accept("+")) {
        multiplicative();
        emit(kAdd);
      } else if (accept("-")) {
        multiplicative();
        emit(kSub);
      } else {
        return;
      }
    }
  }

  void multiplicative() {
    unary();
    for (;;) {
      if (accept("*")) {
        unary();
        emit(kMul);
      } else if (accept("/")) {
        unary();
        emit(kDiv);
      } else {
        return;
      }
    }
  }

  void unary() {
    if (accept("-")) {
      unary();
      emit(kNeg);
      return;
    }
    if (accept("+")) {
      unary();
      return;
    }
    power();
  }

  void power() {
    primary();
    if (accept("^")) {
      unary();
      emit(kPow);
    }
  }

  void primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      comparison();
      if (!accept(")")) fail("expected ')'");
      return;
    }
    if (c == '|') {
      ++pos_;
      comparison();
      if (!accept("|")) fail("expected closing '|'");
      emit(kAbs);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      emit(kConst, v);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (accept("(")) {
        call(name);
        return;
      }
      variable(name);
      return;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  void call(const std::string& name) {
    for (const Function& f : kFunctions) {
      if (name != f.name) continue;
      for (int a = 0; a < f.arity; ++a) {
        if (a > 0 && !accept(",")) fail("function " + name + " takes " + std::to_string(f.arity) + " arguments");
        comparison();
      }
      if (!accept(")")) fail("expected ')' after arguments of " + name);
      emit(f.code);
      return;
    }
    fail("unknown function '" + name + "'");
  }

  void variable(const std::string& name) {
    if (name == "t") return emit(kT);
    if (name == "u") return emit(kU);
    if (name == "p") return emit(kP);
    if (name == "q") return emit(kQ);
    if (name == "yn") return emit(kYNorm);
    if (name == "zn") return emit(kZNorm);
    if (name == "pi") return emit(kConst, std::numbers::pi);
    if (name == "e") return emit(kConst, std::numbers::e);
    if (name.size() >= 1 && (name[0] == 'x' || name[0] == 'y' || name[0] == 'z')) {
      int index = 1;
      if (name.size() > 1) {
        for (std::size_t i = 1; i < name.size(); ++i)
          if (!std::isdigit(static_cast<unsigned char>(name[i]))) fail("unknown variable '" + name + "'");
        index = std::atoi(name.c_str() + 1);
        if (index < 1 || index > 8) fail("variable index out of range in '" + name + "'");
      }
      const Code code = name[0] == 'x' ? kX : name[0] == 'y' ? kY : kZ;
      if (code == kX) max_x_ = std::max<std::size_t>(max_x_, static_cast<std::size_t>(index));
      return emit(code, 0.0, index - 1);
    }
    fail("unknown variable '" + name + "'");
  }

  const std::string& s_;
  std::vector<Expr::Op>& out_;
  std::size_t& max_x_;
  std::size_t pos_ = 0;
};

double slot(std::span<const double> v, int k) {
  return static_cast<std::size_t>(k) < v.size() ? v[static_cast<std::size_t>(k)]
                                                 : std::numeric_limits<double>::quiet_NaN();
}

double euclid(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

}  // namespace

Expr Expr::compile(const std::string& source) {
  Expr e;
  e.source_ = source;
  Parser(source, e.code_, e.max_x_).parse();
  std::size_t depth = 0;
  for (const Op& op : e.code_) {
    if (op.code <= kQ) {
      ++depth;
    } else if (op.code == kClip) {
      depth -= 2;
    } else if ((op.code >= kAdd && op.code <= kPow) || (op.code >= kLt && op.code <= kNe) ||
               op.code == kMin || op.code == kMax) {
      --depth;
    }
    e.stack_size_ = std::max(e.stack_size_, depth);
  }
  if (e.stack_size_ > 64) throw Error(ErrorKind::kUsage, "expression \"" + source + "\" is too deeply nested");
  return e;
}

double Expr::operator()(const ExprVars& v) const {
  std::array<double, 64> st;
  std::size_t n = 0;
  for (const Op& op : code_) {
    switch (op.code) {
      case kConst: st[n++] = op.value; break;
      case kT: st[n++] = v.t; break;
      case kX: st[n++] = slot(v.x, op.slot); break;
      case kY: st[n++] = slot(v.y, op.slot); break;
      case kZ: st[n++] = slot(v.z, op.slot); break;
      case kYNorm: st[n++] = euclid(v.y); break;
      case kZNorm: st[n++] = euclid(v.z); break;
      case kU: st[n++] = v.u; break;
      case kP: st[n++] = v.p; break;
      case kQ: st[n++] = v.q; break;
      case kAdd: --n; st[n - 1] += st[n]; break;
      case kSub: --n; st[n - 1] -= st[n]; break;
      case kMul: --n; st[n - 1] *= st[n]; break;
      case kDiv: --n; st[n - 1] /= st[n]; break;
      case kPow: --n; st[n - 1] = std::pow(st[n - 1], st[n]); break;
      case kMin: --n; st[n - 1] = std::min(st[n - 1], st[n]); break;
      case kMax: --n; st[n - 1] = std::max(st[n - 1], st[n]); break;
      case kLt: --n; st[n - 1] = st[n - 1] < st[n] ? 1.0 : 0.0; break;
      case kLe: --n; st[n - 1] = st[n - 1] <= st[n] ? 1.0 : 0.0; break;
      case kGt: --n; st[n - 1] = st[n - 1] > st[n] ? 1.0 : 0.0; break;
      case kGe: --n; st[n - 1] = st[n - 1] >= st[n] ? 1.0 : 0.0; break;
      case kEq: --n; st[n - 1] = st[n - 1] == st[n] ? 1.0 : 0.0; break;
      case kNe: --n; st[n - 1] = st[n - 1] != st[n] ? 1.0 : 0.0; break;
      case kNeg: st[n - 1] = -st[n - 1]; break;
      case kAbs: st[n - 1] = std::abs(st[n - 1]); break;
      case kExp: st[n - 1] = std::exp(st[n - 1]); break;
      case kLog: st[n - 1] = std::log(st[n - 1]); break;
      case kSqrt: st[n - 1] = std::sqrt(st[n - 1]); break;
      case kSin: st[n - 1] = std::sin(st[n - 1]); break;
      case kCos: st[n - 1] = std::cos(st[n - 1]); break;
      case kSinh: st[n - 1] = std::sinh(st[n - 1]); break;
      case kCosh: st[n - 1] = std::cosh(st[n - 1]); break;
      case kTanh: st[n - 1] = std::tanh(st[n - 1]); break;
      case kInd: st[n - 1] = st[n - 1] > 0.0 ? 1.0 : 0.0; break;
      case kClip:
        n -= 2;
        st[n - 1] = std::min(std::max(st[n - 1], st[n]), st[n + 1]);
        break;
      default: break;
    }
  }
  return n > 0 ? st[n - 1] : 0.0;
}

}  // namespace bsdelab::harness
