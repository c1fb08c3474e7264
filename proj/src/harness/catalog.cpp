#include "bsdelab/harness/catalog.hpp"

#include <array>

#include "bsdelab/errors.hpp"

namespace bsdelab::harness {
namespace {

constexpr std::array<CatalogEntry, 21> kCatalog{{
    {"linear-drift", "linear BSDE mu = 0.5, nu = 0.3, xi = B_T: oracle and solver refinement", R"json({
  "id": "linear-drift", "kind": "linear", "seed": 20240601,
  "description": "y0 = 0.3 e^0.5 by reweighting; Picard solver on nested grids",
  "grid": {"T": 1, "steps": 128}, "batch": {"n_paths": 100000},
  "coefficients": {"p": 2, "theta": 2, "mu": 0.5, "nu": 0.3},
  "terminal": "x",
  "compare_solver": {"steps": [32, 64, 128]},
  "expect": [
    {"output": "y0", "value": 0.4946163812, "rel_tol": 0.01, "n_se": 3},
    {"output": "solver_err_64", "op": "le", "value": 0.02},
    {"output": "diff_ratio_32_64_128", "value": 2.0, "abs_tol": 0.6}
  ]
})json"},
    {"sup-margin", "sup-norm margin counterexample, b = 1, p = 2, theta' in {1, 2}", R"json({
  "id": "sup-margin", "kind": "study", "study": "margin", "seed": 20240602,
  "description": "sup moments of y against the terminal weighted moment",
  "grid": {"T": 1, "steps": 64}, "batch": {"n_paths": 100000},
  "params": {"b": "1", "p": 2, "thetas": [1, 2]}
})json"},
    {"stoch-lipschitz-sqrt", "g = -|B| y + sqrt(|B|+1) (|z| ^ |z|^2) on a bounded horizon", R"json({
  "id": "stoch-lipschitz-sqrt", "kind": "nonlinear-bsde", "seed": 20240603,
  "description": "unbounded monotonicity and Lipschitz processes driven by |B|",
  "grid": {"T": 1, "steps": 64}, "batch": {"n_paths": 20000},
  "coefficients": {"p": 2, "theta": 2, "mu": "-abs(x)", "nu": "2*sqrt(abs(x)+1)"},
  "generator": "-abs(x)*y + sqrt(abs(x)+1)*min(abs(z), z^2)",
  "terminal": "x",
  "expect": [
    {"output": "structural_pass", "value": 1},
    {"output": "envelope_pass", "value": 1},
    {"output": "converged", "value": 1}
  ]
})json"},
    {"exp-monotone-sine", "g = e^{-|B| y} - y + sin|z| - 1", R"json({
  "id": "exp-monotone-sine", "kind": "nonlinear-bsde", "seed": 20240604,
  "description": "exponential growth in y with mu = -1, nu = 1",
  "grid": {"T": 1, "steps": 64}, "batch": {"n_paths": 20000},
  "coefficients": {"p": 2, "theta": 2, "mu": -1, "nu": 1},
  "generator": "exp(-abs(x)*y) - y + sin(abs(z)) - 1",
  "terminal": "x",
  "expect": [
    {"output": "structural_pass", "value": 1},
    {"output": "envelope_pass", "value": 1},
    {"output": "converged", "value": 1}
  ]
})json"},
    {"cubic-stiff", "cubic monotone generator with |B|^2-driven coefficients", R"json({
  "id": "cubic-stiff", "kind": "nonlinear-bsde", "seed": 20240605,
  "description": "mu = -(|B|^2 1_{t<=1} + 2e^-t)^2, nu = |B|^2 1_{t<=1} + e^-t; stiff in y",
  "grid": {"T": 1, "steps": 128}, "batch": {"n_paths": 20000},
  "coefficients": {"p": 2, "theta": 2,
                   "mu": "-(x^2*(t<=1) + 2*exp(-t))^2",
                   "nu": "x^2*(t<=1) + exp(-t)"},
  "generator": "-(x^2*(t<=1) + 2*exp(-t))^2*(y + y^3) + (x^2*(t<=1) + exp(-t))*abs(z)",
  "terminal": "sin(x)",
  "expect": [
    {"output": "structural_pass", "value": 1},
    {"output": "envelope_pass", "value": 1},
    {"output": "converged", "value": 1}
  ]
})json"},
    {"sqrt-kink-exit", "square-root kink in y, log(1+|z|), first exit from (-1, 1)", R"json({
  "id": "sqrt-kink-exit", "kind": "nonlinear-bsde", "seed": 20240606,
  "description": "xi = e^-tau B_tau with tau the exit time capped at 2; mu = 0, nu = 1, rho = 1",
  "grid": {"T": 2, "steps": 128}, "batch": {"n_paths": 20000},
  "stopping": {"exit": [-1, 1]},
  "coefficients": {"p": 2, "theta": 2, "rho": 1, "mu": 0, "nu": 1},
  "generator": "(-y + 0.25)*(y <= -0.25) + sqrt(max(-y, 0))*(y > -0.25)*(y <= 0) + log(1 + abs(z))",
  "terminal": "exp(-t)*x",
  "expect": [
    {"output": "structural_pass", "value": 1},
    {"output": "envelope_pass", "value": 1},
    {"output": "converged", "value": 1}
  ]
})json"},
    {"coupled-pair-exit", "two-dimensional coupled generator, xi = (e^tau, e^tau)", R"json({
  "id": "coupled-pair-exit", "kind": "nonlinear-bsde", "seed": 20240607,
  "description": "declared mu = -3, nu = sqrt 2, rho = -1 for a k = 2 system",
  "grid": {"T": 1, "steps": 64}, "batch": {"n_paths": 20000},
  "stopping": {"exit": [-1, 1]},
  "coefficients": {"p": 2, "theta": 2, "rho": -1, "mu": -3, "nu": 1.4142135623730951},
  "generator": ["-3*y1*(1 + abs(y2)) + sqrt(1 + 2*zn)", "-3*y2*(1 + exp(y1)) + zn"],
  "terminal": ["exp(t)", "exp(t)"],
  "expect": [
    {"output": "structural_pass", "value": 1},
    {"output": "envelope_pass", "value": 1}
  ]
})json"},
    {"quartic-weight", "signed weight rho = e^-2t - 3|B|^4 making a non-integrable xi admissible", R"json({
  "id": "quartic-weight", "kind": "nonlinear-bsde", "seed": 20240608, "solve": false,
  "description": "xi = exp(3 int_0^1 |B|^4): finite weighted norm, unstable unweighted estimate",
  "grid": {"T": 1, "steps": 64}, "batch": {"n_paths": 20000},
  "augment": ["abs(x)^4"],
  "coefficients": {"p": 2, "theta": 2, "mu": "exp(-2*t) - 3*abs(x1)^4*(t<=1)", "nu": 0},
  "generator": "(exp(-2*t) - 3*abs(x1)^4*(t<=1))*y + exp(x2)*abs(x1)^4*(t<=1)",
  "terminal": "exp(3*x2)",
  "expect": [
    {"output": "structural_pass", "value": 1},
    {"output": "envelope_pass", "value": 1},
    {"output": "terminal_norm", "value": 1.540903, "abs_tol": 0.001}
  ]
})json"},
    {"pure-decay", "g = -y with xi = 1 on growing horizons: no solution on an infinite horizon", R"json({
  "id": "pure-decay", "kind": "study", "study": "divergence", "seed": 20240609,
  "description": "Y0(T) = e^-T -> 0 while xi stays 1",
  "params": {"T_values": [1, 2, 4], "c": 1, "steps_per_unit": 256, "n_paths": 64},
  "expect": [
    {"output": "decays", "value": 1},
    {"output": "max_rel_error", "op": "le", "value": 0.01}
  ]
})json"},
    {"piecewise-exp", "g = e^-y 1_{y<=0} + (1-y) 1_{y>0} - 1 with rho = mu = -1", R"json({
  "id": "piecewise-exp", "kind": "nonlinear-bsde", "seed": 20240610,
  "description": "negative weight rho = -1, nu = 0, exit from (-1, 1) capped at 2",
  "grid": {"T": 2, "steps": 128}, "batch": {"n_paths": 20000},
  "stopping": {"exit": [-1, 1]},
  "coefficients": {"p": 2, "theta": 2, "rho": -1, "mu": -1, "nu": 0},
  "generator": "exp(-y)*(y <= 0) + (1 - y)*(y > 0) - 1",
  "terminal": "x",
  "expect": [
    {"output": "structural_pass", "value": 1},
    {"output": "envelope_pass", "value": 1},
    {"output": "converged", "value": 1}
  ]
})json"},
    {"fk-heat", "heat equation u = x^2 + (T - t)", R"json({
  "id": "fk-heat", "kind": "feynman-kac-parabolic", "seed": 20240611,
  "problem": {"b": 0, "sigma": 1, "m": 0, "n": 0, "K1": 0, "h": "x^2", "T": 1, "x_min": -6, "x_max": 6},
  "fd": {"nx": 201, "nt": 200},
  "batch": {"n_paths": 100000, "steps_per_unit": 64},
  "points": [[0, -1], [0, 0], [0, 1], [0.25, -1], [0.25, 0], [0.25, 1], [0.5, -1], [0.5, 0], [0.5, 1]],
  "growth": {"C": 2, "q": 2},
  "expect": [
    {"output": "within", "value": 1},
    {"output": "growth_pass", "value": 1}
  ]
})json"},
    {"fk-decay", "linear decay u_t + u_xx/2 - u = 0, u(T) = cos x", R"json({
  "id": "fk-decay", "kind": "feynman-kac-parabolic", "seed": 20240612,
  "problem": {"g": "-u", "m": -1, "n": 0, "K1": 0, "h": "cos(x)", "T": 1},
  "fd": {"nx": 201, "nt": 200},
  "batch": {"n_paths": 50000, "steps_per_unit": 64},
  "points": [[0, 0], [0, 1], [0.5, 0.5]],
  "expect": [{"output": "within", "value": 1}]
})json"},
    {"fk-abs-gradient", "gradient nonlinearity g = |sigma u_x| / 2, u = x + (T - t)/2", R"json({
  "id": "fk-abs-gradient", "kind": "feynman-kac-parabolic", "seed": 20240613,
  "problem": {"g": "0.5*abs(p)", "m": 0, "n": 0.5, "K1": 0.25, "h": "x", "T": 1},
  "fd": {"nx": 201, "nt": 200},
  "batch": {"n_paths": 50000, "steps_per_unit": 64},
  "points": [[0, -1], [0, 0.5], [0.5, 1]],
  "expect": [{"output": "within", "value": 1}]
})json"},
    {"fk-elliptic-harmonic", "harmonic u(x) = x on (-1, 1) by exit-time BSDE", R"json({
  "id": "fk-elliptic-harmonic", "kind": "feynman-kac-elliptic", "seed": 20240614,
  "problem": {"a": -1, "b": 1, "h_a": -1, "h_b": 1, "t_max": 10},
  "fd": {"nx": 401},
  "batch": {"n_paths": 10000, "steps_per_unit": 100},
  "points": [-0.5, 0, 0.5],
  "exit_check": true,
  "expect": [{"output": "within", "value": 1}, {"output": "exit_shift_in_se", "op": "le", "value": 1}]
})json"},
    {"fk-elliptic-cosh", "u''/2 - u/2 = 0, u = cosh x / cosh 1", R"json({
  "id": "fk-elliptic-cosh", "kind": "feynman-kac-elliptic", "seed": 20240615,
  "problem": {"a": -1, "b": 1, "g": "-0.5*u", "m": -0.5, "h_a": 1, "h_b": 1, "t_max": 10},
  "fd": {"nx": 401},
  "batch": {"n_paths": 10000, "steps_per_unit": 100},
  "points": [-0.5, 0, 0.5],
  "expect": [{"output": "within", "value": 1}]
})json"},
    {"fk-elliptic-quadratic", "u''/2 + 1 = 0, u = 1 - x^2 (mean exit time)", R"json({
  "id": "fk-elliptic-quadratic", "kind": "feynman-kac-elliptic", "seed": 20240616,
  "problem": {"a": -1, "b": 1, "g": "1", "h_a": 0, "h_b": 0, "t_max": 10},
  "fd": {"nx": 401},
  "batch": {"n_paths": 10000, "steps_per_unit": 100},
  "points": [-0.5, 0, 0.5],
  "expect": [{"output": "within", "value": 1}]
})json"},
    {"utility-worst-case", "worst-case drift utility: f = 0 on |q| <= 0.5, xi = B_T", R"json({
  "id": "utility-worst-case", "kind": "utility", "seed": 20240617,
  "description": "U0 = -0.5 with optimal density q = -0.5",
  "grid": {"T": 1, "steps": 64}, "batch": {"n_paths": 100000},
  "core": {"f": "0", "nu": 0.5, "h": 0},
  "coefficients": {"p": 2, "theta": 2, "mu": 0, "rho": 0.25},
  "candidates": 21,
  "terminal": "x",
  "axioms": [{"xi": "x", "eta": "x - 1"}, {"xi": "x", "eta": "-x"}],
  "expect": [
    {"output": "u_bsde", "value": -0.5, "abs_tol": 0.02},
    {"output": "best_constant_q", "value": -0.5, "abs_tol": 1e-9},
    {"output": "optimum_gap", "value": 0, "abs_tol": 0.02},
    {"output": "axioms_pass", "value": 1}
  ]
})json"},
    {"utility-clipped-quadratic", "entropic-type core f = q^2/2 on |q| <= 2, xi = B_T", R"json({
  "id": "utility-clipped-quadratic", "kind": "utility", "seed": 20240618,
  "description": "U0 = -0.5, optimal density clip(-Z, -2, 2) = -1",
  "grid": {"T": 1, "steps": 64}, "batch": {"n_paths": 100000},
  "core": {"f": "q^2/2", "nu": 2, "h": 0},
  "coefficients": {"p": 2, "theta": 2, "mu": 0},
  "candidates": 21,
  "terminal": "x",
  "expect": [
    {"output": "u_bsde", "value": -0.5, "abs_tol": 0.02},
    {"output": "optimum_gap", "value": 0, "abs_tol": 0.02}
  ]
})json"},
    {"contraction-theta2", "Picard map contraction with theta = 2", R"json({
  "id": "contraction-theta2", "kind": "study", "study": "contraction", "seed": 20240619,
  "grid": {"T": 1, "steps": 64}, "batch": {"n_paths": 20000},
  "coefficients": {"p": 2, "theta": 2, "mu": 0, "nu": 0.5, "rho": 0.25},
  "generator": "0.5*sin(z)",
  "terminal": "x",
  "params": {"pairs": 5},
  "expect": [{"output": "max_ratio", "op": "le", "value": 0.55}]
})json"},
    {"contraction-theta4", "Picard map contraction with theta = 4", R"json({
  "id": "contraction-theta4", "kind": "study", "study": "contraction", "seed": 20240620,
  "grid": {"T": 1, "steps": 64}, "batch": {"n_paths": 20000},
  "coefficients": {"p": 2, "theta": 4, "mu": 0, "nu": 0.3535533905932738, "rho": 0.25},
  "generator": "0.3535533905932738*sin(z)",
  "terminal": "x",
  "params": {"pairs": 5},
  "expect": [{"output": "max_ratio", "op": "le", "value": 0.3}]
})json"},
    {"truncation-cauchy", "truncated approximations for xi = e^{B_T}, g = -y", R"json({
  "id": "truncation-cauchy", "kind": "study", "study": "truncation", "seed": 20240621,
  "grid": {"T": 0.25, "steps": 64}, "batch": {"n_paths": 20000},
  "coefficients": {"p": 2, "theta": 2, "mu": -1, "nu": 0, "rho": 0},
  "generator": "-y",
  "terminal": "exp(x)",
  "params": {"n_values": [1, 2, 4, 8]},
  "expect": [
    {"output": "nonincreasing", "value": 1},
    {"output": "last_over_first", "op": "le", "value": 0.25}
  ]
})json"},
}};

}  // namespace

std::span<const CatalogEntry> catalog() { return kCatalog; }

nlohmann::json catalog_config(const std::string& id) {
  for (const CatalogEntry& e : kCatalog)
    if (id == e.id) return nlohmann::json::parse(e.config);
  throw Error(ErrorKind::kUsage, "unknown catalog id '" + id + "' (see `catalog list`)");
}

}  // namespace bsdelab::harness
