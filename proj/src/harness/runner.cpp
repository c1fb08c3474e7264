#include "bsdelab/harness/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>

#include "bsdelab/errors.hpp"
#include "bsdelab/feynman_kac.hpp"
#include "bsdelab/kernels.hpp"
#include "bsdelab/linear_oracle.hpp"
#include "bsdelab/norms.hpp"
#include "bsdelab/rng.hpp"
#include "bsdelab/sde.hpp"
#include "bsdelab/studies.hpp"
#include "bsdelab/utility.hpp"

namespace bsdelab::harness {
namespace {

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void require_state(const Expr& e, std::size_t state_dim, const Node& node, const std::string& key) {
  if (e.max_x_index() > state_dim)
    node.fail(key, "references x" + std::to_string(e.max_x_index()) + " but the state has " +
                       std::to_string(state_dim) + " column(s)");
}

SpaceTimeFn space_time(const Expr& e) {
  return [e](double t, double x) {
    ExprVars v;
    v.t = t;
    v.x = {&x, 1};
    return e(v);
  };
}

std::function<double(double)> space_only(const Expr& e, double t = 0.0) {
  return [e, t](double x) {
    ExprVars v;
    v.t = t;
    v.x = {&x, 1};
    return e(v);
  };
}

std::string write_artifact(const RunOptions& opt, const std::string& name, const std::string& text) {
  if (opt.out_dir.empty()) return "";
  std::filesystem::create_directories(opt.out_dir);
  const std::string path = (std::filesystem::path(opt.out_dir) / name).string();
  write_file(path, text);
  return name;
}

void add_estimate(RunReport& r, const std::string& name, const Estimate& e) { r.add(name, e.value, e.se); }

// ---------------------------------------------------------------- linear

void run_linear(const Node& root, const Scenario& s, const RunOptions&, RunReport& r) {
  root.allow({"id", "kind", "description", "seed", "expect", "grid", "batch", "state", "coefficients",
              "terminal", "degree", "compare_solver"});
  const CoefficientSpec coeffs = build_coefficients(root.child_or_empty("coefficients"));
  const PathBatch batch = build_batch(root, s.seed);
  const std::vector<Expr> terminal = root.exprs("terminal");
  if (terminal.size() != 1) root.fail("terminal", "linear scenarios are scalar");
  for (const Expr& e : terminal) require_state(e, batch.state_dim, root, "terminal");
  const int degree = static_cast<int>(root.count("degree", 3));
  const std::vector<double> xi = build_terminal(terminal, batch);

  Node cs = root.child_or_empty("compare_solver");
  cs.allow({"steps", "solver"});
  std::vector<double> steps = cs.numbers("steps", {});
  const SolverConfig cfg = build_solver(cs.child_or_empty("solver"));
  for (double n : steps)
    if (n < 1 || std::floor(n) != n || batch.n_steps() % static_cast<std::size_t>(n) != 0)
      cs.fail("steps", "each entry must divide grid.steps");

  const StructuralReport sr = check_structural_condition(coeffs, batch);
  r.add("structural_pass", sr.pass ? 1.0 : 0.0);
  r.add("worst_margin", sr.worst_margin);

  const LinearValue v = linear_bsde_value(LinearScenario{coeffs, {}}, xi, batch, {}, degree);
  add_estimate(r, "y0", v.y0);

  if (steps.empty()) return;
  if (batch.state_dim != batch.dim) cs.fail("steps", "solver comparison needs a Brownian state");
  GeneratorSpec gen;
  gen.name = "linear";
  gen.coeffs = coeffs;
  const ScalarField mu = coeffs.mu, nu = coeffs.nu;
  gen.g = [mu, nu](const NodeView& n, std::span<const double> y, std::span<const double> z,
                   std::span<double> out) { out[0] = mu(n.t, n.x) * y[0] + nu(n.t, n.x) * z[0]; };
  std::vector<double> errors, y0s;
  for (double n : steps) {
    const std::size_t N = static_cast<std::size_t>(n);
    const PathBatch coarse = coarsen_brownian(batch, batch.n_steps() / N);
    const BSDESolution sol = picard_solve(gen, xi, coarse, cfg);
    const std::string tag = std::to_string(N);
    add_estimate(r, "solver_y0_" + tag, sol.y0[0]);
    const double err = std::abs(sol.y0[0].value - v.y0.value);
    r.add("solver_err_" + tag, err);
    r.add("solver_picard_" + tag, sol.picard_iterations);
    if (!errors.empty())
      r.add("order_ratio_" + std::to_string(static_cast<std::size_t>(steps[errors.size() - 1])) + "_" + tag,
            errors.back() / err);
    errors.push_back(err);
    y0s.push_back(sol.y0[0].value);
  }
  // Nested batches share their Monte Carlo noise, so successive differences
  // isolate the discretization error.
  for (std::size_t k = 2; k < y0s.size(); ++k) {
    const double coarse_diff = std::abs(y0s[k - 2] - y0s[k - 1]);
    const double fine_diff = std::abs(y0s[k - 1] - y0s[k]);
    char name[96];
    std::snprintf(name, sizeof name, "diff_ratio_%zu_%zu_%zu", static_cast<std::size_t>(steps[k - 2]),
                  static_cast<std::size_t>(steps[k - 1]), static_cast<std::size_t>(steps[k]));
    r.add(name, coarse_diff / fine_diff);
  }
}

// ---------------------------------------------------------- nonlinear

void run_nonlinear(const Node& root, const Scenario& s, const RunOptions&, RunReport& r) {
  root.allow({"id", "kind", "description", "seed", "expect", "grid", "batch", "state", "stopping", "augment",
              "coefficients", "generator", "growth", "terminal", "solver", "probes", "solve"});
  const CoefficientSpec coeffs = build_coefficients(root.child_or_empty("coefficients"));
  const std::size_t n_probes = root.count("probes", 10000);
  const bool solve = root.flag("solve", true);
  const SolverConfig cfg = build_solver(root.child_or_empty("solver"));
  const PathBatch batch = build_batch(root, s.seed);
  const GeneratorSpec gen = build_generator(root, coeffs, batch.dim, batch.state_dim);
  const std::vector<Expr> terminal = root.exprs("terminal");
  if (terminal.size() != gen.k) root.fail("terminal", "needs one expression per generator component");
  for (const Expr& e : terminal) require_state(e, batch.state_dim, root, "terminal");
  const std::vector<double> xi = build_terminal(terminal, batch);

  const StructuralReport sr = check_structural_condition(coeffs, batch);
  r.add("structural_pass", sr.pass ? 1.0 : 0.0);
  r.add("worst_margin", sr.worst_margin);

  const EnvelopeProbeReport pr = probe_envelopes(gen, batch, n_probes, s.seed + 1);
  r.add("envelope_pass", pr.pass() ? 1.0 : 0.0);
  r.add("worst_monotonicity", pr.worst_monotonicity);
  r.add("worst_lipschitz", pr.worst_lipschitz);
  if (gen.growth) r.add("worst_growth", pr.worst_growth);

  const Field rho_int = running_integral(coeffs.rho, batch);
  const Field zero_int = running_integral(constant_field(0.0), batch);
  add_estimate(r, "terminal_norm", weighted_terminal_norm(xi, gen.k, rho_int, batch, coeffs.p, s.id));
  add_estimate(r, "unweighted_terminal_norm",
               weighted_terminal_norm(xi, gen.k, zero_int, batch, coeffs.p, s.id));
  if (!solve) return;

  const BSDESolution sol = picard_solve(gen, xi, batch, cfg);
  if (gen.k == 1) {
    add_estimate(r, "y0", sol.y0[0]);
  } else {
    for (std::size_t c = 0; c < gen.k; ++c) add_estimate(r, "y0_" + std::to_string(c + 1), sol.y0[c]);
  }
  r.add("picard_iterations", sol.picard_iterations);
  r.add("converged", sol.converged ? 1.0 : 0.0);
  r.add("residual", sol.residual);
  add_estimate(r, "sup_norm", sol.norms.sup);
  add_estimate(r, "z_norm", sol.norms.z);
}

// ------------------------------------------------------ feynman-kac

std::vector<std::pair<double, double>> read_points(const Node& root) {
  const Json& pts = root.raw().contains("points") ? root.raw()["points"] : Json();
  if (!pts.is_array() || pts.empty()) root.fail("points", "expected a non-empty array of [t, x] pairs");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Json& p = pts[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      root.fail("points[" + std::to_string(i) + "]", "expected [t, x]");
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

BatchConfig read_fk_batch(const Node& root, std::uint64_t seed) {
  const Node b = root.child("batch");
  b.allow({"n_paths", "steps_per_unit"});
  BatchConfig cfg;
  cfg.n_paths = b.count("n_paths");
  cfg.steps_per_unit = b.number("steps_per_unit", 64.0);
  if (!(cfg.steps_per_unit > 0)) b.fail("steps_per_unit", "must be positive");
  cfg.seed = seed;
  return cfg;
}

std::string fk_csv(const FkComparison& cmp) {
  std::ostringstream os;
  write_fk_csv(os, cmp.rows);
  return os.str();
}

void report_fk(RunReport& r, const FkComparison& cmp, const Node& tol_node) {
  tol_node.allow({"abs", "n_se"});
  const double abs_tol = tol_node.number("abs", 0.05);
  const double n_se = tol_node.number("n_se", 3.0);
  for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
    const FkRow& row = cmp.rows[i];
    const std::string tag = std::to_string(i);
    r.add("u_fd_" + tag, row.u_fd);
    r.add("u_bsde_" + tag, row.u_bsde, row.se);
  }
  r.add("max_abs_diff", cmp.max_abs_diff);
  r.add("mean_abs_diff", cmp.mean_abs_diff);
  r.add("within", cmp.within(abs_tol, n_se) ? 1.0 : 0.0);
}

void run_parabolic(const Node& root, const Scenario& s, const RunOptions& opt, RunReport& r) {
  root.allow({"id", "kind", "description", "seed", "expect", "problem", "fd", "batch", "points", "solver",
              "growth", "tolerance"});
  const Node pn = root.child("problem");
  pn.allow({"b", "sigma", "g", "m", "n", "K1", "p", "theta", "h", "T", "x_min", "x_max"});
  ParabolicProblem pb;
  pb.b = space_time(pn.expr("b", "0"));
  pb.sigma = space_time(pn.expr("sigma", "1"));
  if (pn.has("g")) {
    const Expr g = pn.expr("g");
    pb.g = [g](double t, double x, double u, double p) {
      ExprVars v;
      v.t = t;
      v.x = {&x, 1};
      v.u = u;
      v.p = p;
      v.y = {&u, 1};
      v.z = {&p, 1};
      return g(v);
    };
  }
  pb.m = space_time(pn.expr("m", "0"));
  pb.n = space_time(pn.expr("n", "0"));
  pb.K1 = pn.number("K1");
  pb.p = pn.number("p", 2.0);
  pb.theta = pn.number("theta", 2.0);
  pb.T = pn.number("T");
  pb.h = space_only(pn.expr("h"), pb.T);
  pb.x_min = pn.number("x_min", -6.0);
  pb.x_max = pn.number("x_max", 6.0);
  const Node fd = root.child_or_empty("fd");
  fd.allow({"nx", "nt", "w"});
  const std::size_t nx = fd.count("nx", 201), nt = fd.count("nt", 200);
  const double w = fd.number("w", 0.5);
  const BatchConfig bc = read_fk_batch(root, s.seed);
  const auto points = read_points(root);
  const SolverConfig cfg = build_solver(root.child_or_empty("solver"));
  const Node tol = root.child_or_empty("tolerance");

  const EnvelopeCheck env = check_parabolic_envelope(pb, nx, nt);
  r.add("envelope_pass", env.pass ? 1.0 : 0.0);
  const FDSolution sol = solve_parabolic_fd(pb, nx, nt, w);
  const std::vector<SurfacePoint> surface = bsde_surface(pb, points, bc, cfg);
  const FkComparison cmp = fk_compare(sol, surface);
  report_fk(r, cmp, tol);
  if (root.has("growth")) {
    const Node g = root.child("growth");
    g.allow({"C", "q"});
    const GrowthCheck gc = growth_bound_check(surface, g.number("C"), g.number("q"));
    r.add("growth_pass", gc.pass ? 1.0 : 0.0);
    r.add("growth_worst_ratio", gc.worst_ratio);
    r.add("growth_fitted_slope", gc.fitted_slope);
  }
  const std::string a = write_artifact(opt, "fk.csv", fk_csv(cmp));
  if (!a.empty()) r.artifacts.push_back(a);
}

void run_elliptic(const Node& root, const Scenario& s, const RunOptions& opt, RunReport& r) {
  root.allow({"id", "kind", "description", "seed", "expect", "problem", "fd", "batch", "points", "solver",
              "exit_check", "tolerance"});
  const Node pn = root.child("problem");
  pn.allow({"a", "b", "drift", "sigma", "g", "m", "n", "h_a", "h_b", "t_max", "p", "theta"});
  EllipticProblem pb;
  pb.a = pn.number("a", -1.0);
  pb.b = pn.number("b", 1.0);
  if (!(pb.a < pb.b)) pn.fail("b", "must exceed a");
  pb.drift = space_only(pn.expr("drift", "0"));
  pb.sigma = space_only(pn.expr("sigma", "1"));
  if (pn.has("g")) {
    const Expr g = pn.expr("g");
    pb.g = [g](double x, double u, double p) {
      ExprVars v;
      v.x = {&x, 1};
      v.u = u;
      v.p = p;
      v.y = {&u, 1};
      v.z = {&p, 1};
      return g(v);
    };
  }
  pb.m = space_only(pn.expr("m", "0"));
  pb.n = space_only(pn.expr("n", "0"));
  pb.h_a = pn.number("h_a");
  pb.h_b = pn.number("h_b");
  pb.t_max = pn.number("t_max", 10.0);
  pb.p = pn.number("p", 2.0);
  pb.theta = pn.number("theta", 2.0);
  const Node fd = root.child_or_empty("fd");
  fd.allow({"nx"});
  const std::size_t nx = fd.count("nx", 401);
  const BatchConfig bc = read_fk_batch(root, s.seed);
  const std::vector<double> xs = root.numbers("points");
  if (xs.empty()) root.fail("points", "expected at least one point");
  const SolverConfig cfg = build_solver(root.child_or_empty("solver"));
  const bool exit_check = root.flag("exit_check", false);
  const Node tol = root.child_or_empty("tolerance");

  r.add("exit_rate", principal_exit_rate(pb));
  const EnvelopeCheck env = check_elliptic_envelope(pb);
  r.add("envelope_pass", env.pass ? 1.0 : 0.0);
  const FDSolution sol = solve_elliptic_fd(pb, nx);
  const std::vector<SurfacePoint> surface = bsde_surface(pb, xs, bc, cfg);
  const FkComparison cmp = fk_compare(sol, surface);
  report_fk(r, cmp, tol);
  std::size_t capped = 0;
  for (const SurfacePoint& p : surface) capped += p.capped_paths;
  r.add("capped_paths", static_cast<double>(capped));
  if (exit_check) {
    EllipticProblem longer = pb;
    longer.t_max = 2.0 * pb.t_max;
    const std::vector<SurfacePoint> s2 = bsde_surface(longer, xs, bc, cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double se = std::max(surface[i].u.se, 1e-300);
      worst = std::max(worst, std::abs(s2[i].u.value - surface[i].u.value) / se);
    }
    r.add("exit_shift_in_se", worst);
  }
  const std::string a = write_artifact(opt, "fk.csv", fk_csv(cmp));
  if (!a.empty()) r.artifacts.push_back(a);
}

// ---------------------------------------------------------- utility

void run_utility(const Node& root, const Scenario& s, const RunOptions& opt, RunReport& r) {
  root.allow({"id", "kind", "description", "seed", "expect", "grid", "batch", "state", "stopping", "core",
              "coefficients", "conjugate", "candidates", "terminal", "axioms", "solver"});
  const Node cn = root.child("core");
  cn.allow({"f", "nu", "h", "h_bound", "homogeneous"});
  CoreFunctionSpec core;
  core.d = 1;
  const Expr f = cn.expr("f");
  core.f = [f](double t, std::span<const double> x, std::span<const double> q) {
    ExprVars v;
    v.t = t;
    v.x = x;
    v.q = q[0];
    return f(v);
  };
  core.nu = scalar_field(cn.expr("nu"));
  core.h = scalar_field(cn.expr("h", "0"));
  core.h_integral_bound = cn.number("h_bound", std::numeric_limits<double>::infinity());
  core.homogeneous = cn.flag("homogeneous", true);

  Node cc = root.child_or_empty("coefficients");
  cc.allow({"p", "theta", "rho", "mu"});
  UtilityConfig cfg;
  cfg.p = cc.number("p", 2.0);
  cfg.theta = cc.number("theta", 2.0);
  cfg.mu = scalar_field(cc.expr("mu", "0"));
  if (cc.has("rho")) {
    cfg.rho = scalar_field(cc.expr("rho"));
  } else {
    CoefficientSpec tmp;
    tmp.p = cfg.p;
    tmp.theta = cfg.theta;
    const double factor = tmp.nu_factor();
    const ScalarField mu = cfg.mu, nu = core.nu;
    cfg.rho = [mu, nu, factor](double t, std::span<const double> x) {
      const double n = nu(t, x);
      return mu(t, x) + factor * n * n;
    };
  }
  const Node conj = root.child_or_empty("conjugate");
  conj.allow({"z_half_width", "z_nodes", "q_resolution"});
  cfg.z_half_width = conj.number("z_half_width", 0.0);
  cfg.z_nodes = conj.count("z_nodes", 4001);
  cfg.q_resolution = conj.count("q_resolution", 256);
  if (cfg.q_resolution < 64) conj.fail("q_resolution", "must be at least 64");
  cfg.solver = build_solver(root.child_or_empty("solver"));
  const std::size_t n_candidates = root.count("candidates", 21);
  const PathBatch batch = build_batch(root, s.seed);
  const std::vector<Expr> terminal = root.exprs("terminal");
  if (terminal.size() != 1) root.fail("terminal", "utility payoffs are scalar");
  require_state(terminal[0], batch.state_dim, root, "terminal");
  std::vector<std::pair<Expr, Expr>> pairs;
  if (root.has("axioms")) {
    for (const Node& a : root.objects("axioms")) {
      a.allow({"xi", "eta"});
      pairs.emplace_back(a.expr("xi"), a.expr("eta"));
      require_state(pairs.back().first, batch.state_dim, a, "xi");
      require_state(pairs.back().second, batch.state_dim, a, "eta");
    }
  }
  const std::vector<double> xi = build_terminal(terminal, batch);

  const double convexity = convexity_defect(core, 0.0, {});
  r.add("core_convexity_defect", convexity);
  const std::vector<DualCandidate> candidates = constant_candidates(core, n_candidates);
  const UtilityReport u = evaluate_utility(xi, core, cfg, batch, candidates);
  add_estimate(r, "u_bsde", u.u_bsde);
  add_estimate(r, "u_dual", u.u_dual);
  r.add("gap", u.gap);
  r.add("combined_se", u.combined_se);
  add_estimate(r, "dual_at_optimum", u.dual_at_optimum);
  r.add("optimum_gap", u.dual_at_optimum.value - u.u_bsde.value);
  std::size_t best_c = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const DualRow& row = u.dual.rows[i];
    if (row.rejected || row.flagged) continue;
    if (best_c == candidates.size() || row.value.value < u.dual.rows[best_c].value.value) best_c = i;
  }
  if (best_c < candidates.size()) {
    const double q = std::strtod(candidates[best_c].label.c_str() + 2, nullptr);
    r.add("best_constant_q", q);
    add_estimate(r, "best_constant_value", u.dual.rows[best_c].value);
  }
  add_estimate(r, "martingale_mean", u.certificate.martingale_mean);
  r.add("attainability_certified", u.attainability_mode == "uncertified" ? 0.0 : 1.0);
  r.add("consistent", u.consistent(0.02) ? 1.0 : 0.0);
  r.note("attainability_mode", u.attainability_mode);
  r.note("q_opt", u.q_opt);
  if (!u.warning.empty()) r.note("warning", u.warning);

  std::ostringstream dual_csv;
  dual_csv << "label,value,se,martingale_mean,rejected,flagged\n";
  for (const DualRow& row : u.dual.rows)
    dual_csv << row.label << "," << format_number(row.value.value) << "," << format_number(row.value.se) << ","
             << format_number(row.martingale_mean.value) << "," << (row.rejected ? 1 : 0) << ","
             << (row.flagged ? 1 : 0) << "\n";
  const std::string a = write_artifact(opt, "dual.csv", dual_csv.str());
  if (!a.empty()) r.artifacts.push_back(a);

  bool all = true;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const std::vector<double> x1 = build_terminal({pairs[k].first}, batch);
    const std::vector<double> x2 = build_terminal({pairs[k].second}, batch);
    const AxiomReport ar = axiom_check(x1, x2, core, cfg, batch);
    for (const AxiomRow& row : ar.rows) {
      std::string name = "axiom_" + std::to_string(k) + "_" + row.axiom;
      if (row.axiom == "concavity") name += "_" + label(row.lambda);
      r.add(name + "_excess", row.lhs - row.rhs);
      r.add(name + "_pass", row.pass ? 1.0 : 0.0);
    }
    all = all && ar.pass();
  }
  if (!pairs.empty()) r.add("axioms_pass", all ? 1.0 : 0.0);
}

// ------------------------------------------------------------ studies

void run_margin(const Node& root, const Node& params, const Scenario& s, RunReport& r) {
  params.allow({"b", "p", "thetas", "degree"});
  const ScalarField b = scalar_field(params.expr("b"));
  const double p = params.number("p", 2.0);
  const std::vector<double> thetas = params.numbers("thetas");
  if (thetas.empty()) params.fail("thetas", "expected at least one value");
  const int degree = static_cast<int>(params.count("degree", 3));
  const PathBatch batch = build_batch(root, s.seed);
  const MarginStudy m = supnorm_margin_study(b, p, thetas, batch, degree);
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    const std::string tag = label(m.rows[i].theta_prime);
    add_estimate(r, "sup_moment_" + tag, m.rows[i].sup_moment);
    add_estimate(r, "terminal_moment_" + tag, m.rows[i].terminal_moment);
    add_estimate(r, "sup_excess_" + tag, m.rows[i].sup_excess);
    r.add("doob_constant_" + tag, m.doob_constant[i]);
    add_estimate(r, "paired_difference_" + tag, m.paired_difference[i]);
  }
}

void run_truncation(const Node& root, const Node& params, const Scenario& s, RunReport& r) {
  params.allow({"n_values"});
  const std::vector<double> ns = params.numbers("n_values");
  if (ns.empty()) params.fail("n_values", "expected at least one level");
  const CoefficientSpec coeffs = build_coefficients(root.child_or_empty("coefficients"));
  const SolverConfig cfg = build_solver(root.child_or_empty("solver"));
  const PathBatch batch = build_batch(root, s.seed);
  const GeneratorSpec gen = build_generator(root, coeffs, batch.dim, batch.state_dim);
  const std::vector<double> xi = build_terminal(root.exprs("terminal"), batch);
  const std::vector<TruncationRow> rows = truncation_study(gen, xi, ns, batch, cfg);
  bool nonincreasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string tag = label(rows[i].n);
    add_estimate(r, "dy_" + tag, rows[i].dy);
    add_estimate(r, "dz_" + tag, rows[i].dz);
    add_estimate(r, "tail_" + tag, rows[i].tail);
    r.add("active_" + tag, rows[i].active ? 1.0 : 0.0);
    if (i > 0) nonincreasing = nonincreasing && rows[i].dy.value <= rows[i - 1].dy.value;
  }
  r.add("nonincreasing", nonincreasing ? 1.0 : 0.0);
  r.add("last_over_first", rows.back().dy.value / rows.front().dy.value);
}

void run_divergence(const Node& params, const Scenario& s, RunReport& r) {
  params.allow({"T_values", "c", "steps_per_unit", "n_paths", "solver"});
  const std::vector<double> Ts = params.numbers("T_values");
  if (Ts.empty()) params.fail("T_values", "expected at least one horizon");
  const double c = params.number("c", 1.0);
  const std::size_t spu = params.count("steps_per_unit", 256);
  const std::size_t n_paths = params.count("n_paths", 64);
  const SolverConfig cfg = build_solver(params.child_or_empty("solver"));
  const DivergenceStudy d = horizon_divergence_study(Ts, c, spu, n_paths, s.seed, cfg);
  double worst = 0.0;
  for (const DivergenceRow& row : d.rows) {
    const std::string tag = label(row.T);
    r.add("y0_" + tag, row.y0);
    r.add("oracle_" + tag, row.oracle);
    r.add("rel_error_" + tag, row.rel_error);
    worst = std::max(worst, row.rel_error);
  }
  r.add("max_rel_error", worst);
  r.add("decays", d.decays ? 1.0 : 0.0);
}

Field random_smooth_field(const PathBatch& batch, std::size_t width, std::uint64_t seed, std::uint64_t index) {
  PathStream stream(seed ^ 0x9e3779b97f4a7c15ull, 1000000 + index);
  double u[6];
  for (int i = 0; i < 6; i += 2) u[i] = stream.uniform_pair(u[i + 1]);
  const double a0 = 2.0 * u[0] - 1.0, a1 = 0.5 + u[1], w = 0.5 + 1.5 * u[2], phase = 6.283185307179586 * u[3];
  const double a2 = 2.0 * u[4] - 1.0, a3 = 0.5 * (2.0 * u[5] - 1.0);
  Field V(batch.n_paths, batch.n_steps(), width, 0.0);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    for (std::size_t j = 0; j < batch.n_steps(); ++j) {
      const double t = batch.grid.times[j];
      const double x = batch.state(i, j, 0);
      for (std::size_t c = 0; c < width; ++c)
        V.at(i, j, c) = a0 + a1 * std::sin(w * x + phase + c) + a2 * t + a3 * x * x / (1.0 + x * x);
    }
  }
  return V;
}

void run_contraction(const Node& root, const Node& params, const Scenario& s, RunReport& r) {
  params.allow({"pairs"});
  const std::size_t pairs = params.count("pairs", 5);
  const CoefficientSpec coeffs = build_coefficients(root.child_or_empty("coefficients"));
  const SolverConfig cfg = build_solver(root.child_or_empty("solver"));
  const PathBatch batch = build_batch(root, s.seed);
  const GeneratorSpec gen = build_generator(root, coeffs, batch.dim, batch.state_dim);
  const std::vector<double> xi = build_terminal(root.exprs("terminal"), batch);
  double worst = 0.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const Field V1 = random_smooth_field(batch, gen.k * gen.d, s.seed, 2 * k);
    const Field V2 = random_smooth_field(batch, gen.k * gen.d, s.seed, 2 * k + 1);
    const double ratio = contraction_ratio(gen, xi, V1, V2, batch, cfg);
    r.add("ratio_" + std::to_string(k), ratio);
    worst = std::max(worst, ratio);
  }
  r.add("max_ratio", worst);
  r.add("bound", 1.0 / coeffs.theta);
}

void run_study(const Node& root, const Scenario& s, const RunOptions&, RunReport& r) {
  root.allow({"id", "kind", "description", "seed", "expect", "study", "params", "grid", "batch", "state",
              "stopping", "augment", "coefficients", "generator", "growth", "terminal", "solver"});
  const std::string study = root.text("study");
  const Node params = root.child_or_empty("params");
  if (study == "margin") return run_margin(root, params, s, r);
  if (study == "truncation") return run_truncation(root, params, s, r);
  if (study == "divergence") return run_divergence(params, s, r);
  if (study == "contraction") return run_contraction(root, params, s, r);
  root.fail("study", "unknown study '" + study + "' (margin, truncation, divergence, contraction)");
}

Check verdict(const Expectation& e, const RunReport& r) {
  Check c{"expect " + e.output + " " + e.op + " " + format_number(e.value), "fail", ""};
  const Output* o = r.find(e.output);
  if (!o) {
    c.detail = "output not produced";
    return c;
  }
  const double se = std::isnan(o->se) ? 0.0 : o->se;
  const double slack = e.abs_tol + e.rel_tol * std::abs(e.value) + e.n_se * se;
  bool ok = false;
  if (e.op == "within") ok = std::abs(o->value - e.value) <= slack;
  if (e.op == "le") ok = o->value <= e.value + slack;
  if (e.op == "ge") ok = o->value >= e.value - slack;
  c.status = ok ? "pass" : "fail";
  c.detail = "observed " + format_number(o->value) + ", slack " + format_number(slack);
  return c;
}

}  // namespace

PathBatch build_batch(const Node& root, std::uint64_t seed) {
  const Node grid = root.child("grid");
  grid.allow({"t0", "T", "steps"});
  const double t0 = grid.number("t0", 0.0);
  const double T = grid.number("T");
  if (!(T > t0)) grid.fail("T", "must exceed t0");
  const std::size_t steps = grid.count("steps");
  const Node b = root.child("batch");
  b.allow({"n_paths"});
  const std::size_t n = b.count("n_paths");

  const Node st = root.child_or_empty("state");
  st.allow({"type", "dim", "drift", "diffusion", "x0"});
  const std::string type = st.text("type", "brownian");
  const std::size_t dim = st.count("dim", 1);
  PathBatch batch = simulate_brownian(n, build_grid(t0, T, steps), dim, seed);
  if (type == "sde") {
    if (dim != 1) st.fail("dim", "scalar SDE states need dim = 1");
    const Expr drift = st.expr("drift"), diff = st.expr("diffusion");
    auto fn = [](const Expr& e) {
      return [e](double t, double x) {
        ExprVars v;
        v.t = t;
        v.x = {&x, 1};
        return e(v);
      };
    };
    batch = euler_maruyama(scalar_diffusion(fn(drift), fn(diff), st.number("x0", 0.0)), batch);
  } else if (type != "brownian") {
    st.fail("type", "expected brownian or sde");
  }

  if (root.has("stopping")) {
    const Node sp = root.child("stopping");
    sp.allow({"exit", "component", "t_max"});
    const std::vector<double> ab = sp.numbers("exit");
    if (ab.size() != 2 || !(ab[0] < ab[1])) sp.fail("exit", "expected [a, b] with a < b");
    const std::size_t comp = sp.has("component") ? sp.count("component") - 1 : 0;
    if (comp >= batch.state_dim) sp.fail("component", "beyond the state dimension");
    first_exit_time(batch, ab[0], ab[1], sp.number("t_max", T), comp);
  }
  if (root.has("augment")) {
    for (const Expr& e : root.exprs("augment")) {
      require_state(e, batch.state_dim, root, "augment");
      augment_running_integral(batch, scalar_field(e));
    }
  }
  return batch;
}

CoefficientSpec build_coefficients(const Node& c) {
  c.allow({"p", "theta", "rho", "mu", "nu"});
  CoefficientSpec spec;
  spec.p = c.number("p", 2.0);
  spec.theta = c.number("theta", 2.0);
  if (!(spec.p > 1.0)) c.fail("p", "must exceed 1");
  if (!(spec.theta > 1.0)) c.fail("theta", "must exceed 1");
  spec.mu = scalar_field(c.expr("mu", "0"));
  spec.nu = scalar_field(c.expr("nu", "0"));
  if (c.has("rho")) {
    spec.rho = scalar_field(c.expr("rho"));
  } else {
    const double factor = spec.nu_factor();
    const ScalarField mu = spec.mu, nu = spec.nu;
    spec.rho = [mu, nu, factor](double t, std::span<const double> x) {
      const double n = nu(t, x);
      return mu(t, x) + factor * n * n;
    };
  }
  return spec;
}

GeneratorSpec build_generator(const Node& root, const CoefficientSpec& coeffs, std::size_t d,
                              std::size_t state_dim) {
  const std::vector<Expr> g = root.exprs("generator");
  for (const Expr& e : g) require_state(e, state_dim, root, "generator");
  GeneratorSpec gen;
  gen.name = root.text("id", "generator");
  gen.k = g.size();
  gen.d = d;
  gen.coeffs = coeffs;
  gen.g = [g](const NodeView& n, std::span<const double> y, std::span<const double> z, std::span<double> out) {
    ExprVars v;
    v.t = n.t;
    v.x = n.x;
    v.y = y;
    v.z = z;
    for (std::size_t c = 0; c < g.size(); ++c) out[c] = g[c](v);
  };
  if (root.has("growth")) {
    const Expr psi = root.expr("growth");
    gen.growth = [psi](double t, double rr) {
      ExprVars v;
      v.t = t;
      v.u = rr;
      return psi(v);
    };
  }
  return gen;
}

SolverConfig build_solver(const Node& s) {
  s.allow({"basis_degree", "picard_tol", "max_picard", "z_estimator", "implicit_y", "implicit_substeps", "ridge",
           "check_structure"});
  SolverConfig c;
  c.basis_degree = static_cast<int>(s.count("basis_degree", 3));
  c.picard_tol = s.number("picard_tol", c.picard_tol);
  c.max_picard = static_cast<int>(s.count("max_picard", static_cast<std::size_t>(c.max_picard)));
  const std::string z = s.text("z_estimator", "martingale");
  if (z == "martingale") {
    c.z_estimator = ZEstimator::kMartingaleRegression;
  } else if (z == "increment") {
    c.z_estimator = ZEstimator::kIncrementProduct;
  } else {
    s.fail("z_estimator", "expected martingale or increment");
  }
  c.implicit_y = s.flag("implicit_y", true);
  c.implicit_substeps = static_cast<int>(s.count("implicit_substeps", 1));
  c.ridge = s.number("ridge", c.ridge);
  c.check_structure = s.flag("check_structure", true);
  return c;
}

std::vector<double> build_terminal(const std::vector<Expr>& terminal, const PathBatch& batch) {
  const std::size_t k = terminal.size();
  std::vector<double> xi(batch.n_paths * k);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    ExprVars v;
    v.t = batch.grid.times[batch.stop_index[i]];
    v.x = batch.stopped_state(i);
    for (std::size_t c = 0; c < k; ++c) xi[i * k + c] = terminal[c](v);
  }
  return xi;
}

RunReport run_scenario(const Scenario& s, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  r.id = s.id;
  r.kind = s.kind;
  r.digest = config_digest(s.config);
  const Node root(s.config, "scenario");
  try {
    if (s.kind == "linear") run_linear(root, s, options, r);
    else if (s.kind == "nonlinear-bsde") run_nonlinear(root, s, options, r);
    else if (s.kind == "feynman-kac-parabolic") run_parabolic(root, s, options, r);
    else if (s.kind == "feynman-kac-elliptic") run_elliptic(root, s, options, r);
    else if (s.kind == "utility") run_utility(root, s, options, r);
    else if (s.kind == "study") run_study(root, s, options, r);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kUsage) throw;
    r.checks.push_back({"run", "fail", std::string(to_string(e.kind())) + ": " + e.what()});
  }
  for (const Expectation& e : s.expect) r.checks.push_back(verdict(e, r));
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace bsdelab::harness
