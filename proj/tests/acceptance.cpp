// Acceptance checks, one verdict line per criterion.
//
//   acceptance --criterion N     run one criterion (1..10)
//   acceptance                   run all of them
//
// Exit status is 0 when every selected criterion passes.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "CLI11.hpp"
#include "bsdelab/harness/catalog.hpp"
#include "bsdelab/harness/report.hpp"
#include "bsdelab/harness/runner.hpp"
#include "bsdelab/harness/scenario.hpp"
#include "bsdelab/linear_oracle.hpp"
#include "bsdelab/sde.hpp"
#include "bsdelab/solver.hpp"

using namespace bsdelab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string num(double v) { return harness::format_number(v); }

harness::RunReport run_catalog(const std::string& id) {
  return harness::run_scenario(harness::parse_scenario(harness::catalog_config(id)));
}

struct Captured {
  int status = -1;
  std::string out;
};

Captured shell(const std::string& cmd) {
  Captured c;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return c;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) c.out.append(buf.data(), n);
  const int raw = pclose(p);
  c.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return c;
}

// Shared scenario of criteria 1 and 2: mu = 0.5, nu = 0.3, xi = B_T, T = 1.
constexpr double kMu = 0.5, kNu = 0.3;
const double kLinearExact = 0.3 * std::exp(0.5);

CoefficientSpec linear_coefficients() { return constant_coefficients(2, 2, kMu + kNu * kNu, kMu, kNu); }

std::vector<double> terminal_B(const PathBatch& b) {
  std::vector<double> xi(b.n_paths);
  for (std::size_t i = 0; i < b.n_paths; ++i) xi[i] = b.state(i, b.n_steps());
  return xi;
}

Verdict criterion_1() {
  const auto start = Clock::now();
  const PathBatch b = simulate_brownian(100000, build_grid(0, 1, 64), 1, 20240601);
  const LinearValue v = linear_bsde_value({linear_coefficients(), {}}, terminal_B(b), b);
  const double elapsed = seconds_since(start);
  const double err = std::abs(v.y0.value - kLinearExact);
  const double tol = std::max(3.0 * v.y0.se, 0.01 * kLinearExact);
  Verdict out;
  out.pass = err <= tol && elapsed < 10.0;
  out.detail = "y0 = " + num(v.y0.value) + " (se " + num(v.y0.se) + "), |err| " + num(err) + " <= " + num(tol) +
               ", runtime " + fmt("%.2f", elapsed) + " s < 10 s";
  return out;
}

Verdict criterion_2() {
  const auto start = Clock::now();
  const PathBatch fine = simulate_brownian(100000, build_grid(0, 1, 128), 1, 20240601);
  const std::vector<double> xi = terminal_B(fine);
  const LinearValue oracle = linear_bsde_value({linear_coefficients(), {}}, xi, fine);
  GeneratorSpec gen;
  gen.name = "linear";
  gen.coeffs = linear_coefficients();
  gen.g = [](const NodeView&, std::span<const double> y, std::span<const double> z, std::span<double> out) {
    out[0] = kMu * y[0] + kNu * z[0];
  };
  std::vector<double> y0, err;
  for (std::size_t factor : {4, 2, 1}) {
    const PathBatch b = factor == 1 ? fine : coarsen_brownian(fine, factor);
    const BSDESolution s = picard_solve(gen, xi, b, {});
    y0.push_back(s.y0[0].value);
    err.push_back(std::abs(s.y0[0].value - oracle.y0.value));
  }
  const double elapsed = seconds_since(start);
  // Nested batches: y(32) - y(64) and y(64) - y(128) carry the same Monte
  // Carlo noise, so their ratio is the discretization order.
  const double diff_ratio = std::abs(y0[0] - y0[1]) / std::abs(y0[1] - y0[2]);
  Verdict out;
  const bool match = err[1] <= 0.02;
  const bool order = diff_ratio >= 1.4 && diff_ratio <= 2.6;
  out.pass = match && order && elapsed < 60.0;
  out.detail = "|y(64) - oracle| = " + num(err[1]) + " <= 0.02, successive-difference ratio " + num(diff_ratio) +
               " in [1.4, 2.6], runtime " + fmt("%.1f", elapsed) + " s < 60 s";
  out.notes.push_back("errors against the same-sample oracle at 32/64/128 steps: " + num(err[0]) + ", " +
                      num(err[1]) + ", " + num(err[2]) + " (ratios " + num(err[0] / err[1]) + ", " +
                      num(err[1] / err[2]) + "); the raw errors are dominated by the Monte Carlo gap between "
                      "the two estimators (oracle se " + num(oracle.y0.se) + ")");
  return out;
}

Verdict criterion_3() {
  const harness::RunReport a = run_catalog("contraction-theta2");
  const harness::RunReport b = run_catalog("contraction-theta4");
  const double ra = a.value("max_ratio"), rb = b.value("max_ratio");
  Verdict out;
  out.pass = ra <= 0.5 + 0.05 && rb <= 0.25 + 0.05;
  out.detail = "theta = 2: max ratio " + num(ra) + " <= 0.55 over 5 pairs; theta = 4: max ratio " + num(rb) + " <= 0.3";
  return out;
}

Verdict criterion_4() {
  const harness::RunReport r = run_catalog("pure-decay");
  const double worst = r.value("max_rel_error");
  const bool decays = r.value("decays") == 1.0;
  Verdict out;
  out.pass = worst <= 0.01 && decays;
  out.detail = "max |Y0(T) - e^-T| / e^-T over T in {1, 2, 4} = " + num(worst) + " <= 0.01, decays " +
               (decays ? "yes" : "no") + ", xi = 1";
  std::string row = "Y0(T):";
  for (const char* T : {"1", "2", "4"}) {
    const harness::Output* o = r.find(std::string("y0_") + T);
    if (o) row += std::string(" T=") + T + " " + num(o->value);
  }
  out.notes.push_back(row);
  return out;
}

Verdict criterion_5() {
  const auto start = Clock::now();
  const harness::RunReport r = run_catalog("fk-heat");
  const double elapsed = seconds_since(start);
  const bool within = r.value("within") == 1.0, growth = r.value("growth_pass") == 1.0;
  Verdict out;
  out.pass = within && growth && elapsed < 120.0;
  out.detail = std::string("9 points |u_FD - u_BSDE| <= 0.05 + 3 se: ") + (within ? "yes" : "no") + " (max " +
               num(r.value("max_abs_diff")) + "), growth (C, q) = (2, 2): " + (growth ? "yes" : "no") +
               ", runtime " + fmt("%.1f", elapsed) + " s < 120 s";
  return out;
}

Verdict criterion_6() {
  const harness::RunReport r = run_catalog("fk-elliptic-harmonic");
  const harness::Json cfg = harness::catalog_config("fk-elliptic-harmonic");
  const bool points_ok = cfg["points"] == harness::Json::array({-0.5, 0.0, 0.5});
  const bool within = r.value("within") == 1.0;
  Verdict out;
  out.pass = within && points_ok;
  std::string rows;
  for (int i = 0; i < 3; ++i) {
    const harness::Output* o = r.find("u_bsde_" + std::to_string(i));
    if (o) rows += (i ? ", " : "") + num(o->value) + " (se " + num(o->se) + ")";
  }
  out.detail = "u(x) = x at x in {-0.5, 0, 0.5}: " + rows + "; within 0.05 + 3 se: " + (within ? "yes" : "no");
  return out;
}

Verdict criterion_7() {
  const harness::RunReport r = run_catalog("utility-worst-case");
  const harness::Output* u = r.find("u_bsde");
  const harness::Output* best = r.find("best_constant_value");
  const double q = r.value("best_constant_q");
  const double gap = r.value("optimum_gap");
  const bool axioms = r.value("axioms_pass") == 1.0;
  const bool u_ok = std::abs(u->value + 0.5) <= 0.02;
  const bool dual_ok = std::abs(q + 0.5) <= 1e-9 && std::abs(best->value + 0.5) <= 3.0 * best->se;
  const bool gap_ok = std::abs(gap) <= 0.02;
  Verdict out;
  out.pass = u_ok && dual_ok && gap_ok && axioms;
  out.detail = "U0(B_T) = " + num(u->value) + " within 0.02 of -0.5; best constant q = " + num(q) + " with value " +
               num(best->value) + " (se " + num(best->se) + "); |dual(q~) - U0| = " + num(std::abs(gap)) +
               " <= 0.02; axioms " + (axioms ? "pass" : "fail");
  return out;
}

Verdict criterion_8() {
  const harness::RunReport r = run_catalog("sup-margin");
  const harness::Output* s1 = r.find("sup_moment_1");
  const harness::Output* s2 = r.find("sup_moment_2");
  const harness::Output* t2 = r.find("terminal_moment_2");
  const harness::Output* paired = r.find("paired_difference_2");
  const double doob = r.value("doob_constant_2");
  const double combined = std::hypot(s2->se, t2->se);
  const bool bounded = s2->value <= t2->value + 3.0 * combined;
  const bool below = s2->value < s1->value;
  Verdict out;
  out.pass = bounded && below;
  out.detail = "theta' = 2: E[sup e^{2 int rho} y^2] = " + num(s2->value) + " vs RHS E[e^{2 int rho} xi^2] = " +
               num(t2->value) + " + 3 se " + num(3.0 * combined) + (bounded ? " (bounded)" : " (exceeds)") +
               "; theta' = 1 estimate " + num(s1->value) + (below ? " (theta' = 2 below)" : " (theta' = 2 not below)");
  const double doob_rhs = doob * t2->value;
  out.notes.push_back("with the Doob factor (r/(r-1))^r = " + num(doob) + ": " + num(s2->value) +
                      (s2->value <= doob_rhs + 3.0 * doob * combined ? " <= " : " > ") + num(doob_rhs));
  out.notes.push_back("same-sample sup(theta' = 2) - sup(theta' = 1) = " + num(paired->value) + " (se " +
                      num(paired->se) + "); rho grows with theta', so the heavier weight dominates path-wise");
  return out;
}

Verdict criterion_9() {
  const harness::RunReport r = run_catalog("truncation-cauchy");
  const bool mono = r.value("nonincreasing") == 1.0;
  const double last_over_first = r.value("last_over_first");
  Verdict out;
  out.pass = mono && last_over_first <= 0.25;
  std::string row;
  for (const char* n : {"1", "2", "4", "8"}) {
    const harness::Output* o = r.find(std::string("dy_") + n);
    if (o) row += std::string(row.empty() ? "" : ", ") + num(o->value);
  }
  out.detail = "||y^{2n} - y^n||_{S^2;0} for n = 1, 2, 4, 8: " + row + "; non-increasing " +
               (mono ? "yes" : "no") + ", last / first " + num(last_over_first) + " <= 0.25";
  return out;
}

Verdict criterion_10() {
  Verdict out;
  const Captured props = shell(std::string(BSDELAB_PROPERTIES) + " --no-intro 2>&1");
  std::string summary;
  for (std::size_t pos = 0; (pos = props.out.find("[doctest] test cases:", pos)) != std::string::npos; ++pos)
    summary = props.out.substr(pos, props.out.find('\n', pos) - pos);
  std::size_t failed_at = 0;
  while ((failed_at = props.out.find("TEST CASE:", failed_at)) != std::string::npos) {
    const std::size_t end = props.out.find('\n', failed_at);
    std::string name = props.out.substr(failed_at + 10, end - failed_at - 10);
    while (!name.empty() && name.front() == ' ') name.erase(0, 1);
    out.notes.push_back("failing property: " + name);
    failed_at = end;
  }

  bool deterministic = true;
  std::string first;
  for (const char* jobs : {"1", "1", "4", "4"}) {
    const Captured c = shell(std::string(BSDELAB_CLI) + " catalog run piecewise-exp --format structured-records --jobs " +
                             jobs + " 2>/dev/null");
    if (first.empty()) first = c.out;
    deterministic = deterministic && c.status == 0 && c.out == first && !c.out.empty();
  }
  out.pass = props.status == 0 && deterministic;
  out.detail = "property suites exit " + std::to_string(props.status) + " (" + summary.substr(summary.find(':') + 1) +
               "); report bytes identical across 2 runs x --jobs {1, 4}: " + (deterministic ? "yes" : "no");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "criterion number 1..10 (default: all)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::function<Verdict()> criteria[] = {criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                                               criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};
  bool all = true;
  for (int n = 1; n <= 10; ++n) {
    if (only != 0 && n != only) continue;
    Verdict v;
    try {
      v = criteria[n - 1]();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("error: ") + e.what();
    }
    std::printf("criterion %2d: %s  %s\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    for (const std::string& note : v.notes) std::printf("    note: %s\n", note.c_str());
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
