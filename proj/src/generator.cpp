#include "bsdelab/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bsdelab/rng.hpp"

namespace bsdelab {
namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

GeneratorSpec scalar_generator(std::string name,
                               std::function<double(double, std::span<const double>, double, double)> g,
                               CoefficientSpec coeffs) {
  GeneratorSpec spec;
  spec.name = std::move(name);
  spec.coeffs = std::move(coeffs);
  spec.g = [g = std::move(g)](const NodeView& node, std::span<const double> y,
                              std::span<const double> z, std::span<double> out) {
    out[0] = g(node.t, node.x, y[0], z[0]);
  };
  return spec;
}

EnvelopeProbeReport probe_envelopes(const GeneratorSpec& gen, const PathBatch& batch,
                                    std::size_t n_probes, std::uint64_t seed, double tolerance) {
  static constexpr double kScales[] = {0.25, 1.0, 4.0};
  const std::size_t k = gen.k, kd = gen.k * gen.d;
  EnvelopeProbeReport report;
  report.n_probes = n_probes;
  report.worst_monotonicity = -std::numeric_limits<double>::infinity();
  report.worst_lipschitz = -std::numeric_limits<double>::infinity();
  report.worst_growth = -std::numeric_limits<double>::infinity();
  std::vector<double> y1(k), y2(k), z1(kd), z2(kd), zero_y(k, 0.0), zero_z(kd, 0.0);
  std::vector<double> g1(k), g2(k), g0(k);
  for (std::size_t n = 0; n < n_probes; ++n) {
    PathStream s(seed, n);
    double u2 = 0.0;
    const double u1 = s.uniform_pair(u2);
    const std::size_t i = std::min(batch.n_paths - 1, static_cast<std::size_t>(u1 * batch.n_paths));
    const std::size_t stop = batch.stop_index[i];
    const std::size_t j = std::min(stop, static_cast<std::size_t>(u2 * (stop + 1)));
    const NodeView node{batch.grid.times[j], i, j, batch.state_row(i, j)};
    const double scale = kScales[n % 3];
    for (auto* v : {&y1, &y2})
      for (double& e : *v) e = scale * s.normal();
    for (auto* v : {&z1, &z2})
      for (double& e : *v) e = scale * s.normal();
    const double mu = gen.coeffs.mu(node.t, node.x);
    const double nu = gen.coeffs.nu(node.t, node.x);

    gen.g(node, y1, z1, g1);
    gen.g(node, y2, z1, g2);
    // Differences of large generator values carry round-off of order
    // eps * |g|, so the allowance scales with the magnitudes involved.
    double inner = 0.0, dy2 = 0.0, gmag = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      inner += (y1[c] - y2[c]) * (g1[c] - g2[c]);
      dy2 += (y1[c] - y2[c]) * (y1[c] - y2[c]);
      gmag += std::abs(g1[c]) + std::abs(g2[c]);
    }
    const double mono = inner - mu * dy2;
    report.worst_monotonicity = std::max(report.worst_monotonicity, mono);
    if (!(mono <= tolerance * (1.0 + std::abs(inner) + std::abs(mu * dy2) + std::sqrt(dy2) * gmag)))
      report.monotone = false;

    gen.g(node, y1, z2, g2);
    std::vector<double> dg(k);
    for (std::size_t c = 0; c < k; ++c) dg[c] = g1[c] - g2[c];
    std::vector<double> dz(kd);
    for (std::size_t c = 0; c < kd; ++c) dz[c] = z1[c] - z2[c];
    const double lhs = norm2(dg), rhs = nu * norm2(dz);
    report.worst_lipschitz = std::max(report.worst_lipschitz, lhs - rhs);
    if (!(lhs - rhs <= tolerance * (1.0 + lhs + rhs + norm2(g1) + norm2(g2)))) report.lipschitz = false;

    if (gen.growth) {
      gen.g(node, y1, zero_z, g1);
      gen.g(node, zero_y, zero_z, g0);
      for (std::size_t c = 0; c < k; ++c) dg[c] = g1[c] - g0[c];
      const double a = norm2(dg), b = gen.growth(node.t, norm2(y1));
      report.worst_growth = std::max(report.worst_growth, a - b);
      if (!(a - b <= tolerance * (1.0 + a + b))) report.growth_ok = false;
    }
  }
  return report;
}

void truncate_radial(std::span<double> x, double r) {
  const double n = norm2(x);
  if (n <= r) return;
  const double f = r / n;
  for (double& v : x) v *= f;
}

double truncate_radial(double x, double r) { return x * r / std::max(std::abs(x), r); }

GeneratorSpec truncated_generator(const GeneratorSpec& gen, double n,
                                  std::shared_ptr<const Field> rho_integral) {
  GeneratorSpec out = gen;
  out.name = gen.name + "~trunc";
  const std::size_t k = gen.k, kd = gen.k * gen.d;
  out.g = [inner = gen.g, n, rho_integral, k, kd](const NodeView& node, std::span<const double> y,
                                                   std::span<const double> z, std::span<double> res) {
    std::vector<double> zero_y(k, 0.0), zero_z(kd, 0.0), g00(k);
    inner(node, zero_y, zero_z, g00);
    inner(node, y, z, res);
    const double gamma = std::exp(-rho_integral->at(node.path, node.node));
    for (std::size_t c = 0; c < k; ++c) res[c] -= g00[c];
    truncate_radial(g00, n * std::exp(-node.t) * gamma);
    for (std::size_t c = 0; c < k; ++c) res[c] += g00[c];
  };
  return out;
}

std::vector<double> truncated_terminal(std::span<const double> xi, std::size_t k, double n,
                                       const Field& rho_integral, const PathBatch& batch) {
  std::vector<double> out(xi.begin(), xi.end());
  for (std::size_t i = 0; i < batch.n_paths; ++i) {
    const double gamma = std::exp(-rho_integral.at(i, batch.stop_index[i]));
    truncate_radial(std::span<double>(out.data() + i * k, k), n * gamma);
  }
  return out;
}

}  // namespace bsdelab
