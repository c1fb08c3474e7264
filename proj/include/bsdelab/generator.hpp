#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bsdelab/coefficients.hpp"
#include "bsdelab/paths.hpp"

namespace bsdelab {

/// g(t, x, y, z) -> out[k]. `z` is [k x d] row-major.
using GeneratorFn = std::function<void(const NodeView& node, std::span<const double> y,
                                       std::span<const double> z, std::span<double> out)>;

/// A generator with its declared envelopes: coeffs.mu bounds the monotonicity
/// in y, coeffs.nu the Lipschitz constant in z, `growth` (optional) bounds
/// sup_{|y| <= r} |g(t,y,0) - g(t,0,0)|.
struct GeneratorSpec {
  std::string name;
  std::size_t k = 1;
  std::size_t d = 1;
  GeneratorFn g;
  CoefficientSpec coeffs;
  std::function<double(double t, double r)> growth;
};

/// Scalar generator from a closure g(t, x, y, z) with k = d = 1.
GeneratorSpec scalar_generator(std::string name,
                               std::function<double(double, std::span<const double>, double, double)> g,
                               CoefficientSpec coeffs);

struct EnvelopeProbeReport {
  std::size_t n_probes = 0;
  /// max of <dy, dg> - mu |dy|^2 over probes (<= tolerance means the bound holds)
  double worst_monotonicity = 0.0;
  /// max of |g(z1) - g(z2)| - nu |dz|
  double worst_lipschitz = 0.0;
  /// max of |g(t,y,0) - g(t,0,0)| - psi(t, |y|), when growth is declared
  double worst_growth = 0.0;
  bool monotone = true;
  bool lipschitz = true;
  bool growth_ok = true;
  bool pass() const { return monotone && lipschitz && growth_ok; }
};

/// Random probes of the declared envelopes at nodes sampled from `batch`.
/// Probe coordinates are standard normals times a scale cycling through
/// {0.25, 1, 4}. A bound counts as violated when the excess is above
/// tolerance * (1 + magnitude of the terms).
EnvelopeProbeReport probe_envelopes(const GeneratorSpec& gen, const PathBatch& batch,
                                    std::size_t n_probes, std::uint64_t seed,
                                    double tolerance = 1e-9);

/// q_r(x) = x r / (|x| v r), applied to a vector in place.
void truncate_radial(std::span<double> x, double r);
double truncate_radial(double x, double r);

/// g - g(t,0,0) + q_{n e^{-t} gamma_t}(g(t,0,0)) with gamma_t = e^{-int_0^t rho}.
/// `rho_integral` must outlive the returned generator's use on the same batch.
GeneratorSpec truncated_generator(const GeneratorSpec& gen, double n,
                                  std::shared_ptr<const Field> rho_integral);

/// xi_n = q_{n gamma_tau}(xi), row-wise over [n_paths x k].
std::vector<double> truncated_terminal(std::span<const double> xi, std::size_t k, double n,
                                       const Field& rho_integral, const PathBatch& batch);

}  // namespace bsdelab
