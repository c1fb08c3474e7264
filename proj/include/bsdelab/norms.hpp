#pragma once

#include <span>
#include <string>

#include "bsdelab/parallel.hpp"
#include "bsdelab/paths.hpp"

namespace bsdelab {

/// Monte Carlo weighted norms with delta-method standard errors. Each takes
/// the running integral int_0^t rho (see running_integral) as `rho_integral`.
struct WeightedNormReport {
  Estimate terminal;  // ||xi||_{p;rho}
  Estimate sup;       // ||Y||_{p;rho,c}
  Estimate z;         // ||Z||_{p;rho}
};

/// (E[e^{p int_0^tau rho} |xi|^p])^{1/p}. `xi` is [n_paths x k] (Euclidean
/// norm per path). `scenario` names the offender in overflow errors.
Estimate weighted_terminal_norm(std::span<const double> xi, std::size_t k, const Field& rho_integral,
                                const PathBatch& batch, double p, const std::string& scenario = "");

/// Same norm from per-path log|xi| values, for payoffs whose magnitude alone
/// would overflow. -inf encodes xi = 0.
Estimate weighted_terminal_norm_log(std::span<const double> log_abs_xi, const Field& rho_integral,
                                    const PathBatch& batch, double p,
                                    const std::string& scenario = "");

/// (E[sup_{j <= stop} e^{p int_0^{t_j} rho} |Y_j|^p])^{1/p}.
Estimate weighted_sup_norm(const Field& Y, const Field& rho_integral, const PathBatch& batch,
                           double p, const std::string& scenario = "");

/// (E[(sum_{j < stop} e^{2 int_0^{t_j} rho} |Z_j|^2 dt_j)^{p/2}])^{1/p}.
Estimate weighted_z_norm(const Field& Z, const Field& rho_integral, const PathBatch& batch, double p,
                         const std::string& scenario = "");

/// Mean and standard error of exp(lw_i), assembled in log space. Returns the
/// result as (log value, relative standard error).
struct LogEstimate {
  double log_value = 0.0;
  double rel_se = 0.0;
};
LogEstimate log_space_mean(std::span<const double> log_terms);

/// Converts E[w] in log form to the p-th root with its delta-method SE.
Estimate pth_root(const LogEstimate& m, double p, const std::string& scenario);

}  // namespace bsdelab
