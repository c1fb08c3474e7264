#pragma once

#include <cstddef>

namespace bsdelab {

/// Monte Carlo point estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Caps the number of OpenMP workers used by every kernel. Results never
/// depend on this value; only wall time does.
void set_jobs(int jobs);

/// Current worker cap. Defaults to $BSDELAB_JOBS when set, otherwise the
/// OpenMP default.
int jobs();

/// Rows per reduction block. Reductions sum each block sequentially and then
/// combine block partials with a pairwise tree, so the result is a function of
/// the data alone.
inline constexpr std::size_t kReductionBlock = 2048;

}  // namespace bsdelab
