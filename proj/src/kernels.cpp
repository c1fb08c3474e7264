#include "bsdelab/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bsdelab/rng.hpp"

namespace bsdelab::kernels {
namespace {

std::size_t block_count(std::size_t n) { return (n + kReductionBlock - 1) / kReductionBlock; }

// Pairwise tree over `n_blocks` partial vectors of `width` entries each;
// the total ends up in partials[0 .. width).
void tree_reduce(std::vector<double>& partials, std::size_t n_blocks, std::size_t width) {
  for (std::size_t stride = 1; stride < n_blocks; stride *= 2) {
    for (std::size_t b = 0; b + stride < n_blocks; b += 2 * stride) {
      double* dst = partials.data() + b * width;
      const double* src = partials.data() + (b + stride) * width;
      for (std::size_t w = 0; w < width; ++w) dst[w] += src[w];
    }
  }
}

std::size_t packed_size(std::size_t n_cols) { return n_cols * (n_cols + 1) / 2; }

void accumulate_rows(const double* design, std::size_t n_cols, const double* targets,
                     std::size_t n_targets, std::size_t begin, std::size_t end, double* packed,
                     double* rhs) {
  for (std::size_t i = begin; i < end; ++i) {
    const double* row = design + i * n_cols;
    const double* y = targets + i * n_targets;
    std::size_t p = 0;
    for (std::size_t a = 0; a < n_cols; ++a) {
      const double ra = row[a];
      for (std::size_t b = a; b < n_cols; ++b) packed[p++] += ra * row[b];
      for (std::size_t t = 0; t < n_targets; ++t) rhs[a * n_targets + t] += ra * y[t];
    }
  }
}

void unpack_gram(const double* packed, std::size_t n_cols, std::span<double> gram) {
  std::size_t p = 0;
  for (std::size_t a = 0; a < n_cols; ++a) {
    for (std::size_t b = a; b < n_cols; ++b) {
      gram[a * n_cols + b] = packed[p];
      gram[b * n_cols + a] = packed[p];
      ++p;
    }
  }
}

}  // namespace

namespace parallel {

double sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  const std::size_t n_blocks = block_count(n);
  std::vector<double> partials(n_blocks, 0.0);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const std::size_t end = std::min(n, (b + 1) * kReductionBlock);
    double s = 0.0;
    for (std::size_t i = b * kReductionBlock; i < end; ++i) s += values[i];
    partials[b] = s;
  }
  tree_reduce(partials, n_blocks, 1);
  return partials[0];
}

Estimate mean(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return {};
  const double m = sum(values) / static_cast<double>(n);
  if (n == 1) return {m, 0.0};
  std::vector<double> sq(n);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < n; ++i) sq[i] = (values[i] - m) * (values[i] - m);
  const double var = sum(sq) / static_cast<double>(n - 1);
  return {m, std::sqrt(var / static_cast<double>(n))};
}

double log_mean_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  double top = -std::numeric_limits<double>::infinity();
  for (double v : values) top = std::max(top, v);
  if (!std::isfinite(top)) return top;
  std::vector<double> shifted(values.size());
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < values.size(); ++i) shifted[i] = std::exp(values[i] - top);
  return top + std::log(sum(shifted) / static_cast<double>(values.size()));
}

void fill_normals(std::uint64_t seed, std::uint64_t first_path, std::size_t n_paths,
                  std::size_t per_path, std::span<double> out) {
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < n_paths; ++i) {
    PathStream stream(seed, first_path + i);
    double* dst = out.data() + i * per_path;
    for (std::size_t k = 0; k < per_path; ++k) dst[k] = stream.normal();
  }
}

void normal_equations(std::span<const double> design, std::size_t n_cols,
                      std::span<const double> targets, std::size_t n_targets,
                      std::span<double> gram, std::span<double> rhs) {
  const std::size_t n_rows = n_cols == 0 ? 0 : design.size() / n_cols;
  const std::size_t width = packed_size(n_cols) + n_cols * n_targets;
  const std::size_t n_blocks = std::max<std::size_t>(1, block_count(n_rows));
  std::vector<double> partials(n_blocks * width, 0.0);
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t b = 0; b < n_blocks; ++b) {
    double* packed = partials.data() + b * width;
    const std::size_t end = std::min(n_rows, (b + 1) * kReductionBlock);
    accumulate_rows(design.data(), n_cols, targets.data(), n_targets, b * kReductionBlock, end,
                    packed, packed + packed_size(n_cols));
  }
  tree_reduce(partials, n_blocks, width);
  unpack_gram(partials.data(), n_cols, gram);
  std::copy_n(partials.data() + packed_size(n_cols), n_cols * n_targets, rhs.begin());
}

void predict(std::span<const double> design, std::size_t n_cols, std::span<const double> coef,
             std::size_t n_targets, std::span<double> out) {
  const std::size_t n_rows = n_cols == 0 ? 0 : design.size() / n_cols;
#pragma omp parallel for schedule(static) num_threads(jobs())
  for (std::size_t i = 0; i < n_rows; ++i) {
    const double* row = design.data() + i * n_cols;
    for (std::size_t t = 0; t < n_targets; ++t) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n_cols; ++c) acc += row[c] * coef[c * n_targets + t];
      out[i * n_targets + t] = acc;
    }
  }
}

}  // namespace parallel

namespace reference {

double sum(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

Estimate mean(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return {};
  const double m = sum(values) / static_cast<double>(n);
  if (n == 1) return {m, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n))};
}

double log_mean_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  double top = -std::numeric_limits<double>::infinity();
  for (double v : values) top = std::max(top, v);
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double v : values) s += std::exp(v - top);
  return top + std::log(s / static_cast<double>(values.size()));
}

void fill_normals(std::uint64_t seed, std::uint64_t first_path, std::size_t n_paths,
                  std::size_t per_path, std::span<double> out) {
  for (std::size_t i = 0; i < n_paths; ++i) {
    PathStream stream(seed, first_path + i);
    for (std::size_t k = 0; k < per_path; ++k) out[i * per_path + k] = stream.normal();
  }
}

void normal_equations(std::span<const double> design, std::size_t n_cols,
                      std::span<const double> targets, std::size_t n_targets,
                      std::span<double> gram, std::span<double> rhs) {
  const std::size_t n_rows = n_cols == 0 ? 0 : design.size() / n_cols;
  std::fill(gram.begin(), gram.end(), 0.0);
  std::fill(rhs.begin(), rhs.end(), 0.0);
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t a = 0; a < n_cols; ++a) {
      for (std::size_t b = 0; b < n_cols; ++b)
        gram[a * n_cols + b] += design[i * n_cols + a] * design[i * n_cols + b];
      for (std::size_t t = 0; t < n_targets; ++t)
        rhs[a * n_targets + t] += design[i * n_cols + a] * targets[i * n_targets + t];
    }
  }
}

void predict(std::span<const double> design, std::size_t n_cols, std::span<const double> coef,
             std::size_t n_targets, std::span<double> out) {
  const std::size_t n_rows = n_cols == 0 ? 0 : design.size() / n_cols;
  for (std::size_t i = 0; i < n_rows; ++i)
    for (std::size_t t = 0; t < n_targets; ++t) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n_cols; ++c)
        acc += design[i * n_cols + c] * coef[c * n_targets + t];
      out[i * n_targets + t] = acc;
    }
}

}  // namespace reference

}  // namespace bsdelab::kernels
