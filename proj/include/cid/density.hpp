/*
 * Copyright 2026 The CID Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Univariate kernel density estimation on a shared uniform grid.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cid/numeric.hpp"

namespace cid {

enum class KernelKind { gaussian, epanechnikov, exponential };

inline std::string_view to_string(KernelKind k) {
  switch (k) {
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::epanechnikov: return "epanechnikov";
    case KernelKind::exponential: return "exponential";
  }
  return "unknown";
}

inline KernelKind parse_kernel(std::string_view s) {
  if (s == "gaussian") return KernelKind::gaussian;
  if (s == "epanechnikov") return KernelKind::epanechnikov;
  if (s == "exponential") return KernelKind::exponential;
  throw std::invalid_argument("unknown kernel '" + std::string(s) +
                              "' (expected gaussian, epanechnikov or exponential)");
}

// Unit kernels; each is nonnegative and integrates to 1.
inline double kernel_value(KernelKind k, double u) {
  switch (k) {
    case KernelKind::gaussian:
      return std::exp(-0.5 * u * u) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
    case KernelKind::epanechnikov:
      return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelKind::exponential:
      return 0.5 * std::exp(-std::abs(u));
  }
  return 0.0;
}

// Grid points with density at or below this are outside the numeric support.
inline constexpr double kSupportThreshold = 1e-12;

inline constexpr double kDefaultGridPad = 3.0;
inline constexpr std::size_t kDefaultGridPoints = 512;

struct DensityEstimate {
  std::vector<double> grid;    // strictly increasing
  std::vector<double> values;  // >= 0
  double bandwidth = 0.0;
  KernelKind kernel = KernelKind::gaussian;
  std::vector<bool> support_mask;  // values > kSupportThreshold

  double integral() const { return trapezoid(values, grid); }
};

// Lower bound applied when the samples have no spread at all.
inline double bandwidth_floor(double feature_range) {
  return std::max(1e-6, 1e-3 * std::abs(feature_range));
}

// Silverman's rule h = 0.9 * min(s, IQR / 1.34) * m^(-1/5), with s the sample
// standard deviation. A zero IQR falls back to s; zero spread returns the
// floor for the feature's observed range.
inline double silverman_bandwidth(std::span<const double> samples, double feature_range) {
  if (samples.size() < 2) {
    throw std::invalid_argument("silverman_bandwidth needs at least 2 samples, got " +
                                std::to_string(samples.size()));
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw std::invalid_argument("silverman_bandwidth: non-finite sample");
  }
  const double s = stddev(samples, 1);
  const double iqr = quantile(samples, 0.75) - quantile(samples, 0.25);
  // Rounding in the mean leaves a ~1e-17 std on identical samples; treat
  // spread at that level as zero.
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  if (*mx - *mn <= 1e-12 * std::max(1.0, std::max(std::abs(*mn), std::abs(*mx)))) {
    return bandwidth_floor(feature_range);
  }
  double spread = std::min(s, iqr / 1.34);
  if (!(spread > 0.0)) spread = s;
  const double h = 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
  return h > 0.0 ? h : bandwidth_floor(feature_range);
}

// Uniform grid of n_grid points covering both sample sets padded by
// pad * max(h_a, h_b) on each side.
inline std::vector<double> make_grid(std::span<const double> samples_a,
                                     std::span<const double> samples_b, double h_a,
                                     double h_b, std::size_t n_grid,
                                     double pad = kDefaultGridPad) {
  if (n_grid < 2) throw std::invalid_argument("make_grid needs at least 2 points");
  if (samples_a.empty() && samples_b.empty()) {
    throw std::invalid_argument("make_grid needs at least one sample");
  }
  if (!(h_a > 0.0) || !(h_b > 0.0)) throw std::invalid_argument("make_grid: bandwidths must be positive");
  if (!(pad >= 0.0)) throw std::invalid_argument("make_grid: pad must be nonnegative");
  double lo = INFINITY, hi = -INFINITY;
  for (auto s : {samples_a, samples_b}) {
    for (double v : s) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double margin = pad * std::max(h_a, h_b);
  lo -= margin;
  hi += margin;
  if (!(hi > lo)) throw std::invalid_argument("make_grid: degenerate interval");
  std::vector<double> grid(n_grid);
  const double step = (hi - lo) / static_cast<double>(n_grid - 1);
  for (std::size_t j = 0; j < n_grid; ++j) grid[j] = lo + step * static_cast<double>(j);
  grid.back() = hi;
  return grid;
}

// values[j] = 1 / (m h) * sum_k K((grid[j] - samples[k]) / h)
inline DensityEstimate kde_evaluate(std::span<const double> samples, KernelKind kernel,
                                    double bandwidth, std::vector<double> grid) {
  if (samples.empty()) throw std::invalid_argument("kde_evaluate: no samples");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw std::invalid_argument("kde_evaluate: bandwidth must be positive, got " +
                                std::to_string(bandwidth));
  }
  for (std::size_t j = 1; j < grid.size(); ++j) {
    if (!(grid[j] > grid[j - 1])) throw std::invalid_argument("kde_evaluate: grid is not strictly increasing");
  }
  DensityEstimate est;
  est.bandwidth = bandwidth;
  est.kernel = kernel;
  est.values.resize(grid.size());
  est.support_mask.resize(grid.size());
  const double norm = 1.0 / (static_cast<double>(samples.size()) * bandwidth);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double acc = 0.0;
    for (double s : samples) acc += kernel_value(kernel, (grid[j] - s) / bandwidth);
    est.values[j] = acc * norm;
    est.support_mask[j] = est.values[j] > kSupportThreshold;
  }
  est.grid = std::move(grid);
  return est;
}

}  // namespace cid
