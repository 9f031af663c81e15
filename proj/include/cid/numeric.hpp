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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace cid {

// Trapezoidal rule for samples y taken at abscissae x.
inline double trapezoid(std::span<const double> y, std::span<const double> x) {
  if (y.size() != x.size()) {
    throw std::invalid_argument("trapezoid: x and y differ in length");
  }
  double total = 0.0;
  for (std::size_t j = 1; j < x.size(); ++j) {
    total += 0.5 * (x[j] - x[j - 1]) * (y[j] + y[j - 1]);
  }
  return total;
}

inline double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of empty range");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Standard deviation with divisor n - ddof (two-pass).
inline double stddev(std::span<const double> v, std::size_t ddof = 0) {
  if (v.size() <= ddof) throw std::invalid_argument("stddev: too few values");
  const double mu = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - ddof));
}

// Quantile with linear interpolation between order statistics (type 7, the
// numpy/R default).
inline double quantile(std::span<const double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile of empty range");
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Indices ordered by descending score (or |score|), ties broken by ascending
// index. This is the single ordering rule used for ranking, top-k feature
// sets and masking order.
inline std::vector<std::size_t> order_by_score(std::span<const double> scores,
                                               bool by_magnitude) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto key = [&](std::size_t i) {
    return by_magnitude ? std::abs(scores[i]) : scores[i];
  };
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return key(a) > key(b);
  });
  return idx;
}

}  // namespace cid
