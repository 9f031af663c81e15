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

// Overlap of two nonnegative functions and the derived dissimilarity
//
//   o(p, q) = int_{supp p ∩ supp q} min(p, q) / int_{supp p ∪ supp q} max(p, q)
//   d_k(p, q) = k - o(p, q),  k >= 1.
//
// d_1 is a metric (a Jaccard distance on functions). Two evaluators are
// provided: trapezoidal quadrature on a shared grid, and exact integration of
// piecewise-constant functions, which serves as the reference for the grid
// version and for property checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "cid/density.hpp"
#include "cid/error.hpp"

namespace cid {

struct DissimilarityResult {
  double overlap = 0.0;
  double d_value = 0.0;
  double k = 1.0;
  double numerator = 0.0;    // integral of min over the support intersection
  double denominator = 0.0;  // integral of max over the support union
};

namespace detail {

inline void check_k(double k) {
  if (!(k >= 1.0) || !std::isfinite(k)) {
    throw std::invalid_argument("dissimilarity order k must be finite and >= 1");
  }
}

inline DissimilarityResult finish(double num, double den, double k) {
  if (!(den > 0.0)) {
    throw NumericalError("overlap undefined: both functions vanish on the integration domain");
  }
  DissimilarityResult r;
  r.numerator = num;
  r.denominator = den;
  r.k = k;
  r.overlap = std::clamp(num / den, 0.0, 1.0);
  r.d_value = k - r.overlap;
  return r;
}

}  // namespace detail

// Grid evaluator. The supports are the given masks; masked-out points
// contribute zero to the respective integrand. min/max are pointwise on the
// grid values (crossings are not interpolated).
inline DissimilarityResult dissimilarity_grid(std::span<const double> grid,
                                              std::span<const double> p,
                                              std::span<const double> q,
                                              const std::vector<bool>& p_support,
                                              const std::vector<bool>& q_support,
                                              double k = 1.0) {
  detail::check_k(k);
  const std::size_t n = grid.size();
  if (p.size() != n || q.size() != n || p_support.size() != n || q_support.size() != n) {
    throw std::invalid_argument("dissimilarity_grid: grid and value lengths differ");
  }
  std::vector<double> lower(n), upper(n);
  for (std::size_t j = 0; j < n; ++j) {
    lower[j] = (p_support[j] && q_support[j]) ? std::min(p[j], q[j]) : 0.0;
    upper[j] = (p_support[j] || q_support[j]) ? std::max(p[j], q[j]) : 0.0;
  }
  return detail::finish(trapezoid(lower, grid), trapezoid(upper, grid), k);
}

// Both estimates must live on the same grid (coordinates equal to 1e-12).
inline DissimilarityResult dissimilarity_grid(const DensityEstimate& p,
                                              const DensityEstimate& q, double k = 1.0) {
  if (p.grid.size() != q.grid.size()) {
    throw std::invalid_argument("dissimilarity_grid: grids have different lengths (" +
                                std::to_string(p.grid.size()) + " vs " +
                                std::to_string(q.grid.size()) + ")");
  }
  for (std::size_t j = 0; j < p.grid.size(); ++j) {
    if (std::abs(p.grid[j] - q.grid[j]) > 1e-12) {
      throw std::invalid_argument("dissimilarity_grid: grids differ at point " + std::to_string(j));
    }
  }
  return dissimilarity_grid(p.grid, p.values, q.values, p.support_mask, q.support_mask, k);
}

// Piecewise-constant function: heights[j] on [breakpoints[j],
// breakpoints[j + 1]), zero elsewhere.
struct StepFunction {
  std::vector<double> breakpoints;
  std::vector<double> heights;

  StepFunction() = default;
  StepFunction(std::vector<double> b, std::vector<double> h)
      : breakpoints(std::move(b)), heights(std::move(h)) {
    validate();
  }

  // c * 1_[a, b)
  static StepFunction indicator(double a, double b, double c = 1.0) {
    return StepFunction({a, b}, {c});
  }

  void validate() const {
    if (breakpoints.size() != heights.size() + 1 || heights.empty()) {
      throw std::invalid_argument("StepFunction needs s >= 1 heights and s + 1 breakpoints");
    }
    for (std::size_t j = 1; j < breakpoints.size(); ++j) {
      if (!(breakpoints[j] > breakpoints[j - 1])) {
        throw std::invalid_argument("StepFunction breakpoints must be strictly increasing");
      }
    }
    bool positive = false;
    for (double h : heights) {
      if (!(h >= 0.0) || !std::isfinite(h)) {
        throw std::invalid_argument("StepFunction heights must be finite and nonnegative");
      }
      positive = positive || h > 0.0;
    }
    if (!positive) throw std::invalid_argument("StepFunction must have a positive height");
  }

  double operator()(double x) const {
    if (x < breakpoints.front() || x >= breakpoints.back()) return 0.0;
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    return heights[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
  }

  double integral() const {
    double total = 0.0;
    for (std::size_t j = 0; j < heights.size(); ++j) {
      total += heights[j] * (breakpoints[j + 1] - breakpoints[j]);
    }
    return total;
  }
};

// Exact evaluator on the merged breakpoint partition. On every cell both
// functions are constant, so min/max integrate in closed form; supports only
// differ from {f > 0} on null sets.
inline DissimilarityResult dissimilarity_step(const StepFunction& p, const StepFunction& q,
                                              double k = 1.0) {
  detail::check_k(k);
  p.validate();
  q.validate();
  std::vector<double> cuts = p.breakpoints;
  cuts.insert(cuts.end(), q.breakpoints.begin(), q.breakpoints.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double width = cuts[j + 1] - cuts[j];
    // Cells are half-open on the left end, so the left edge is representative.
    const double pv = p(cuts[j]);
    const double qv = q(cuts[j]);
    if (pv > 0.0 && qv > 0.0) num += width * std::min(pv, qv);
    den += width * std::max(pv, qv);
  }
  return detail::finish(num, den, k);
}

}  // namespace cid
