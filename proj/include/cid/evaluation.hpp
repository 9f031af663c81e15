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

// Explanation quality measures: faithfulness (comprehensiveness and
// sufficiency under mean-value masking) and top-k feature agreement between
// two explanations, plus mean +/- 2 sigma / sqrt(n) aggregation.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "cid/matrix.hpp"
#include "cid/model.hpp"
#include "cid/numeric.hpp"

namespace cid {

// Any explainer's per-feature scores for one instance. Features are ordered
// by |score|.
struct Explanation {
  long instance_id = 0;
  std::vector<double> scores;
};

// Class-conditional model output f(z) = P(y = M(x) | z) along the masking
// paths. removal[l] masks the l most important features; insertion[l] keeps
// only them. Both have d + 1 entries.
struct FaithfulnessCurve {
  int predicted_label = 0;
  double f_x = 0.0;
  std::vector<double> removal;
  std::vector<double> insertion;

  double comprehensiveness() const {
    double total = 0.0;
    for (double v : removal) total += f_x - v;
    return total / static_cast<double>(removal.size());
  }
  double sufficiency() const {
    double total = 0.0;
    for (double v : insertion) total += f_x - v;
    return total / static_cast<double>(insertion.size());
  }
};

namespace detail {

inline void check_explanation(std::span<const double> x, const Explanation& e,
                              const Classifier& model, std::span<const double> means) {
  if (e.scores.size() != x.size() || means.size() != x.size() || model.dim() != x.size()) {
    throw std::invalid_argument("faithfulness: dimension mismatch (x " + std::to_string(x.size()) +
                                ", scores " + std::to_string(e.scores.size()) + ", means " +
                                std::to_string(means.size()) + ", model " +
                                std::to_string(model.dim()) + ")");
  }
  for (double s : e.scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("explanation scores must be finite");
  }
}

}  // namespace detail

inline FaithfulnessCurve faithfulness_curve(std::span<const double> x, const Explanation& e,
                                            const Classifier& model,
                                            std::span<const double> means) {
  detail::check_explanation(x, e, model, means);
  const std::size_t d = x.size();
  const auto order = order_by_score(e.scores, /*by_magnitude=*/true);

  // Rows 0..d: removal path; rows d+1..2d+1: insertion path.
  RowMatrix batch(2 * (d + 1), d);
  for (std::size_t l = 0; l <= d; ++l) {
    auto removed = batch.row(l);
    auto inserted = batch.row(d + 1 + l);
    std::copy(x.begin(), x.end(), removed.begin());
    std::copy(means.begin(), means.end(), inserted.begin());
    for (std::size_t t = 0; t < l; ++t) {
      removed[order[t]] = means[order[t]];
      inserted[order[t]] = x[order[t]];
    }
  }
  const auto p = model.predict_proba_batch(batch);
  FaithfulnessCurve curve;
  // removal[0] is x itself.
  curve.predicted_label = label_from_proba(p[0]);
  auto f = [&](double proba) { return curve.predicted_label == 1 ? proba : 1.0 - proba; };
  curve.f_x = f(p[0]);
  for (std::size_t l = 0; l <= d; ++l) {
    curve.removal.push_back(f(p[l]));
    curve.insertion.push_back(f(p[d + 1 + l]));
  }
  return curve;
}

// (1 / (d + 1)) * sum_{l=0..d} f(x) - f(x with top-l features masked).
// Larger is better.
inline double comprehensiveness(std::span<const double> x, const Explanation& e,
                                const Classifier& model, std::span<const double> means) {
  return faithfulness_curve(x, e, model, means).comprehensiveness();
}

// (1 / (d + 1)) * sum_{l=0..d} f(x) - f(x with only top-l features kept).
// Smaller is better.
inline double sufficiency(std::span<const double> x, const Explanation& e,
                          const Classifier& model, std::span<const double> means) {
  return faithfulness_curve(x, e, model, means).sufficiency();
}

// Top-k feature indices by |score|, ties by ascending index.
inline std::vector<std::size_t> top_features(std::span<const double> scores, std::size_t top_k) {
  if (top_k < 1 || top_k > scores.size()) {
    throw std::invalid_argument("top_k must lie in [1, " + std::to_string(scores.size()) +
                                "], got " + std::to_string(top_k));
  }
  auto order = order_by_score(scores, /*by_magnitude=*/true);
  order.resize(top_k);
  return order;
}

// |TF(a, k) ∩ TF(b, k)| / k
inline double feature_agreement(const Explanation& a, const Explanation& b, std::size_t top_k) {
  if (a.scores.size() != b.scores.size()) {
    throw std::invalid_argument("feature_agreement: explanations differ in length");
  }
  auto ta = top_features(a.scores, top_k);
  auto tb = top_features(b.scores, top_k);
  std::sort(ta.begin(), ta.end());
  std::sort(tb.begin(), tb.end());
  std::vector<std::size_t> common;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(top_k);
}

struct Aggregate {
  double mean = 0.0;
  double ci = 0.0;  // 2 * population sigma / sqrt(n)
  std::size_t n = 0;
};

inline Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate of an empty sample");
  Aggregate a;
  a.n = values.size();
  a.mean = mean(values);
  a.ci = 2.0 * stddev(values, 0) / std::sqrt(static_cast<double>(a.n));
  return a;
}

struct InstanceFaithfulness {
  long instance_id = 0;
  double comprehensiveness = 0.0;
  double sufficiency = 0.0;
};

struct EvaluationReport {
  std::vector<InstanceFaithfulness> per_instance;
  double mean_comp = 0.0;
  double mean_suff = 0.0;
  double ci_comp = 0.0;
  double ci_suff = 0.0;
  std::size_t n = 0;
};

inline EvaluationReport make_report(std::vector<InstanceFaithfulness> per_instance) {
  EvaluationReport r;
  std::vector<double> comp, suff;
  for (const auto& p : per_instance) {
    comp.push_back(p.comprehensiveness);
    suff.push_back(p.sufficiency);
  }
  const Aggregate ac = aggregate(comp);
  const Aggregate as = aggregate(suff);
  r.per_instance = std::move(per_instance);
  r.mean_comp = ac.mean;
  r.ci_comp = ac.ci;
  r.mean_suff = as.mean;
  r.ci_suff = as.ci;
  r.n = ac.n;
  return r;
}

}  // namespace cid
