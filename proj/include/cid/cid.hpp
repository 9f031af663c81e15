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

// Counterfactual Importance Distribution.
//
// For one instance: generate C+ and C-, fit a KDE to each feature's column in
// both sets on a shared grid, and score the feature by d_k between the two
// densities. Larger scores mean the feature separates label-flipping from
// label-keeping perturbations more clearly.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cid/counterfactual.hpp"
#include "cid/dataset.hpp"
#include "cid/density.hpp"
#include "cid/metric.hpp"
#include "cid/model.hpp"
#include "cid/numeric.hpp"

namespace cid {

struct CidConfig {
  KernelKind kernel = KernelKind::gaussian;
  CfConfig cf;
  std::size_t n_grid = kDefaultGridPoints;
  double grid_pad = kDefaultGridPad;  // in bandwidth multiples
  double k = 1.0;
  std::size_t repeats = 1;

  void validate(std::size_t d) const {
    cf.validate(d);
    if (n_grid < 2) throw std::invalid_argument("n_grid must be at least 2");
    if (!(grid_pad >= 0.0) || !std::isfinite(grid_pad)) {
      throw std::invalid_argument("grid_pad must be a nonnegative finite value");
    }
    if (!(k >= 1.0) || !std::isfinite(k)) throw std::invalid_argument("k must be finite and >= 1");
    if (repeats < 1) throw std::invalid_argument("repeats must be at least 1");
  }
};

struct FeatureDensities {
  DensityEstimate positive;
  DensityEstimate negative;
  DissimilarityResult result;
};

// Everything computed in one repeat, kept for audit dumps.
struct RepeatTrace {
  std::uint64_t seed = 0;
  CounterfactualSets sets;
  std::vector<FeatureDensities> features;
};

struct ImportanceVector {
  std::vector<double> scores;  // column means of per_repeat
  std::vector<std::string> feature_names;
  RowMatrix per_repeat;  // repeats x d
  CidConfig config;
  std::vector<std::uint64_t> seeds;  // counterfactual seed of each repeat
};

// d_k between the KDEs of C+ and C- for one feature.
inline FeatureDensities score_feature(std::span<const double> positive,
                                      std::span<const double> negative,
                                      const FeatureSpec& feature, const CidConfig& cfg) {
  const double h_pos = silverman_bandwidth(positive, feature.range());
  const double h_neg = silverman_bandwidth(negative, feature.range());
  const auto grid = make_grid(positive, negative, h_pos, h_neg, cfg.n_grid, cfg.grid_pad);
  FeatureDensities fd;
  fd.positive = kde_evaluate(positive, cfg.kernel, h_pos, grid);
  fd.negative = kde_evaluate(negative, cfg.kernel, h_neg, grid);
  try {
    fd.result = dissimilarity_grid(fd.positive, fd.negative, cfg.k);
  } catch (const NumericalError& e) {
    throw NumericalError("feature '" + feature.name +
                         "': both densities vanish on the grid (internal inconsistency): " +
                         e.what());
  }
  return fd;
}

// Per-feature scores for one pair of counterfactual sets.
inline std::vector<double> score_sets(const CounterfactualSets& sets,
                                      const DatasetTable& table, const CidConfig& cfg,
                                      std::vector<FeatureDensities>* densities = nullptr) {
  std::vector<double> scores(table.d());
  if (densities) densities->clear();
  for (std::size_t j = 0; j < table.d(); ++j) {
    const auto pos = sets.positives.column(j);
    const auto neg = sets.negatives.column(j);
    FeatureDensities fd = score_feature(pos, neg, table.feature(j), cfg);
    scores[j] = fd.result.d_value;
    if (densities) densities->push_back(std::move(fd));
  }
  return scores;
}

// Importance of every feature for instance x. Repeat r draws counterfactuals
// with seed cfg.cf.seed ^ r; KDE and metric are deterministic, so identical
// inputs give bit-identical output.
inline ImportanceVector explain(std::span<const double> x, const Classifier& model,
                                const DatasetTable& table, const CidConfig& cfg,
                                std::vector<RepeatTrace>* trace = nullptr) {
  cfg.validate(table.d());
  ImportanceVector iv;
  iv.feature_names = table.feature_names();
  iv.config = cfg;
  iv.per_repeat = RowMatrix(table.d());
  if (trace) trace->clear();
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    CfConfig cf = cfg.cf;
    cf.seed = cfg.cf.seed ^ static_cast<std::uint64_t>(r);
    CounterfactualSets sets = generate_counterfactuals(x, model, table, cf);
    std::vector<FeatureDensities> densities;
    const auto scores = score_sets(sets, table, cfg, trace ? &densities : nullptr);
    iv.per_repeat.append_row(scores);
    iv.seeds.push_back(cf.seed);
    if (trace) trace->push_back({cf.seed, std::move(sets), std::move(densities)});
  }
  iv.scores.assign(table.d(), 0.0);
  for (std::size_t r = 0; r < iv.per_repeat.rows(); ++r) {
    for (std::size_t j = 0; j < table.d(); ++j) iv.scores[j] += iv.per_repeat(r, j);
  }
  for (double& s : iv.scores) s /= static_cast<double>(iv.per_repeat.rows());
  return iv;
}

// Indices of the top_k scores, descending, ties by ascending index.
inline std::vector<std::size_t> rank(std::span<const double> scores, std::size_t top_k) {
  if (top_k < 1 || top_k > scores.size()) {
    throw std::invalid_argument("top_k must lie in [1, " + std::to_string(scores.size()) +
                                "], got " + std::to_string(top_k));
  }
  auto order = order_by_score(scores, /*by_magnitude=*/false);
  order.resize(top_k);
  return order;
}

inline std::vector<std::size_t> rank(const ImportanceVector& iv, std::size_t top_k) {
  return rank(iv.scores, top_k);
}

}  // namespace cid
