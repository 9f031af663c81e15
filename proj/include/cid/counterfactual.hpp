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

// Positive / negative counterfactual sets for one explained instance.
//
// A positive counterfactual flips the classifier's label for the instance; a
// negative one is a perturbed candidate that keeps it. Two generators are
// provided: sparse uniform redraws (the default) and a genetic search with a
// proximity-penalized fitness.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cid/dataset.hpp"
#include "cid/error.hpp"
#include "cid/log.hpp"
#include "cid/matrix.hpp"
#include "cid/model.hpp"
#include "cid/random.hpp"

namespace cid {

enum class CfMethod { random, genetic };

inline std::string_view to_string(CfMethod m) {
  return m == CfMethod::random ? "random" : "genetic";
}

inline CfMethod parse_cf_method(std::string_view s) {
  if (s == "random") return CfMethod::random;
  if (s == "genetic") return CfMethod::genetic;
  throw std::invalid_argument("unknown counterfactual method '" + std::string(s) +
                              "' (expected random or genetic)");
}

struct GeneticConfig {
  std::size_t population = 0;  // 0 means 4 * m
  std::size_t generations = 20;
  double lambda = 0.2;  // proximity weight
};

inline constexpr double kMutationRate = 0.1;

struct CfConfig {
  std::size_t m = 50;
  CfMethod method = CfMethod::random;
  std::optional<std::vector<std::size_t>> features_to_vary;  // default: all
  std::size_t max_attempts = 0;  // 0 means 200 * m
  std::size_t sparsity = 0;      // 0 means max(1, round(d / 3))
  GeneticConfig genetic;
  std::uint64_t seed = 0;

  std::vector<std::size_t> varied_features(std::size_t d) const {
    if (!features_to_vary) {
      std::vector<std::size_t> all(d);
      std::iota(all.begin(), all.end(), std::size_t{0});
      return all;
    }
    std::vector<std::size_t> v = *features_to_vary;
    std::sort(v.begin(), v.end());
    if (v.empty()) throw std::invalid_argument("features_to_vary is empty");
    if (std::adjacent_find(v.begin(), v.end()) != v.end()) {
      throw std::invalid_argument("features_to_vary contains duplicates");
    }
    if (v.back() >= d) {
      throw std::invalid_argument("features_to_vary index " + std::to_string(v.back()) +
                                  " out of range for d = " + std::to_string(d));
    }
    return v;
  }

  std::size_t resolved_sparsity(std::size_t d) const {
    if (sparsity > 0) return sparsity;
    const auto by_dim = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(d) / 3.0)));
    return std::min(by_dim, varied_features(d).size());
  }

  std::size_t resolved_max_attempts() const { return max_attempts > 0 ? max_attempts : 200 * m; }

  std::size_t resolved_population() const {
    return genetic.population > 0 ? genetic.population : 4 * m;
  }

  void validate(std::size_t d) const {
    if (m < 2) throw std::invalid_argument("counterfactual set size m must be at least 2");
    const std::size_t n_varied = varied_features(d).size();
    const std::size_t s = resolved_sparsity(d);
    if (s < 1 || s > n_varied) {
      throw std::invalid_argument("sparsity " + std::to_string(s) + " must lie in [1, " +
                                  std::to_string(n_varied) + "]");
    }
    if (method == CfMethod::genetic) {
      if (resolved_population() < 2 * m) {
        throw std::invalid_argument("genetic population " +
                                    std::to_string(resolved_population()) +
                                    " is smaller than 2m = " + std::to_string(2 * m));
      }
      if (!(genetic.lambda >= 0.0) || !std::isfinite(genetic.lambda)) {
        throw std::invalid_argument("genetic lambda must be a nonnegative finite value");
      }
    }
  }
};

struct CounterfactualSets {
  std::vector<double> instance;  // clamped into the feature ranges
  int original_label = 0;
  RowMatrix positives;  // m x d, label != original_label
  RowMatrix negatives;  // m x d, label == original_label
  CfMethod method_used = CfMethod::random;
  std::size_t attempts_used = 0;

  std::size_t m() const { return positives.rows(); }
  std::size_t d() const { return instance.size(); }
};

namespace detail {

inline std::vector<double> clamp_instance(std::span<const double> x,
                                          const DatasetTable& table) {
  if (x.size() != table.d()) {
    throw std::invalid_argument("instance has " + std::to_string(x.size()) +
                                " features, table has " + std::to_string(table.d()));
  }
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (!std::isfinite(out[j])) throw std::invalid_argument("instance is not finite");
    const auto& f = table.feature(j);
    const double c = std::clamp(out[j], f.min, f.max);
    if (c != out[j]) {
      log().warn("instance feature '{}' = {} outside [{}, {}], clamped", f.name, out[j],
                 f.min, f.max);
      out[j] = c;
    }
  }
  return out;
}

// Copy of x with `sparsity` distinct varied features redrawn uniformly from
// their [min, max] ranges.
inline void sparse_candidate(std::span<const double> x, const DatasetTable& table,
                             std::vector<std::size_t>& varied, std::size_t sparsity,
                             Rng& rng, std::span<double> out) {
  std::copy(x.begin(), x.end(), out.begin());
  // Partial Fisher-Yates: the first `sparsity` entries become the draw.
  for (std::size_t k = 0; k < sparsity; ++k) {
    const std::size_t pick = k + uniform_index(rng, varied.size() - k);
    std::swap(varied[k], varied[pick]);
    const auto& f = table.feature(varied[k]);
    out[varied[k]] = uniform_real(rng, f.min, f.max);
  }
}

inline std::string deficiency_message(std::string_view method, std::size_t attempts,
                                      std::size_t n_pos, std::size_t n_neg,
                                      std::size_t m) {
  std::string which;
  if (n_pos < m) which = "positive set C+ (" + std::to_string(n_pos) + "/" + std::to_string(m) + ")";
  if (n_neg < m) {
    if (!which.empty()) which += " and ";
    which += "negative set C- (" + std::to_string(n_neg) + "/" + std::to_string(m) + ")";
  }
  return std::string(method) + " counterfactual search exhausted after " +
         std::to_string(attempts) + " candidates: " + which +
         " incomplete; the instance may be far from or unable to cross the decision boundary";
}

}  // namespace detail

// Sparse uniform redraw: each candidate copies x, picks `sparsity` varied
// features uniformly and redraws them in [min, max]. Candidates fill C+ or C-
// in generation order until both hold m rows.
inline CounterfactualSets generate_random(std::span<const double> x,
                                          const Classifier& model,
                                          const DatasetTable& table,
                                          const CfConfig& cfg) {
  const std::size_t d = table.d();
  cfg.validate(d);
  if (model.dim() != d) {
    throw std::invalid_argument("model dimension " + std::to_string(model.dim()) +
                                " does not match table dimension " + std::to_string(d));
  }
  CounterfactualSets sets;
  sets.instance = detail::clamp_instance(x, table);
  sets.original_label = predict_label(model, sets.instance);
  sets.method_used = CfMethod::random;
  sets.positives = RowMatrix(d);
  sets.negatives = RowMatrix(d);
  sets.positives.reserve_rows(cfg.m);
  sets.negatives.reserve_rows(cfg.m);

  std::vector<std::size_t> varied = cfg.varied_features(d);
  const std::size_t sparsity = cfg.resolved_sparsity(d);
  const std::size_t budget = cfg.resolved_max_attempts();
  constexpr std::size_t kBatch = 256;
  Rng rng(cfg.seed);

  std::size_t attempts = 0;
  while (attempts < budget &&
         (sets.positives.rows() < cfg.m || sets.negatives.rows() < cfg.m)) {
    const std::size_t n = std::min(kBatch, budget - attempts);
    RowMatrix batch(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      detail::sparse_candidate(sets.instance, table, varied, sparsity, rng, batch.row(i));
    }
    const auto proba = model.predict_proba_batch(batch);
    for (std::size_t i = 0; i < n; ++i) {
      ++attempts;
      const bool flips = label_from_proba(proba[i]) != sets.original_label;
      RowMatrix& target = flips ? sets.positives : sets.negatives;
      if (target.rows() < cfg.m) target.append_row(batch.row(i));
      if (sets.positives.rows() == cfg.m && sets.negatives.rows() == cfg.m) break;
    }
  }
  sets.attempts_used = attempts;
  if (sets.positives.rows() < cfg.m || sets.negatives.rows() < cfg.m) {
    throw BudgetExhaustedError(detail::deficiency_message(
        "random", attempts, sets.positives.rows(), sets.negatives.rows(), cfg.m));
  }
  return sets;
}

// Genetic search. Fitness (lower is better) is
//   |p(candidate) - target| + lambda * L1(x, candidate) / d
// with target = 0 when x is labelled 1 and 1 otherwise. Parents are picked by
// binary tournament; children come from uniform crossover followed by
// per-gene redraw mutation on varied features. Survivors are the best P/2 of
// each class from parents and children (topped up from the other class), so
// both sets stay populated. The final C+ / C- are the m best of each class.
inline CounterfactualSets generate_genetic(std::span<const double> x,
                                           const Classifier& model,
                                           const DatasetTable& table,
                                           const CfConfig& cfg) {
  const std::size_t d = table.d();
  cfg.validate(d);
  if (model.dim() != d) {
    throw std::invalid_argument("model dimension " + std::to_string(model.dim()) +
                                " does not match table dimension " + std::to_string(d));
  }
  const std::size_t pop_size = cfg.resolved_population();
  const double lambda = cfg.genetic.lambda;
  std::vector<std::size_t> varied = cfg.varied_features(d);
  const std::size_t sparsity = cfg.resolved_sparsity(d);
  Rng rng(cfg.seed);

  CounterfactualSets sets;
  sets.instance = detail::clamp_instance(x, table);
  sets.original_label = predict_label(model, sets.instance);
  sets.method_used = CfMethod::genetic;
  const double target = sets.original_label == 1 ? 0.0 : 1.0;

  struct Member {
    std::vector<double> genes;
    double fitness;
    bool flips;
  };
  std::size_t evaluations = 0;
  auto evaluate = [&](const RowMatrix& batch) {
    const auto proba = model.predict_proba_batch(batch);
    evaluations += batch.rows();
    std::vector<Member> out;
    out.reserve(batch.rows());
    for (std::size_t i = 0; i < batch.rows(); ++i) {
      const auto g = batch.row(i);
      double l1 = 0.0;
      for (std::size_t j = 0; j < d; ++j) l1 += std::abs(g[j] - sets.instance[j]);
      out.push_back({std::vector<double>(g.begin(), g.end()),
                     std::abs(proba[i] - target) + lambda * l1 / static_cast<double>(d),
                     label_from_proba(proba[i]) != sets.original_label});
    }
    return out;
  };
  auto by_fitness = [](const Member& a, const Member& b) { return a.fitness < b.fitness; };

  RowMatrix init(pop_size, d);
  for (std::size_t i = 0; i < pop_size; ++i) {
    detail::sparse_candidate(sets.instance, table, varied, sparsity, rng, init.row(i));
  }
  std::vector<Member> population = evaluate(init);

  for (std::size_t gen = 0; gen < cfg.genetic.generations; ++gen) {
    auto tournament = [&]() -> const Member& {
      const Member& a = population[uniform_index(rng, population.size())];
      const Member& b = population[uniform_index(rng, population.size())];
      return b.fitness < a.fitness ? b : a;
    };
    RowMatrix children(pop_size, d);
    for (std::size_t i = 0; i < pop_size; ++i) {
      const Member& pa = tournament();
      const Member& pb = tournament();
      auto child = children.row(i);
      for (std::size_t j = 0; j < d; ++j) child[j] = pa.genes[j];
      for (std::size_t j : varied) {
        if (uniform01(rng) < 0.5) child[j] = pb.genes[j];
        if (uniform01(rng) < kMutationRate) {
          const auto& f = table.feature(j);
          child[j] = uniform_real(rng, f.min, f.max);
        }
      }
    }
    std::vector<Member> pool = std::move(population);
    for (auto& c : evaluate(children)) pool.push_back(std::move(c));

    std::vector<Member> flipping, keeping;
    for (auto& mbr : pool) (mbr.flips ? flipping : keeping).push_back(std::move(mbr));
    std::stable_sort(flipping.begin(), flipping.end(), by_fitness);
    std::stable_sort(keeping.begin(), keeping.end(), by_fitness);
    const std::size_t half = pop_size / 2;
    std::size_t take_f = std::min(half, flipping.size());
    std::size_t take_k = std::min(pop_size - half, keeping.size());
    // Top up from whichever class has members to spare.
    if (take_f + take_k < pop_size) {
      take_f = std::min(flipping.size(), pop_size - take_k);
      take_k = std::min(keeping.size(), pop_size - take_f);
    }
    population.clear();
    for (std::size_t i = 0; i < take_f; ++i) population.push_back(std::move(flipping[i]));
    for (std::size_t i = 0; i < take_k; ++i) population.push_back(std::move(keeping[i]));
  }

  std::vector<const Member*> flipping, keeping;
  for (const auto& mbr : population) (mbr.flips ? flipping : keeping).push_back(&mbr);
  auto by_fitness_ptr = [](const Member* a, const Member* b) { return a->fitness < b->fitness; };
  std::stable_sort(flipping.begin(), flipping.end(), by_fitness_ptr);
  std::stable_sort(keeping.begin(), keeping.end(), by_fitness_ptr);
  sets.attempts_used = evaluations;
  if (flipping.size() < cfg.m || keeping.size() < cfg.m) {
    throw BudgetExhaustedError(detail::deficiency_message(
        "genetic", evaluations, std::min(flipping.size(), cfg.m),
        std::min(keeping.size(), cfg.m), cfg.m));
  }
  sets.positives = RowMatrix(d);
  sets.negatives = RowMatrix(d);
  for (std::size_t i = 0; i < cfg.m; ++i) {
    sets.positives.append_row(flipping[i]->genes);
    sets.negatives.append_row(keeping[i]->genes);
  }
  return sets;
}

inline CounterfactualSets generate_counterfactuals(std::span<const double> x,
                                                   const Classifier& model,
                                                   const DatasetTable& table,
                                                   const CfConfig& cfg) {
  return cfg.method == CfMethod::random ? generate_random(x, model, table, cfg)
                                        : generate_genetic(x, model, table, cfg);
}

// Mean squared difference between paired positive and negative rows, per
// feature, pairing by row index.
inline std::vector<double> variability_baseline(const CounterfactualSets& sets) {
  const std::size_t m = sets.positives.rows();
  if (m == 0 || sets.negatives.rows() != m ||
      sets.positives.cols() != sets.negatives.cols()) {
    throw std::invalid_argument("variability_baseline: sets must be non-empty and paired");
  }
  std::vector<double> out(sets.positives.cols(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < out.size(); ++j) {
      const double diff = sets.positives(i, j) - sets.negatives(i, j);
      out[j] += diff * diff;
    }
  }
  for (double& v : out) v /= static_cast<double>(m);
  return out;
}

}  // namespace cid
