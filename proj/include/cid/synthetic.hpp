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

// Synthetic binary data with a known ground truth: independent N(0, 1)
// features and labels drawn from sigmoid(w . x + b).

#pragma once

#include <string>
#include <vector>

#include "cid/dataset.hpp"
#include "cid/model.hpp"
#include "cid/random.hpp"

namespace cid {

struct SyntheticOptions {
  std::size_t rows = 500;
  std::vector<double> weights = {4, 0, 0, 0, 0, 0};
  double bias = 0.0;
  bool hard_labels = false;  // sign(w . x + b) instead of a Bernoulli draw
  std::uint64_t seed = 0;
};

inline DatasetTable make_synthetic(const SyntheticOptions& o) {
  if (o.weights.empty()) throw std::invalid_argument("make_synthetic: no weights");
  Rng rng(o.seed);
  const std::size_t d = o.weights.size();
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j));
  RowMatrix x(d);
  x.reserve_rows(o.rows);
  std::vector<int> y;
  std::vector<double> row(d);
  for (std::size_t i = 0; i < o.rows; ++i) {
    double z = o.bias;
    for (std::size_t j = 0; j < d; ++j) {
      row[j] = standard_normal(rng);
      z += o.weights[j] * row[j];
    }
    x.append_row(row);
    y.push_back(o.hard_labels ? (z >= 0.0 ? 1 : 0) : (uniform01(rng) < sigmoid(z) ? 1 : 0));
  }
  return DatasetTable(std::move(names), std::move(x), std::move(y));
}

}  // namespace cid
