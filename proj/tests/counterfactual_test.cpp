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

#include <gtest/gtest.h>

#include <cmath>

#include "cid/counterfactual.hpp"
#include "cid/synthetic.hpp"
#include "test_util.hpp"

namespace cid {
namespace {

// Rows spanning [-2, 2] in every column.
DatasetTable box_table(std::size_t d, std::vector<int> labels = {0, 1}) {
  RowMatrix rows(d);
  rows.append_row(std::vector<double>(d, -2.0));
  rows.append_row(std::vector<double>(d, 2.0));
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
  return DatasetTable(names, rows, labels);
}

// Boundary at x0 = 0.
LogisticModel boundary(std::size_t d) {
  std::vector<double> w(d, 0.0);
  w[0] = 3.0;
  return LogisticModel(w, 0.0);
}

void expect_valid(const CounterfactualSets& s, const Classifier& model, const DatasetTable& t,
                  std::size_t m) {
  ASSERT_EQ(s.positives.rows(), m);
  ASSERT_EQ(s.negatives.rows(), m);
  for (std::size_t i = 0; i < m; ++i) {
    EXPECT_NE(predict_label(model, s.positives.row(i)), s.original_label);
    EXPECT_EQ(predict_label(model, s.negatives.row(i)), s.original_label);
    for (std::size_t j = 0; j < t.d(); ++j) {
      for (const RowMatrix* mat : {&s.positives, &s.negatives}) {
        EXPECT_GE((*mat)(i, j), t.feature(j).min);
        EXPECT_LE((*mat)(i, j), t.feature(j).max);
      }
    }
  }
}

TEST(CfConfig, Defaults) {
  CfConfig c;
  EXPECT_EQ(c.m, 50u);
  EXPECT_EQ(c.resolved_max_attempts(), 10000u);
  EXPECT_EQ(c.resolved_sparsity(6), 2u);
  EXPECT_EQ(c.resolved_sparsity(1), 1u);
  EXPECT_EQ(c.resolved_sparsity(8), 3u);
  EXPECT_EQ(c.resolved_population(), 200u);
  c.features_to_vary = std::vector<std::size_t>{4};
  EXPECT_EQ(c.resolved_sparsity(8), 1u);
}

TEST(CfConfig, Validation) {
  CfConfig c;
  c.m = 1;
  EXPECT_THROW(c.validate(3), std::invalid_argument);
  c = CfConfig{};
  c.sparsity = 4;
  EXPECT_THROW(c.validate(3), std::invalid_argument);
  c = CfConfig{};
  c.features_to_vary = std::vector<std::size_t>{0, 3};
  EXPECT_THROW(c.validate(3), std::invalid_argument);
  c.features_to_vary = std::vector<std::size_t>{1, 1};
  EXPECT_THROW(c.validate(3), std::invalid_argument);
  c.features_to_vary = std::vector<std::size_t>{};
  EXPECT_THROW(c.validate(3), std::invalid_argument);
  EXPECT_THROW(parse_cf_method("gradient"), std::invalid_argument);
}

TEST(Random, OneDimensionalBoundary) {
  const auto t = box_table(1);
  const auto model = boundary(1);
  CfConfig cfg;
  cfg.m = 5;
  cfg.seed = 17;
  const auto s = generate_random(std::vector<double>{-1.0}, model, t, cfg);
  EXPECT_EQ(s.original_label, 0);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_GE(s.positives(i, 0), 0.0);
    EXPECT_LT(s.negatives(i, 0), 0.0);
  }
  expect_valid(s, model, t, 5);
  EXPECT_GE(s.attempts_used, 10u);
}

TEST(Random, ConstantClassifierExhaustsPositives) {
  const auto t = box_table(2);
  const FunctionClassifier constant(2, [](std::span<const double>) { return 0.7; });
  CfConfig cfg;
  cfg.m = 5;
  try {
    generate_random(std::vector<double>{0, 0}, constant, t, cfg);
    FAIL() << "expected BudgetExhaustedError";
  } catch (const BudgetExhaustedError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("positive set C+ (0/5)"), std::string::npos) << msg;
    EXPECT_EQ(msg.find("negative set"), std::string::npos) << msg;
    EXPECT_NE(msg.find("1000 candidates"), std::string::npos) << msg;
  }
}

TEST(Random, FullSparsityMovesEveryCoordinate) {
  const auto t = box_table(3);
  const auto model = boundary(3);
  CfConfig cfg;
  cfg.m = 10;
  cfg.sparsity = 3;
  const std::vector<double> x{-1.0, 0.5, 0.25};
  const auto s = generate_random(x, model, t, cfg);
  for (const RowMatrix* mat : {&s.positives, &s.negatives}) {
    for (std::size_t i = 0; i < mat->rows(); ++i) {
      for (std::size_t j = 0; j < 3; ++j) EXPECT_NE((*mat)(i, j), x[j]);
    }
  }
}

TEST(Random, SparsityOneMovesOneCoordinate) {
  const auto t = box_table(4);
  const auto model = boundary(4);
  CfConfig cfg;
  cfg.m = 10;
  cfg.sparsity = 1;
  const std::vector<double> x{-1.0, 0.5, 0.25, 1.0};
  const auto s = generate_random(x, model, t, cfg);
  for (std::size_t i = 0; i < 10; ++i) {
    int changed = 0;
    for (std::size_t j = 0; j < 4; ++j) changed += s.negatives(i, j) != x[j];
    EXPECT_LE(changed, 1);
    // Positives can only arise by moving feature 0.
    for (std::size_t j = 1; j < 4; ++j) EXPECT_EQ(s.positives(i, j), x[j]);
  }
}

TEST(Random, FrozenFeaturesNeverChange) {
  const auto t = box_table(3);
  const auto model = boundary(3);
  CfConfig cfg;
  cfg.m = 8;
  cfg.features_to_vary = std::vector<std::size_t>{0, 2};
  const std::vector<double> x{-1.0, 0.5, 0.25};
  const auto s = generate_random(x, model, t, cfg);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(s.positives(i, 1), 0.5);
    EXPECT_EQ(s.negatives(i, 1), 0.5);
  }
}

TEST(Random, ConstantFeatureNeverChanges) {
  RowMatrix rows(2);
  rows.append_row(std::vector<double>{-2, 5});
  rows.append_row(std::vector<double>{2, 5});
  const DatasetTable t(std::vector<std::string>{"a", "c"}, rows, {0, 1});
  const auto model = boundary(2);
  CfConfig cfg;
  cfg.m = 10;
  cfg.sparsity = 2;
  const auto s = generate_random(std::vector<double>{-1.0, 5.0}, model, t, cfg);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(s.positives(i, 1), 5.0);
    EXPECT_EQ(s.negatives(i, 1), 5.0);
  }
}

TEST(Random, ClampsOutOfRangeInstance) {
  const auto t = box_table(2);
  const auto model = boundary(2);
  CfConfig cfg;
  cfg.m = 4;
  const auto s = generate_random(std::vector<double>{-9.0, 3.0}, model, t, cfg);
  EXPECT_EQ(s.instance, (std::vector<double>{-2.0, 2.0}));
  expect_valid(s, model, t, 4);
}

TEST(Random, SeedDeterminism) {
  SyntheticOptions o;
  o.rows = 200;
  const auto t = make_synthetic(o);
  const LogisticModel model({4, 0, 0, 0, 0, 0}, 0.0);
  CfConfig cfg;
  cfg.m = 20;
  cfg.seed = 99;
  const auto a = generate_random(t.row(0), model, t, cfg);
  const auto b = generate_random(t.row(0), model, t, cfg);
  EXPECT_EQ(a.positives, b.positives);
  EXPECT_EQ(a.negatives, b.negatives);
  EXPECT_EQ(a.attempts_used, b.attempts_used);
  cfg.seed = 100;
  EXPECT_NE(generate_random(t.row(0), model, t, cfg).positives, a.positives);
  expect_valid(a, model, t, 20);
}

TEST(Genetic, ZeroLambdaFlips) {
  const auto t = box_table(3);
  const auto model = boundary(3);
  CfConfig cfg;
  cfg.method = CfMethod::genetic;
  cfg.m = 10;
  cfg.genetic.lambda = 0.0;
  cfg.seed = 4;
  const auto s = generate_counterfactuals(std::vector<double>{-1.0, 0.0, 0.0}, model, t, cfg);
  EXPECT_EQ(s.method_used, CfMethod::genetic);
  expect_valid(s, model, t, 10);
  EXPECT_EQ(s.attempts_used, cfg.resolved_population() * (cfg.genetic.generations + 1));
}

TEST(Genetic, LargeLambdaKeepsNegativesClose) {
  const auto t = box_table(1);
  const auto model = boundary(1);
  CfConfig cfg;
  cfg.method = CfMethod::genetic;
  cfg.m = 10;
  cfg.seed = 8;
  const std::vector<double> x{-1.0};
  auto mean_l1 = [&](const RowMatrix& rows) {
    double total = 0.0;
    for (std::size_t i = 0; i < rows.rows(); ++i) total += std::abs(rows(i, 0) - x[0]);
    return total / static_cast<double>(rows.rows());
  };
  cfg.genetic.lambda = 0.0;
  const auto loose = generate_genetic(x, model, t, cfg);
  cfg.genetic.lambda = 1e6;
  const auto tight = generate_genetic(x, model, t, cfg);
  EXPECT_LT(mean_l1(tight.negatives), mean_l1(loose.negatives));
  expect_valid(tight, model, t, 10);
}

TEST(Genetic, SmallPopulationIsRejected) {
  const auto t = box_table(2);
  const FunctionClassifier constant(2, [](std::span<const double>) { return 0.7; });
  CfConfig cfg;
  cfg.method = CfMethod::genetic;
  cfg.m = 10;
  cfg.genetic.population = 15;
  EXPECT_THROW(generate_genetic(std::vector<double>{0, 0}, constant, t, cfg),
               std::invalid_argument);
  cfg.genetic.population = 0;
  EXPECT_THROW(generate_genetic(std::vector<double>{0, 0}, constant, t, cfg),
               BudgetExhaustedError);
}

TEST(Genetic, SeedDeterminism) {
  SyntheticOptions o;
  o.rows = 200;
  const auto t = make_synthetic(o);
  const LogisticModel model({4, 0, 0, 0, 0, 0}, 0.0);
  CfConfig cfg;
  cfg.method = CfMethod::genetic;
  cfg.m = 10;
  cfg.seed = 5;
  const auto a = generate_genetic(t.row(1), model, t, cfg);
  const auto b = generate_genetic(t.row(1), model, t, cfg);
  EXPECT_EQ(a.positives, b.positives);
  EXPECT_EQ(a.negatives, b.negatives);
  expect_valid(a, model, t, 10);
}

TEST(Baseline, HandComputed) {
  CounterfactualSets s;
  s.instance = {0.0, 0.0};
  s.positives = RowMatrix(2);
  s.negatives = RowMatrix(2);
  s.positives.append_row(std::vector<double>{1, 7});
  s.positives.append_row(std::vector<double>{3, 8});
  s.negatives.append_row(std::vector<double>{0, 7});
  s.negatives.append_row(std::vector<double>{1, 8});
  const auto v = variability_baseline(s);
  EXPECT_EQ(v[0], 2.5);
  EXPECT_EQ(v[1], 0.0);
  std::swap(s.positives, s.negatives);
  EXPECT_EQ(variability_baseline(s), v);
  s.negatives = RowMatrix(2);
  EXPECT_THROW(variability_baseline(s), std::invalid_argument);
}

}  // namespace
}  // namespace cid
