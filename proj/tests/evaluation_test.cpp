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
#include <sstream>

#include "cid/evaluation.hpp"
#include "cid/random.hpp"
#include "cid/serialization.hpp"

namespace cid {
namespace {

const FunctionClassifier kConstant(3, [](std::span<const double>) { return 0.3; });

TEST(Faithfulness, ConstantModelIsZero) {
  const Explanation e{0, {0.3, 0.1, 0.9}};
  const std::vector<double> x{1, 2, 3}, means{0, 0, 0};
  EXPECT_EQ(comprehensiveness(x, e, kConstant, means), 0.0);
  EXPECT_EQ(sufficiency(x, e, kConstant, means), 0.0);
}

TEST(Faithfulness, OneDimensionalLogistic) {
  const LogisticModel m({4.0}, 0.0);
  const Explanation e{0, {1.0}};
  const std::vector<double> x{1.0}, means{0.0};
  EXPECT_NEAR(comprehensiveness(x, e, m, means), 0.24100689501895423, 1e-12);
  EXPECT_NEAR(sufficiency(x, e, m, means), 0.24100689501895423, 1e-12);
}

TEST(Faithfulness, NegativePredictionUsesItsOwnClass) {
  const LogisticModel m({4.0}, 0.0);
  const Explanation e{0, {1.0}};
  const std::vector<double> x{-1.0}, means{0.0};
  // f(x) = 1 - sigmoid(-4); masking to the mean gives f = 1 - 0.5.
  EXPECT_NEAR(comprehensiveness(x, e, m, means), 0.24100689501895423, 1e-12);
}

TEST(Faithfulness, InstanceAtMeanIsZero) {
  const LogisticModel m({1.0, -2.0, 0.5}, 0.3);
  const std::vector<double> means{0.2, 0.4, -1.0};
  const Explanation e{0, {0.5, 0.2, 0.9}};
  EXPECT_EQ(comprehensiveness(means, e, m, means), 0.0);
  EXPECT_EQ(sufficiency(means, e, m, means), 0.0);
}

TEST(Faithfulness, CurveEndpoints) {
  const LogisticModel m({1.0, -2.0, 0.5}, 0.3);
  const std::vector<double> x{1.0, 0.5, 2.0}, means{0.2, 0.4, -1.0};
  const auto c = faithfulness_curve(x, Explanation{0, {0.1, -0.9, 0.5}}, m, means);
  ASSERT_EQ(c.removal.size(), 4u);
  EXPECT_EQ(c.removal[0], c.f_x);
  EXPECT_EQ(c.insertion[3], c.f_x);
  // Fully masked: the all-means vector regardless of order.
  const double fm = c.predicted_label == 1 ? m.predict_proba(means) : 1 - m.predict_proba(means);
  EXPECT_EQ(c.removal[3], fm);
  EXPECT_EQ(c.insertion[0], fm);
  // Order is by |score|: feature 1 first.
  const std::vector<double> z1{1.0, 0.4, 2.0};
  const double f1 = c.predicted_label == 1 ? m.predict_proba(z1) : 1 - m.predict_proba(z1);
  EXPECT_EQ(c.removal[1], f1);
}

TEST(Faithfulness, ScaleInvariance) {
  const LogisticModel m({1.0, -2.0, 0.5, 3.0}, 0.1);
  const std::vector<double> x{1.0, 0.5, 2.0, -0.4}, means{0, 0, 0, 0};
  const Explanation e{0, {0.1, 0.7, 0.3, 0.2}};
  Explanation scaled = e;
  for (double& s : scaled.scores) s *= 42.0;
  EXPECT_EQ(comprehensiveness(x, e, m, means), comprehensiveness(x, scaled, m, means));
  EXPECT_EQ(sufficiency(x, e, m, means), sufficiency(x, scaled, m, means));
}

TEST(Faithfulness, OneDimensionMirrors) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const LogisticModel m({uniform_real(rng, -5, 5)}, uniform_real(rng, -1, 1));
    const std::vector<double> x{uniform_real(rng, -2, 2)}, means{uniform_real(rng, -1, 1)};
    const Explanation e{0, {uniform01(rng)}};
    EXPECT_NEAR(comprehensiveness(x, e, m, means), sufficiency(x, e, m, means), 1e-15);
  }
}

TEST(Faithfulness, DimensionMismatch) {
  const std::vector<double> x{1, 2, 3}, means{0, 0};
  EXPECT_THROW(comprehensiveness(x, Explanation{0, {1, 2, 3}}, kConstant, means),
               std::invalid_argument);
  EXPECT_THROW(sufficiency(x, Explanation{0, {1, 2}}, kConstant, x), std::invalid_argument);
}

TEST(Agreement, Examples) {
  const Explanation a{0, {8, 7, 6, 5, 0, 0, 0, 0}};
  const Explanation b{0, {0, 0, 8, 7, 6, 5, 0, 0}};
  const Explanation c{0, {0, 0, 0, 0, 4, 3, 2, 1}};
  EXPECT_EQ(feature_agreement(a, a, 4), 1.0);
  EXPECT_EQ(feature_agreement(a, b, 4), 0.5);
  EXPECT_EQ(feature_agreement(b, a, 4), 0.5);
  EXPECT_EQ(feature_agreement(a, c, 4), 0.0);
  EXPECT_THROW(feature_agreement(a, b, 9), std::invalid_argument);
  EXPECT_THROW(feature_agreement(a, b, 0), std::invalid_argument);
}

TEST(Agreement, UsesMagnitudes) {
  const Explanation a{0, {-9, 1, 2}};
  const Explanation b{0, {9, 1, 2}};
  EXPECT_EQ(top_features(a.scores, 1), std::vector<std::size_t>{0});
  EXPECT_EQ(feature_agreement(a, b, 2), 1.0);
}

TEST(Agreement, RangeAndSymmetry) {
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    Explanation a{0, std::vector<double>(8)}, b{0, std::vector<double>(8)};
    for (double& s : a.scores) s = uniform01(rng);
    for (double& s : b.scores) s = uniform01(rng);
    const std::size_t k = 1 + uniform_index(rng, 8);
    const double v = feature_agreement(a, b, k);
    EXPECT_EQ(v, feature_agreement(b, a, k));
    EXPECT_EQ(v * static_cast<double>(k), std::round(v * static_cast<double>(k)));
  }
}

TEST(Aggregate, Examples) {
  auto a = aggregate(std::vector<double>{1, 1, 1});
  EXPECT_EQ(a.mean, 1.0);
  EXPECT_EQ(a.ci, 0.0);
  a = aggregate(std::vector<double>{0, 2});
  EXPECT_EQ(a.mean, 1.0);
  EXPECT_NEAR(a.ci, 1.414213562373095, 1e-15);
  a = aggregate(std::vector<double>{5});
  EXPECT_EQ(a.mean, 5.0);
  EXPECT_EQ(a.ci, 0.0);
  EXPECT_THROW(aggregate(std::vector<double>{}), std::invalid_argument);
}

TEST(Report, MatchesRecomputation) {
  std::vector<InstanceFaithfulness> rows{{0, 0.1, 0.4}, {1, 0.3, 0.2}, {5, 0.5, 0.0}};
  const auto r = make_report(rows);
  EXPECT_EQ(r.n, 3u);
  EXPECT_NEAR(r.mean_comp, 0.3, 1e-12);
  EXPECT_NEAR(r.mean_suff, 0.2, 1e-12);
  EXPECT_NEAR(r.ci_comp, 2 * std::sqrt(0.08 / 3) / std::sqrt(3.0), 1e-12);
  const auto table = report_table({{"cid", r}});
  EXPECT_NE(table.find("0.3000 \xC2\xB1 "), std::string::npos) << table;
}

TEST(ExplanationFile, RoundTripAndErrors) {
  const ExplanationFile f{{"a", "b"}, {{0, {0.5, -1.25}}, {3, {1e-300, 2}}}};
  std::ostringstream out;
  write_explanations(f, out);
  std::istringstream in(out.str());
  const auto back = read_explanations(in, "mem");
  EXPECT_EQ(back.feature_names, f.feature_names);
  ASSERT_EQ(back.explanations.size(), 2u);
  EXPECT_EQ(back.explanations[1].instance_id, 3);
  EXPECT_EQ(back.explanations[1].scores, f.explanations[1].scores);

  std::istringstream bad("instance_id,a,b\n0,1,2\n1,x,2\n");
  try {
    read_explanations(bad, "bad.csv");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
  std::istringstream no_id("id,a\n0,1\n");
  EXPECT_THROW(read_explanations(no_id, "x"), DataError);
  std::istringstream short_row("instance_id,a,b\n0,1\n");
  EXPECT_THROW(read_explanations(short_row, "x"), DataError);
}

TEST(Format, Cell) { EXPECT_EQ(format_cell(1.0, 0.0, 2), "1.00 \xC2\xB1 0.00"); }

}  // namespace
}  // namespace cid
