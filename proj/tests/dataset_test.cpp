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
#include <set>
#include <sstream>

#include "cid/dataset.hpp"
#include "cid/numeric.hpp"
#include "cid/synthetic.hpp"
#include "test_util.hpp"

namespace cid {
namespace {

using testing::table_from_csv;

TEST(LoadCsv, TwoRowStatistics) {
  const auto t = table_from_csv("a,b,label\n1,2,0\n3,4,1\n");
  EXPECT_EQ(t.d(), 2u);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.feature(0).name, "a");
  EXPECT_EQ(t.feature(0).min, 1.0);
  EXPECT_EQ(t.feature(0).max, 3.0);
  EXPECT_EQ(t.feature(0).mean, 2.0);
  EXPECT_EQ(t.feature(0).std, 1.0);
  EXPECT_EQ(t.feature(1).index, 1u);
  EXPECT_EQ(t.labels(), (std::vector<int>{0, 1}));
}

TEST(LoadCsv, LabelColumnMayBeAnywhere) {
  const auto t = table_from_csv("label,a,b\n1,1,2\n0,3,4\n");
  EXPECT_EQ(t.feature_names(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.row(1)[1], 4.0);
  EXPECT_EQ(t.labels(), (std::vector<int>{1, 0}));
}

TEST(LoadCsv, ConstantColumn) {
  const auto t = table_from_csv("a,c,label\n1,5,0\n2,5,1\n3,5,0\n");
  EXPECT_EQ(t.feature(1).std, 0.0);
  EXPECT_EQ(t.feature(1).min, 5.0);
  EXPECT_EQ(t.feature(1).max, 5.0);
  EXPECT_EQ(t.feature(1).mean, 5.0);
  EXPECT_EQ(t.constant_features(), std::vector<std::size_t>{1});
}

TEST(LoadCsv, NonNumericCellNamesRowAndColumn) {
  try {
    table_from_csv("a,b,label\n1,2,0\n3,abc,1\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column 'b'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("abc"), std::string::npos) << msg;
  }
}

TEST(LoadCsv, Errors) {
  EXPECT_THROW(table_from_csv(""), DataError);
  EXPECT_THROW(table_from_csv("a,b\n1,2\n3,4\n"), DataError);          // no label
  EXPECT_THROW(table_from_csv("a,label\n1,0\n"), DataError);           // one row
  EXPECT_THROW(table_from_csv("a,label\n1,0\n2,2\n"), DataError);      // label 2
  EXPECT_THROW(table_from_csv("a,label\n1,0\n,1\n"), DataError);       // missing
  EXPECT_THROW(table_from_csv("a,label\n1,0\n2\n"), DataError);        // short row
  EXPECT_THROW(table_from_csv("a,label\n1,0\ninf,1\n"), DataError);    // non-finite
  EXPECT_THROW(load_csv("/nonexistent/data.csv"), DataError);
}

TEST(LoadCsv, QuotedHeaderAndBlankLines) {
  const auto t = table_from_csv("\"a\",\"label\"\r\n1.5,0\r\n\r\n-2e3,1\r\n");
  EXPECT_EQ(t.feature(0).name, "a");
  EXPECT_EQ(t.row(1)[0], -2000.0);
}

TEST(Csv, RoundTripIsBitIdentical) {
  SyntheticOptions o;
  o.rows = 40;
  o.seed = 3;
  const auto t = make_synthetic(o);
  std::ostringstream out;
  write_csv(t, out, "label");
  const auto back = table_from_csv(out.str());
  EXPECT_EQ(back.rows(), t.rows());
  EXPECT_EQ(back.labels(), t.labels());
  EXPECT_EQ(back.features(), t.features());
}

TEST(Dataset, StatisticsMatchRecomputation) {
  SyntheticOptions o;
  o.rows = 101;
  o.seed = 9;
  const auto t = make_synthetic(o);
  for (std::size_t j = 0; j < t.d(); ++j) {
    const auto col = t.rows().column(j);
    const double m = mean(col);
    EXPECT_EQ(t.feature(j).min, *std::min_element(col.begin(), col.end()));
    EXPECT_EQ(t.feature(j).max, *std::max_element(col.begin(), col.end()));
    EXPECT_NEAR(t.feature(j).mean, m, 1e-9 * std::max(1.0, std::abs(m)));
    EXPECT_NEAR(t.feature(j).std, stddev(col, 0), 1e-9);
    EXPECT_LE(t.feature(j).min, t.feature(j).mean);
    EXPECT_LE(t.feature(j).mean, t.feature(j).max);
  }
}

TEST(Dataset, RejectsBadConstruction) {
  RowMatrix rows(2);
  rows.append_row(std::vector<double>{1, 2});
  EXPECT_THROW(DatasetTable(std::vector<std::string>{"a"}, rows, {0}), std::exception);
  EXPECT_THROW(DatasetTable(std::vector<std::string>{"a", "b"}, rows, {0, 1}), DataError);
  EXPECT_THROW(DatasetTable(std::vector<std::string>{"a", "b"}, rows, {3}), DataError);
}

DatasetTable ten_rows() {
  std::string csv = "a,label\n";
  for (int i = 0; i < 10; ++i) csv += std::to_string(i) + "," + std::to_string(i % 2) + "\n";
  return table_from_csv(csv);
}

TEST(Split, SizesAndDeterminism) {
  const auto t = ten_rows();
  const auto [train, test] = split(t, 0.3, 42);
  EXPECT_EQ(train.size(), 7u);
  EXPECT_EQ(test.size(), 3u);
  const auto [train2, test2] = split(t, 0.3, 42);
  EXPECT_EQ(train.rows(), train2.rows());
  EXPECT_EQ(test.rows(), test2.rows());
  EXPECT_EQ(test.labels(), test2.labels());
}

TEST(Split, UnionIsOriginalAndStatsAreFrozen) {
  const auto t = ten_rows();
  const auto [train, test] = split(t, 0.3, 7);
  std::multiset<double> all;
  for (std::size_t i = 0; i < train.size(); ++i) all.insert(train.row(i)[0]);
  for (std::size_t i = 0; i < test.size(); ++i) all.insert(test.row(i)[0]);
  EXPECT_EQ(all, (std::multiset<double>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
  EXPECT_EQ(test.features(), train.features());
}

TEST(Split, DifferentSeedsDiffer) {
  SyntheticOptions o;
  o.rows = 50;
  const auto t = make_synthetic(o);
  EXPECT_NE(split(t, 0.3, 1).second.rows(), split(t, 0.3, 2).second.rows());
}

TEST(Split, EdgeCases) {
  const auto two = table_from_csv("a,label\n1,0\n2,1\n");
  const auto [train, test] = split(two, 0.5, 0);
  EXPECT_EQ(train.size(), 1u);
  EXPECT_EQ(test.size(), 1u);
  EXPECT_THROW(split(two, 0.1, 0), DataError);  // rounds to 0 test rows
  EXPECT_THROW(split(two, 0.0, 0), std::invalid_argument);
  EXPECT_THROW(split(two, 1.0, 0), std::invalid_argument);
  // Single-row tables cannot be built through the loader; construct one.
  RowMatrix one(1);
  one.append_row(std::vector<double>{1});
  const DatasetTable single(std::vector<std::string>{"a"}, one, {0});
  EXPECT_THROW(split(single, 0.5, 0), DataError);
}

}  // namespace
}  // namespace cid
