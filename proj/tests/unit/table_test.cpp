/*
 * Copyright 2026 The TabFlow Authors.
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

#include "tabflow/error.hpp"
#include "tabflow/table.hpp"

namespace tabflow {
namespace {

std::vector<ColumnSchema> two_columns() {
  ColumnSchema a;
  a.name = "price";
  a.kind = ColumnKind::kNumeric;
  ColumnSchema b;
  b.name = "city";
  b.description = "city of the order";
  b.kind = ColumnKind::kCategorical;
  return {a, b};
}

Table numbered(std::size_t n) {
  TableBuilder b(two_columns());
  for (std::size_t i = 0; i < n; ++i) b.add_row({static_cast<double>(i), std::string("c") + std::to_string(i % 3)});
  return std::move(b).build();
}

TEST(Table, BuilderRejectsDuplicateNames) {
  auto s = two_columns();
  s[1].name = "price";
  EXPECT_THROW(TableBuilder{s}, DataError);
}

TEST(Table, BuilderRejectsKindMismatchAndArity) {
  TableBuilder b(two_columns());
  EXPECT_THROW(b.add_row({std::string("x"), std::string("y")}), DataError);
  EXPECT_THROW(b.add_row({1.0}), DataError);
  EXPECT_THROW(b.add_row({1.0, Timestamp{3}}), DataError);
}

TEST(Table, CellsRoundTripAndInterning) {
  TableBuilder b(two_columns());
  b.add_row({1.5, std::string("Paris")});
  b.add_row({Value{}, std::string("Paris")});
  b.add_row({2.0, std::string("Lyon")});
  const Table t = std::move(b).build();
  EXPECT_EQ(t.num_rows(), 3u);
  EXPECT_DOUBLE_EQ(t.number(0, 0), 1.5);
  EXPECT_TRUE(t.is_missing(1, 0));
  EXPECT_EQ(t.category(1, 1), "Paris");
  EXPECT_EQ(t.category_id(0, 1), t.category_id(1, 1));
  EXPECT_EQ(t.vocabulary(1).size(), 2u);
  EXPECT_TRUE(t.has_missing());
  EXPECT_EQ(t.column_index("city"), 1u);
  EXPECT_THROW(t.column_index("nope"), DataError);
}

TEST(Table, SerializeColumnsMatchesNameColonDescription) {
  const auto s = two_columns();
  const auto out = serialize_columns(s);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].text, "price : ");
  EXPECT_EQ(out[1].text, "city : city of the order");
  ColumnSchema c;
  c.name = "order city";
  c.description = "city of the order";
  EXPECT_EQ(serialize_columns(std::vector<ColumnSchema>{c})[0].text, "order city : city of the order");
}

TEST(Table, SerializedColumnRoundTrips) {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"a", ""}, {"order city", "city : with colon"}, {"x_1", "desc"}};
  for (const auto& [name, desc] : cases) {
    ColumnSchema c;
    c.name = name;
    c.description = desc;
    const auto s = serialize_columns(std::vector<ColumnSchema>{c});
    const auto back = parse_serialized_column(s[0]);
    EXPECT_EQ(back.first, name);
    EXPECT_EQ(back.second, desc);
  }
}

TEST(Table, SplitIsDeterministicPartition) {
  const Table t = numbered(10);
  const auto [tr1, te1] = split_train_test(t, 0.2, 42);
  const auto [tr2, te2] = split_train_test(t, 0.2, 42);
  EXPECT_EQ(te1.num_rows(), 2u);
  EXPECT_EQ(tr1.num_rows(), 8u);
  EXPECT_TRUE(tr1 == tr2);
  EXPECT_TRUE(te1 == te2);
  std::set<double> all;
  for (std::size_t r = 0; r < tr1.num_rows(); ++r) all.insert(tr1.number(r, 0));
  for (std::size_t r = 0; r < te1.num_rows(); ++r) EXPECT_TRUE(all.insert(te1.number(r, 0)).second);
  EXPECT_EQ(all.size(), 10u);
}

TEST(Table, SplitSizesFromReportedDatasets) {
  // Row counts published for the two evaluation datasets.
  auto test_rows = [](std::size_t n, double f) {
    return static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));
  };
  EXPECT_EQ(test_rows(29590, 0.1), 2959u);
  const Table t = numbered(29590);
  EXPECT_EQ(split_train_test(t, 0.1, 1).second.num_rows(), 2959u);
  const Table big = numbered(172765);
  EXPECT_EQ(split_train_test(big, 0.1, 1).second.num_rows(), 17277u);
}

TEST(Table, SplitRejectsBadFraction) {
  const Table t = numbered(10);
  EXPECT_THROW(split_train_test(t, 0.0, 1), UsageError);
  EXPECT_THROW(split_train_test(t, 1.0, 1), UsageError);
  EXPECT_THROW(split_train_test(numbered(1), 0.5, 1), Error);
}

TEST(Table, FractionDigitsAndRounding) {
  EXPECT_EQ(count_fraction_digits("1.5"), 1);
  EXPECT_EQ(count_fraction_digits("2.25"), 2);
  EXPECT_EQ(count_fraction_digits("3"), 0);
  EXPECT_EQ(count_fraction_digits("1.250e3"), 3);
  EXPECT_DOUBLE_EQ(round_to_places(2.345, 2), 2.35);
  EXPECT_DOUBLE_EQ(round_to_places(-2.5, 0), -3.0);
}

TEST(Table, SelectRowsAndColumns) {
  const Table t = numbered(5);
  const std::vector<std::size_t> rows{4, 0};
  const Table s = t.select_rows(rows);
  EXPECT_DOUBLE_EQ(s.number(0, 0), 4.0);
  const std::vector<std::string> cols{"city"};
  const Table c = t.select_columns(cols);
  EXPECT_EQ(c.num_columns(), 1u);
  EXPECT_EQ(c.category(2, 0), "c2");
}

}  // namespace
}  // namespace tabflow
