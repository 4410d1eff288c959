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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace tabflow {

enum class ColumnKind { kNumeric, kCategorical, kDatetime };
enum class ColumnRole { kFeature, kTarget };

std::string_view to_string(ColumnKind kind);
std::string_view to_string(ColumnRole role);
ColumnKind parse_column_kind(std::string_view text);
ColumnRole parse_column_role(std::string_view text);

struct ColumnSchema {
  std::string name;
  std::string description;
  ColumnKind kind = ColumnKind::kNumeric;
  ColumnRole role = ColumnRole::kFeature;
  /// Display precision of numeric columns, inferred from the source text.
  std::optional<int> decimal_places;
  /// strftime/strptime pattern for datetime columns.
  std::string datetime_format = "%Y-%m-%d %H:%M:%S";

  bool operator==(const ColumnSchema&) const = default;
};

/// Seconds since the Unix epoch, UTC.
struct Timestamp {
  std::int64_t seconds = 0;
  auto operator<=>(const Timestamp&) const = default;
};

/// Index into a column's interned vocabulary.
struct CategoryId {
  std::uint32_t index = 0;
  auto operator<=>(const CategoryId&) const = default;
};

/// A cell as seen from outside a table; categories carry their token text.
using Value = std::variant<std::monostate, double, std::string, Timestamp>;

/// Immutable typed table. Cells are stored row-major; categorical cells are
/// interned per column. Build instances with TableBuilder.
class Table {
 public:
  Table() = default;

  std::size_t num_rows() const noexcept { return num_rows_; }
  std::size_t num_columns() const noexcept { return schema_.size(); }

  const std::vector<ColumnSchema>& schema() const noexcept { return schema_; }
  const ColumnSchema& column(std::size_t c) const { return schema_.at(c); }
  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Throws DataError when the column is absent.
  std::size_t column_index(std::string_view name) const;

  bool is_missing(std::size_t r, std::size_t c) const;
  double number(std::size_t r, std::size_t c) const;
  std::string_view category(std::size_t r, std::size_t c) const;
  CategoryId category_id(std::size_t r, std::size_t c) const;
  Timestamp timestamp(std::size_t r, std::size_t c) const;
  /// Numeric value of a numeric or datetime cell (epoch seconds).
  double as_double(std::size_t r, std::size_t c) const;
  Value value(std::size_t r, std::size_t c) const;
  std::vector<Value> row(std::size_t r) const;

  const std::vector<std::string>& vocabulary(std::size_t c) const {
    return vocab_.at(c);
  }

  Table select_rows(std::span<const std::size_t> rows) const;
  Table select_columns(std::span<const std::string> names) const;

  bool has_missing() const;

  /// Value equality: same schema and same cell values row by row.
  friend bool operator==(const Table& a, const Table& b);

 private:
  friend class TableBuilder;
  using Cell = std::variant<std::monostate, double, CategoryId, Timestamp>;

  const Cell& cell(std::size_t r, std::size_t c) const;

  std::vector<ColumnSchema> schema_;
  std::vector<std::vector<std::string>> vocab_;
  std::vector<Cell> cells_;
  std::size_t num_rows_ = 0;
};

class TableBuilder {
 public:
  /// Throws DataError on duplicate column names.
  explicit TableBuilder(std::vector<ColumnSchema> schema);

  const std::vector<ColumnSchema>& schema() const { return table_.schema_; }

  /// Throws DataError when the arity or a cell kind does not match.
  void add_row(std::span<const Value> values);
  void add_row(std::initializer_list<Value> values) {
    add_row(std::span<const Value>(values.begin(), values.size()));
  }
  void reserve(std::size_t rows);

  Table build() &&;

 private:
  Table table_;
  std::vector<std::unordered_map<std::string, std::uint32_t>> intern_;
};

struct SerializedColumn {
  std::string text;
  bool operator==(const SerializedColumn&) const = default;
};

/// Maps each column to "<name> : <description>", in schema order.
std::vector<SerializedColumn> serialize_columns(
    std::span<const ColumnSchema> schema);

/// Splits on the first " : ".
std::pair<std::string, std::string> parse_serialized_column(
    const SerializedColumn& column);

/// Seeded random partition; the test part holds round(test_fraction * N)
/// rows. Both parts keep the original relative row order.
std::pair<Table, Table> split_train_test(const Table& table,
                                         double test_fraction,
                                         std::uint64_t seed);

/// Number of digits after the decimal point in a numeric literal, ignoring
/// any exponent suffix.
int count_fraction_digits(std::string_view literal);

/// Rounds to `places` decimal digits, half away from zero.
double round_to_places(double value, int places);

}  // namespace tabflow
