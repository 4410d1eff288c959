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

#include "tabflow/table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include <fmt/format.h>

#include "tabflow/error.hpp"

namespace tabflow {

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kNumeric:
      return "numeric";
    case ColumnKind::kCategorical:
      return "categorical";
    case ColumnKind::kDatetime:
      return "datetime";
  }
  return "unknown";
}

std::string_view to_string(ColumnRole role) {
  return role == ColumnRole::kTarget ? "target" : "feature";
}

ColumnKind parse_column_kind(std::string_view text) {
  if (text == "numeric") return ColumnKind::kNumeric;
  if (text == "categorical") return ColumnKind::kCategorical;
  if (text == "datetime") return ColumnKind::kDatetime;
  throw UsageError(fmt::format("unknown column kind '{}'", text));
}

ColumnRole parse_column_role(std::string_view text) {
  if (text == "feature") return ColumnRole::kFeature;
  if (text == "target") return ColumnRole::kTarget;
  throw UsageError(fmt::format("unknown column role '{}'", text));
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    if (schema_[c].name == name) return c;
  }
  return std::nullopt;
}

std::size_t Table::column_index(std::string_view name) const {
  if (auto c = find_column(name)) return *c;
  throw DataError(fmt::format("unknown column '{}'", name));
}

const Table::Cell& Table::cell(std::size_t r, std::size_t c) const {
  if (r >= num_rows_ || c >= schema_.size()) {
    throw std::out_of_range(fmt::format("cell ({}, {}) out of range", r, c));
  }
  return cells_[r * schema_.size() + c];
}

bool Table::is_missing(std::size_t r, std::size_t c) const {
  return std::holds_alternative<std::monostate>(cell(r, c));
}

namespace {

[[noreturn]] void throw_access(const ColumnSchema& col, std::size_t r,
                               std::string_view wanted) {
  throw DataError(fmt::format("row {} column '{}': expected a {} cell", r,
                              col.name, wanted));
}

}  // namespace

double Table::number(std::size_t r, std::size_t c) const {
  const auto* v = std::get_if<double>(&cell(r, c));
  if (v == nullptr) throw_access(schema_[c], r, "numeric");
  return *v;
}

CategoryId Table::category_id(std::size_t r, std::size_t c) const {
  const auto* v = std::get_if<CategoryId>(&cell(r, c));
  if (v == nullptr) throw_access(schema_[c], r, "categorical");
  return *v;
}

std::string_view Table::category(std::size_t r, std::size_t c) const {
  return vocab_[c][category_id(r, c).index];
}

Timestamp Table::timestamp(std::size_t r, std::size_t c) const {
  const auto* v = std::get_if<Timestamp>(&cell(r, c));
  if (v == nullptr) throw_access(schema_[c], r, "datetime");
  return *v;
}

double Table::as_double(std::size_t r, std::size_t c) const {
  const Cell& x = cell(r, c);
  if (const auto* d = std::get_if<double>(&x)) return *d;
  if (const auto* t = std::get_if<Timestamp>(&x)) {
    return static_cast<double>(t->seconds);
  }
  throw_access(schema_[c], r, "numeric or datetime");
}

Value Table::value(std::size_t r, std::size_t c) const {
  const Cell& x = cell(r, c);
  if (const auto* d = std::get_if<double>(&x)) return *d;
  if (const auto* k = std::get_if<CategoryId>(&x)) {
    return vocab_[c][k->index];
  }
  if (const auto* t = std::get_if<Timestamp>(&x)) return *t;
  return std::monostate{};
}

std::vector<Value> Table::row(std::size_t r) const {
  std::vector<Value> out;
  out.reserve(num_columns());
  for (std::size_t c = 0; c < num_columns(); ++c) out.push_back(value(r, c));
  return out;
}

Table Table::select_rows(std::span<const std::size_t> rows) const {
  Table out;
  out.schema_ = schema_;
  out.vocab_ = vocab_;
  out.num_rows_ = rows.size();
  out.cells_.reserve(rows.size() * schema_.size());
  for (std::size_t r : rows) {
    if (r >= num_rows_) throw std::out_of_range("select_rows: row index");
    auto first = cells_.begin() + static_cast<std::ptrdiff_t>(r * schema_.size());
    out.cells_.insert(out.cells_.end(), first,
                      first + static_cast<std::ptrdiff_t>(schema_.size()));
  }
  return out;
}

Table Table::select_columns(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  std::vector<ColumnSchema> schema;
  for (const auto& n : names) {
    idx.push_back(column_index(n));
    schema.push_back(schema_[idx.back()]);
  }
  TableBuilder builder(std::move(schema));
  builder.reserve(num_rows_);
  std::vector<Value> values(idx.size());
  for (std::size_t r = 0; r < num_rows_; ++r) {
    for (std::size_t j = 0; j < idx.size(); ++j) values[j] = value(r, idx[j]);
    builder.add_row(values);
  }
  return std::move(builder).build();
}

bool Table::has_missing() const {
  return std::any_of(cells_.begin(), cells_.end(), [](const Cell& x) {
    return std::holds_alternative<std::monostate>(x);
  });
}

bool operator==(const Table& a, const Table& b) {
  if (a.schema_ != b.schema_ || a.num_rows_ != b.num_rows_) return false;
  for (std::size_t r = 0; r < a.num_rows_; ++r) {
    for (std::size_t c = 0; c < a.num_columns(); ++c) {
      if (a.value(r, c) != b.value(r, c)) return false;
    }
  }
  return true;
}

TableBuilder::TableBuilder(std::vector<ColumnSchema> schema) {
  std::unordered_set<std::string> seen;
  for (const auto& col : schema) {
    if (!seen.insert(col.name).second) {
      throw DataError(fmt::format("duplicate column name '{}'", col.name));
    }
  }
  table_.vocab_.resize(schema.size());
  intern_.resize(schema.size());
  table_.schema_ = std::move(schema);
}

void TableBuilder::reserve(std::size_t rows) {
  table_.cells_.reserve(rows * table_.schema_.size());
}

void TableBuilder::add_row(std::span<const Value> values) {
  const auto& schema = table_.schema_;
  if (values.size() != schema.size()) {
    throw DataError(fmt::format("row {} has {} cells, schema has {} columns",
                                table_.num_rows_, values.size(),
                                schema.size()));
  }
  for (std::size_t c = 0; c < values.size(); ++c) {
    const Value& v = values[c];
    if (std::holds_alternative<std::monostate>(v)) {
      table_.cells_.emplace_back(std::monostate{});
      continue;
    }
    switch (schema[c].kind) {
      case ColumnKind::kNumeric:
        if (const auto* d = std::get_if<double>(&v)) {
          table_.cells_.emplace_back(*d);
          continue;
        }
        break;
      case ColumnKind::kCategorical:
        if (const auto* s = std::get_if<std::string>(&v)) {
          auto [it, inserted] = intern_[c].try_emplace(
              *s, static_cast<std::uint32_t>(table_.vocab_[c].size()));
          if (inserted) table_.vocab_[c].push_back(*s);
          table_.cells_.emplace_back(CategoryId{it->second});
          continue;
        }
        break;
      case ColumnKind::kDatetime:
        if (const auto* t = std::get_if<Timestamp>(&v)) {
          table_.cells_.emplace_back(*t);
          continue;
        }
        break;
    }
    // Roll back the partial row so the table stays rectangular.
    table_.cells_.resize(table_.num_rows_ * schema.size());
    throw DataError(fmt::format("row {} column '{}': cell does not match {} kind",
                                table_.num_rows_, schema[c].name,
                                to_string(schema[c].kind)));
  }
  ++table_.num_rows_;
}

Table TableBuilder::build() && { return std::move(table_); }

std::vector<SerializedColumn> serialize_columns(
    std::span<const ColumnSchema> schema) {
  std::vector<SerializedColumn> out;
  out.reserve(schema.size());
  for (const auto& col : schema) {
    out.push_back({col.name + " : " + col.description});
  }
  return out;
}

std::pair<std::string, std::string> parse_serialized_column(
    const SerializedColumn& column) {
  const auto pos = column.text.find(" : ");
  if (pos == std::string::npos) return {column.text, ""};
  return {column.text.substr(0, pos), column.text.substr(pos + 3)};
}

std::pair<Table, Table> split_train_test(const Table& table,
                                         double test_fraction,
                                         std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw UsageError(
        fmt::format("test fraction {} outside (0, 1)", test_fraction));
  }
  if (table.num_rows() < 2) {
    throw DataError("train/test split needs at least two rows");
  }
  const std::size_t n = table.num_rows();
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle implementation.
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }
  std::vector<std::size_t> test(order.begin(),
                                order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test),
                                 order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {table.select_rows(train), table.select_rows(test)};
}

int count_fraction_digits(std::string_view literal) {
  const auto exp = literal.find_first_of("eE");
  if (exp != std::string_view::npos) literal = literal.substr(0, exp);
  const auto dot = literal.find('.');
  if (dot == std::string_view::npos) return 0;
  return static_cast<int>(literal.size() - dot - 1);
}

double round_to_places(double value, int places) {
  if (!std::isfinite(value)) return value;
  const double scale = std::pow(10.0, places);
  const double scaled = value * scale;
  // Values too large to carry the requested precision are already exact.
  if (std::abs(scaled) >= 9.0e15) return value;
  return std::round(scaled) / scale;
}

}  // namespace tabflow
