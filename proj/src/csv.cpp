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

#include "tabflow/csv.hpp"

#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "tabflow/error.hpp"

namespace tabflow {

namespace {

constexpr int kMaxDecimalPlaces = 9;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::optional<double> parse_number(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

std::vector<std::vector<std::string>> read_csv_records(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool first = true;
  char ch = 0;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (first && !record.empty() && record.front().rfind("\xEF\xBB\xBF", 0) == 0) {
      record.front().erase(0, 3);
    }
    first = false;
    // Blank lines carry no record.
    if (!(record.size() == 1 && record.front().empty())) {
      records.push_back(std::move(record));
    }
    record.clear();
  };

  while (in.get(ch)) {
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(ch);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (in.peek() == '\n') in.get(ch);
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(ch);
        field_started = true;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted CSV field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

void write_csv_record(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    const std::string& f = fields[i];
    const bool quote =
        f.find_first_of(",\"\r\n") != std::string::npos ||
        (!f.empty() && (f.front() == ' ' || f.back() == ' '));
    if (!quote) {
      out << f;
      continue;
    }
    out << '"';
    for (char ch : f) {
      if (ch == '"') out << '"';
      out << ch;
    }
    out << '"';
  }
  out << '\n';
}

SchemaFile parse_schema_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(fmt::format("schema file is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object() || !doc.contains("columns") || !doc["columns"].is_array()) {
    throw UsageError("schema file must be an object with a 'columns' array");
  }
  SchemaFile out;
  std::unordered_set<std::string> names;
  for (const auto& item : doc["columns"]) {
    ColumnSchema col;
    if (!item.contains("name") || !item["name"].is_string()) {
      throw UsageError("schema column without a string 'name'");
    }
    col.name = item["name"].get<std::string>();
    col.description = item.value("description", "");
    col.kind = parse_column_kind(item.value("kind", "numeric"));
    col.role = parse_column_role(item.value("role", "feature"));
    if (col.kind == ColumnKind::kDatetime) {
      if (!item.contains("datetime_format")) {
        throw UsageError(fmt::format(
            "datetime column '{}' needs a 'datetime_format'", col.name));
      }
      col.datetime_format = item["datetime_format"].get<std::string>();
    }
    if (!names.insert(col.name).second) {
      throw DataError(fmt::format("duplicate column name '{}'", col.name));
    }
    out.columns.push_back(std::move(col));
  }
  if (doc.contains("target") && doc["target"].is_string()) {
    out.target = doc["target"].get<std::string>();
    bool found = false;
    for (auto& col : out.columns) {
      if (col.name == *out.target) {
        col.role = ColumnRole::kTarget;
        found = true;
      }
    }
    if (!found) {
      throw UsageError(fmt::format("target '{}' is not a schema column", *out.target));
    }
  }
  return out;
}

SchemaFile load_schema(const std::filesystem::path& path) {
  return parse_schema_json(read_file(path));
}

void save_schema(const std::filesystem::path& path,
                 const std::vector<ColumnSchema>& schema) {
  nlohmann::json doc;
  doc["columns"] = nlohmann::json::array();
  for (const auto& col : schema) {
    nlohmann::json item{{"name", col.name},
                        {"description", col.description},
                        {"kind", to_string(col.kind)},
                        {"role", to_string(col.role)}};
    if (col.kind == ColumnKind::kDatetime) item["datetime_format"] = col.datetime_format;
    if (col.role == ColumnRole::kTarget) doc["target"] = col.name;
    doc["columns"].push_back(std::move(item));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError(fmt::format("cannot write '{}'", path.string()));
  out << doc.dump(2) << '\n';
}

Table parse_csv(std::istream& in, const SchemaFile& schema) {
  auto records = read_csv_records(in);
  if (records.empty()) throw DataError("CSV has no header row");
  const auto& header = records.front();

  std::unordered_map<std::string, const ColumnSchema*> by_name;
  for (const auto& col : schema.columns) by_name.emplace(col.name, &col);

  std::vector<ColumnSchema> columns;
  std::unordered_set<std::string> seen;
  for (const auto& name : header) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw DataError(fmt::format("CSV column '{}' is not in the schema", name));
    }
    if (!seen.insert(name).second) {
      throw DataError(fmt::format("duplicate column name '{}' in CSV header", name));
    }
    columns.push_back(*it->second);
  }
  for (const auto& col : schema.columns) {
    if (!seen.contains(col.name)) {
      throw DataError(fmt::format("schema column '{}' is missing from the CSV", col.name));
    }
  }

  std::vector<int> places(columns.size(), -1);
  std::vector<std::vector<Value>> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != columns.size()) {
      throw DataError(fmt::format("CSV row {} has {} fields, expected {}", r,
                                  rec.size(), columns.size()));
    }
    std::vector<Value> row(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const std::string& text = rec[c];
      if (text.empty()) continue;
      const auto& col = columns[c];
      switch (col.kind) {
        case ColumnKind::kNumeric: {
          auto v = parse_number(text);
          if (!v) {
            throw DataError(fmt::format("CSV row {} column '{}': cannot parse '{}' as a number",
                                        r, col.name, text));
          }
          row[c] = *v;
          places[c] = std::max(places[c], std::min(kMaxDecimalPlaces, count_fraction_digits(text)));
          break;
        }
        case ColumnKind::kCategorical:
          row[c] = text;
          break;
        case ColumnKind::kDatetime: {
          auto ts = parse_datetime(text, col.datetime_format);
          if (!ts) {
            throw DataError(fmt::format(
                "CSV row {} column '{}': '{}' does not match format '{}'", r,
                col.name, text, col.datetime_format));
          }
          row[c] = *ts;
          break;
        }
      }
    }
    rows.push_back(std::move(row));
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].kind == ColumnKind::kNumeric) {
      columns[c].decimal_places = std::max(0, places[c]);
    }
  }
  TableBuilder builder(std::move(columns));
  builder.reserve(rows.size());
  for (const auto& row : rows) builder.add_row(row);
  return std::move(builder).build();
}

Table load_csv(const std::filesystem::path& csv_path,
               const std::filesystem::path& schema_path) {
  const SchemaFile schema = load_schema(schema_path);
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot open '{}'", csv_path.string()));
  return parse_csv(in, schema);
}

std::string format_number(double value, std::optional<int> decimal_places) {
  if (decimal_places) {
    std::string s = fmt::format("{:.{}f}", value, *decimal_places);
    // "-0.00" reads back as a distinct literal; normalise it.
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) {
      s.erase(0, 1);
    }
    return s;
  }
  return fmt::format("{}", value);
}

void write_csv(std::ostream& out, const Table& table) {
  std::vector<std::string> fields;
  for (const auto& col : table.schema()) fields.push_back(col.name);
  write_csv_record(out, fields);
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    fields.clear();
    for (std::size_t c = 0; c < table.num_columns(); ++c) {
      const auto& col = table.column(c);
      if (table.is_missing(r, c)) {
        fields.emplace_back();
        continue;
      }
      switch (col.kind) {
        case ColumnKind::kNumeric:
          fields.push_back(format_number(table.number(r, c), col.decimal_places));
          break;
        case ColumnKind::kCategorical:
          fields.emplace_back(table.category(r, c));
          break;
        case ColumnKind::kDatetime:
          fields.push_back(format_datetime(table.timestamp(r, c), col.datetime_format));
          break;
      }
    }
    write_csv_record(out, fields);
  }
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError(fmt::format("cannot write '{}'", path.string()));
  write_csv(out, table);
}

std::optional<Timestamp> parse_datetime(std::string_view text,
                                        const std::string& format) {
  std::tm tm{};
  const std::string buf(text);
  const char* end = ::strptime(buf.c_str(), format.c_str(), &tm);
  if (end == nullptr || *end != '\0') return std::nullopt;
  return Timestamp{static_cast<std::int64_t>(::timegm(&tm))};
}

std::string format_datetime(Timestamp ts, const std::string& format) {
  const auto t = static_cast<std::time_t>(ts.seconds);
  std::tm tm{};
  ::gmtime_r(&t, &tm);
  char buf[128];
  const std::size_t n = std::strftime(buf, sizeof(buf), format.c_str(), &tm);
  return std::string(buf, n);
}

}  // namespace tabflow
