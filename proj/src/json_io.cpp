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

#include "tabflow/json_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "tabflow/error.hpp"

namespace tabflow {

using nlohmann::json;

json to_json(const ColumnSchema& column) {
  json doc{{"name", column.name},
           {"description", column.description},
           {"kind", to_string(column.kind)},
           {"role", to_string(column.role)}};
  if (column.decimal_places) doc["decimal_places"] = *column.decimal_places;
  if (column.kind == ColumnKind::kDatetime) doc["datetime_format"] = column.datetime_format;
  return doc;
}

ColumnSchema column_schema_from_json(const json& doc) {
  ColumnSchema col;
  col.name = doc.at("name").get<std::string>();
  col.description = doc.value("description", "");
  col.kind = parse_column_kind(doc.value("kind", "numeric"));
  col.role = parse_column_role(doc.value("role", "feature"));
  if (doc.contains("decimal_places")) col.decimal_places = doc["decimal_places"].get<int>();
  if (doc.contains("datetime_format")) col.datetime_format = doc["datetime_format"].get<std::string>();
  return col;
}

json to_json(const std::vector<ColumnSchema>& schema) {
  json out = json::array();
  for (const auto& c : schema) out.push_back(to_json(c));
  return out;
}

std::vector<ColumnSchema> schema_from_json(const json& doc) {
  std::vector<ColumnSchema> out;
  for (const auto& c : doc) out.push_back(column_schema_from_json(c));
  return out;
}

json to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& doc) {
  const auto rows = static_cast<Eigen::Index>(doc.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(doc[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = doc[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw UsageError("ragged matrix in JSON");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& doc) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(doc.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = doc[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError(fmt::format("cannot write '{}'", path.string()));
  out << doc.dump(2) << '\n';
}

void require_format(const json& doc, const std::string& format, int version) {
  if (!doc.is_object() || doc.value("format", "") != format) {
    throw UsageError(fmt::format("expected a '{}' document", format));
  }
  const int got = doc.value("version", -1);
  if (got != version) {
    throw UsageError(fmt::format("unsupported {} version {} (expected {})", format, got, version));
  }
}

}  // namespace tabflow
