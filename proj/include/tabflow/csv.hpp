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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabflow/table.hpp"

namespace tabflow {

/// RFC-4180 record reader. Accepts LF or CRLF line endings and quoted fields
/// spanning lines. A UTF-8 byte-order mark on the first record is dropped.
std::vector<std::vector<std::string>> read_csv_records(std::istream& in);

void write_csv_record(std::ostream& out, const std::vector<std::string>& fields);

/// Column metadata as stored in a schema file.
struct SchemaFile {
  std::vector<ColumnSchema> columns;
  std::optional<std::string> target;
};

SchemaFile load_schema(const std::filesystem::path& path);
SchemaFile parse_schema_json(std::string_view json_text);
void save_schema(const std::filesystem::path& path,
                 const std::vector<ColumnSchema>& schema);

/// Parses the CSV with per-column kinds taken from the schema. Columns keep
/// the CSV header order. Numeric decimal_places is inferred as the largest
/// number of fraction digits seen (capped at 9). Empty cells are missing.
Table load_csv(const std::filesystem::path& csv_path,
               const std::filesystem::path& schema_path);
Table parse_csv(std::istream& in, const SchemaFile& schema);

/// Writes a header row and one record per row. Numeric cells use the
/// column's decimal_places when known, otherwise the shortest round-trip
/// representation; datetimes use the column's format.
void write_csv(std::ostream& out, const Table& table);
void write_csv(const std::filesystem::path& path, const Table& table);

std::optional<Timestamp> parse_datetime(std::string_view text,
                                        const std::string& format);
std::string format_datetime(Timestamp ts, const std::string& format);

std::string format_number(double value, std::optional<int> decimal_places);

}  // namespace tabflow
