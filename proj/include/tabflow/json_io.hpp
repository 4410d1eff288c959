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
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tabflow/table.hpp"

namespace tabflow {

nlohmann::json to_json(const ColumnSchema& column);
ColumnSchema column_schema_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const std::vector<ColumnSchema>& schema);
std::vector<ColumnSchema> schema_from_json(const nlohmann::json& doc);

/// Row-major nested arrays.
nlohmann::json to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& doc);

/// Reads a JSON document; UsageError when unreadable or malformed.
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes with two-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

/// Throws UsageError unless doc["format"] == format and doc["version"] == version.
void require_format(const nlohmann::json& doc, const std::string& format, int version);

}  // namespace tabflow
