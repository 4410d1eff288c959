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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabflow/gbdt.hpp"
#include "tabflow/relationship.hpp"
#include "tabflow/table.hpp"

namespace tabflow {

struct MetricStat {
  std::vector<double> values;  // one per run
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single run

  static MetricStat from_values(std::vector<double> values);
  /// "mean±std" with two decimals.
  std::string display() const;
};

/// Dimensions in report order.
const std::vector<std::string>& report_dimensions();

struct EvaluationReport {
  static constexpr std::string_view kFormat = "tabflow.evaluation_report";
  static constexpr int kVersion = 1;

  int runs = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::map<std::string, MetricStat>> dimensions;

  /// One 0-100 score per dimension: the mean of its bounded metrics, with
  /// privacy mapped as 100 * (1 - |DCR - 50| / 50). RMSE and MAE are left out.
  std::map<std::string, double> summary() const;

  nlohmann::json to_json() const;
  /// Columns: metric,dimension,mean,std.
  std::string to_csv() const;
  /// Per-dimension summary as a plain-text table.
  std::string summary_table() const;
  void save(const std::filesystem::path& json_path, const std::filesystem::path& csv_path) const;
};

struct EvaluationConfig {
  int runs = 1;
  std::uint64_t seed = 0;
  /// Columns for DSI; empty selects numeric columns plus the target.
  std::vector<std::string> dsi_columns;
  int dsi_components = 5;
  /// Utility target; when empty the schema's target column is used, and
  /// utility is skipped if there is none.
  std::string utility_target;
  std::optional<UtilityTask> utility_task;
  UtilityConfig utility;
  double rel_tol = kDefaultRelTol;
};

/// Synthetic table for a given run index.
using SynthProvider = std::function<Table(int run)>;

/// Runs every metric `runs` times; run i uses seed + i for the stochastic
/// metrics and asks the provider for its synthetic table.
EvaluationReport evaluate_all(const Table& real_train, const Table& real_test,
                              const SynthProvider& synth, const RelationshipSpec& spec,
                              const EvaluationConfig& config);

EvaluationReport evaluate_all(const Table& real_train, const Table& real_test, const Table& synth,
                              const RelationshipSpec& spec, const EvaluationConfig& config);

}  // namespace tabflow
