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

#include "tabflow/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tabflow/error.hpp"
#include "tabflow/gmm.hpp"
#include "tabflow/json_io.hpp"
#include "tabflow/metrics.hpp"

namespace tabflow {

using nlohmann::json;

MetricStat MetricStat::from_values(std::vector<double> values) {
  MetricStat s;
  s.values = std::move(values);
  if (s.values.empty()) return s;
  const double n = static_cast<double>(s.values.size());
  s.mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / n;
  if (s.values.size() > 1) {
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

std::string MetricStat::display() const { return fmt::format("{:.2f}±{:.2f}", mean, std); }

const std::vector<std::string>& report_dimensions() {
  static const std::vector<std::string> dims{"accuracy",   "diversity", "consistency",
                                             "dependency", "utility",   "privacy"};
  return dims;
}

std::map<std::string, double> EvaluationReport::summary() const {
  std::map<std::string, double> out;
  for (const auto& [dim, metrics] : dimensions) {
    double sum = 0.0;
    int count = 0;
    for (const auto& [name, stat] : metrics) {
      if (name == "rmse" || name == "mae") continue;
      double v = stat.mean;
      if (name == "dcr") v = 100.0 * (1.0 - std::abs(v - 50.0) / 50.0);
      sum += v;
      ++count;
    }
    if (count > 0) out[dim] = sum / count;
  }
  return out;
}

json EvaluationReport::to_json() const {
  json dims = json::object();
  for (const auto& [dim, metrics] : dimensions) {
    json m = json::object();
    for (const auto& [name, stat] : metrics) {
      m[name] = {{"mean", stat.mean}, {"std", stat.std}, {"display", stat.display()}, {"values", stat.values}};
    }
    dims[dim] = m;
  }
  return {{"format", kFormat}, {"version", kVersion},  {"runs", runs},
          {"seed", seed},      {"dimensions", dims}, {"summary", summary()}};
}

std::string EvaluationReport::to_csv() const {
  std::string out = "metric,dimension,mean,std\n";
  for (const auto& dim : report_dimensions()) {
    auto it = dimensions.find(dim);
    if (it == dimensions.end()) continue;
    for (const auto& [name, stat] : it->second) {
      out += fmt::format("{},{},{:.6f},{:.6f}\n", name, dim, stat.mean, stat.std);
    }
  }
  return out;
}

std::string EvaluationReport::summary_table() const {
  std::string out = fmt::format("{:<12} {:>8}\n", "dimension", "score");
  const auto s = summary();
  for (const auto& dim : report_dimensions()) {
    auto it = s.find(dim);
    if (it == s.end()) continue;
    out += fmt::format("{:<12} {:>8.2f}\n", dim, it->second);
  }
  return out;
}

void EvaluationReport::save(const std::filesystem::path& json_path,
                            const std::filesystem::path& csv_path) const {
  write_json_file(json_path, to_json());
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw UsageError(fmt::format("cannot write '{}'", csv_path.string()));
  out << to_csv();
}

EvaluationReport evaluate_all(const Table& real_train, const Table& real_test, const SynthProvider& synth,
                              const RelationshipSpec& spec, const EvaluationConfig& config) {
  if (config.runs < 1) throw UsageError("evaluation needs runs >= 1");
  require_same_schema(real_train, real_test);

  std::string target = config.utility_target;
  if (target.empty()) {
    for (const auto& c : real_train.schema()) {
      if (c.role == ColumnRole::kTarget) target = c.name;
    }
  }
  std::optional<UtilityTask> task = config.utility_task;
  if (!target.empty() && !task) {
    task = real_train.column(real_train.column_index(target)).kind == ColumnKind::kCategorical
               ? UtilityTask::kClassification
               : UtilityTask::kRegression;
  }
  const std::vector<std::string> dsi_cols =
      config.dsi_columns.empty() ? default_dsi_columns(real_train) : config.dsi_columns;

  std::vector<HierarchyTuples> tuples;
  for (const auto& g : spec.hierarchies) tuples.push_back(observed_tuples(real_train, g));

  const Embedder embedder(real_train);
  const Eigen::MatrixXd e_train = embedder.embed(real_train);
  const Eigen::MatrixXd e_test = embedder.embed(real_test);

  std::map<std::string, std::map<std::string, std::vector<double>>> values;
  for (int run = 0; run < config.runs; ++run) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(run);
    const Table s = synth(run);
    require_same_schema(real_train, s);
    const Eigen::MatrixXd e_synth = embedder.embed(s);

    auto& acc = values["accuracy"];
    acc["density_estimation"].push_back(density_estimation_score(real_train, s));
    acc["pairwise_correlation"].push_back(pairwise_correlation_score(real_train, s));
    acc["alpha_precision"].push_back(alpha_precision(e_train, e_synth));
    acc["c2st"].push_back(c2st_score(e_train, e_synth, seed));

    auto& div = values["diversity"];
    div["coverage"].push_back(coverage_score(real_train, s));
    div["beta_recall"].push_back(beta_recall(e_train, e_synth));

    values["consistency"]["hcs"].push_back(hcs(s, tuples));

    auto& dep = values["dependency"];
    dep["mdi"].push_back(mdi(s, spec.math_groups, spec.temporal_chains, config.rel_tol));
    if (!dsi_cols.empty()) {
      dep["dsi"].push_back(dsi(real_train, s, dsi_cols, config.dsi_components, seed));
    }

    if (!target.empty()) {
      for (const auto& [name, v] : ml_efficiency(s, real_test, target, *task, config.utility, seed)) {
        values["utility"][name].push_back(v);
      }
    }

    values["privacy"]["dcr"].push_back(dcr(e_synth, e_train, e_test));
    spdlog::info("evaluation run {}/{} done", run + 1, config.runs);
  }

  EvaluationReport report;
  report.runs = config.runs;
  report.seed = config.seed;
  for (auto& [dim, metrics] : values) {
    for (auto& [name, v] : metrics) report.dimensions[dim][name] = MetricStat::from_values(std::move(v));
  }
  return report;
}

EvaluationReport evaluate_all(const Table& real_train, const Table& real_test, const Table& synth,
                              const RelationshipSpec& spec, const EvaluationConfig& config) {
  return evaluate_all(
      real_train, real_test, [&](int) { return synth; }, spec, config);
}

}  // namespace tabflow
