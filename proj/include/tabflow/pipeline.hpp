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
#include <optional>
#include <string>

#include <json.hpp>

#include "tabflow/diffusion.hpp"
#include "tabflow/evaluation.hpp"
#include "tabflow/latent_codec.hpp"
#include "tabflow/reasoner.hpp"
#include "tabflow/relationship.hpp"
#include "tabflow/table.hpp"

namespace tabflow {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Command-line values that take precedence over the config file.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<std::filesystem::path> output_dir;
};

/// One JSON document; relative paths resolve against the file's directory.
/// Every stage seed defaults to the top-level "seed".
struct PipelineConfig {
  std::filesystem::path data_csv;
  std::filesystem::path schema;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;

  std::string reasoner_backend = "rule_file";  // or "llm"
  std::filesystem::path rule_file;
  ReasoningTask reasoner_task = ReasoningTask::kAll;
  HttpLlmBackend llm;
  std::optional<std::filesystem::path> prompts_dir;
  double rel_tol = kDefaultRelTol;
  double max_violation_fraction = kDefaultMaxViolationFraction;

  VaeConfig vae;
  NoiseSchedule schedule;
  ScoreConfig diffusion;
  SamplerConfig sampler;
  std::optional<std::size_t> sample_rows;  // defaults to the training row count

  EvaluationConfig evaluation;

  bool smote_baseline = false;
  int smote_k_neighbors = 5;
  std::uint64_t smote_seed = 0;

  std::filesystem::path output_dir;
  std::uint64_t seed = 0;

  /// Normalized settings that determine the artifacts (paths excluded).
  nlohmann::json fingerprint;

  static PipelineConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                                  const ConfigOverrides& overrides = {});
  static PipelineConfig load(const std::filesystem::path& path, const ConfigOverrides& overrides = {});
};

/// Output layout under the output directory.
struct OutputPaths {
  explicit OutputPaths(const std::filesystem::path& root);

  std::filesystem::path root;
  std::filesystem::path train_csv;
  std::filesystem::path test_csv;
  std::filesystem::path relationships;
  std::filesystem::path validation_report;
  std::filesystem::path model_dir;
  std::filesystem::path codec;
  std::filesystem::path vae;
  std::filesystem::path diffusion;
  std::filesystem::path context;
  std::filesystem::path manifest;
  std::filesystem::path synthetic_csv;
  std::filesystem::path report_json;
  std::filesystem::path report_csv;
  std::filesystem::path report_summary;
  std::filesystem::path smote_csv;
  std::filesystem::path smote_report_json;
  std::filesystem::path smote_report_csv;
  std::filesystem::path smote_report_summary;
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }
  const OutputPaths& paths() const { return paths_; }

  /// Runs the reasoner on the training split and writes the surviving spec
  /// plus the validation report.
  InferenceResult infer();

  /// Compresses the training split, trains the codec, VAE and diffusion
  /// model, and writes the model bundle with its manifest. UsageError when
  /// the relationship spec has not been produced.
  void fit();

  /// Writes `rows` synthetic rows (default from config) to `out` (default
  /// synthetic.csv). Refuses a bundle whose hashes do not match.
  std::filesystem::path sample(std::optional<std::size_t> rows = std::nullopt,
                               std::optional<std::filesystem::path> out = std::nullopt);

  /// Evaluates a synthetic CSV against the real split and writes the report
  /// files next to `report_json`.
  EvaluationReport evaluate(const std::filesystem::path& synthetic_csv,
                            const std::filesystem::path& report_json,
                            const std::filesystem::path& report_csv,
                            const std::filesystem::path& report_summary);
  EvaluationReport evaluate(const std::filesystem::path& synthetic_csv);

  /// SMOTE on the training split, written to smote_synthetic.csv.
  std::filesystem::path baseline_smote(std::optional<std::size_t> rows = std::nullopt);

  /// infer -> fit -> sample -> evaluate, then the SMOTE baseline when
  /// enabled. With `resume`, stages whose outputs exist are skipped.
  void run_all(bool resume, bool with_smote);

  /// Throws DataError when the manifest's recorded hashes do not match the
  /// current inputs and bundle files.
  void verify_bundle() const;

 private:
  struct Split {
    Table train;
    Table test;
  };
  const Split& split();
  RelationshipSpec current_spec() const;
  std::size_t default_rows();

  PipelineConfig config_;
  OutputPaths paths_;
  std::optional<Split> split_;
};

}  // namespace tabflow
