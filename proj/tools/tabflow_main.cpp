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

// Command-line front end: one subcommand per pipeline stage.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "tabflow/error.hpp"
#include "tabflow/pipeline.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<std::string> output_dir;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Base seed for every stage without an explicit seed");
  cmd->add_option("--runs", f.runs, "Evaluation repetitions")->check(CLI::PositiveNumber);
  cmd->add_option("--output-dir", f.output_dir, "Output directory (overrides the config)");
  cmd->add_flag("-v,--verbose", f.verbose, "Debug logging");
}

tabflow::Pipeline make_pipeline(const CommonFlags& f) {
  tabflow::ConfigOverrides o;
  o.seed = f.seed;
  o.runs = f.runs;
  if (f.output_dir) o.output_dir = std::filesystem::path(*f.output_dir);
  return tabflow::Pipeline(tabflow::PipelineConfig::load(f.config, o));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tabflow: relationship-preserving synthetic tabular data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tabflow::kToolVersion));

  CommonFlags flags;
  std::optional<std::size_t> rows;
  std::optional<std::string> out_path;
  std::string synthetic;
  std::string baseline;
  bool resume = false;

  auto* infer = app.add_subcommand("infer-relationships", "Infer and validate the relationship spec");
  add_common(infer, flags);

  auto* fit = app.add_subcommand("fit", "Compress the training split and train the models");
  add_common(fit, flags);

  auto* sample = app.add_subcommand("sample", "Generate synthetic rows from the model bundle");
  add_common(sample, flags);
  sample->add_option("-n,--rows", rows, "Number of rows (default: training rows)")->check(CLI::PositiveNumber);
  sample->add_option("-o,--output", out_path, "Output CSV (default: <output-dir>/synthetic.csv)");

  auto* evaluate = app.add_subcommand("evaluate", "Score a synthetic CSV against the real split");
  add_common(evaluate, flags);
  evaluate->add_option("-s,--synthetic", synthetic, "Synthetic CSV (default: <output-dir>/synthetic.csv)");

  auto* pipeline = app.add_subcommand("pipeline", "Run infer, fit, sample and evaluate in sequence");
  add_common(pipeline, flags);
  pipeline->add_option("--baseline", baseline, "Also run a baseline generator")->check(CLI::IsMember({"smote"}));
  pipeline->add_flag("--resume", resume, "Skip stages whose outputs already exist");

  auto* smote = app.add_subcommand("baseline-smote", "Generate and evaluate the SMOTE baseline");
  add_common(smote, flags);
  smote->add_option("-n,--rows", rows, "Number of rows (default: training rows)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tabflow::exit_code(tabflow::ErrorKind::kUsage);
  }
  spdlog::set_level(flags.verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    tabflow::Pipeline p = make_pipeline(flags);
    if (infer->parsed()) {
      p.infer();
    } else if (fit->parsed()) {
      p.fit();
    } else if (sample->parsed()) {
      std::optional<std::filesystem::path> target;
      if (out_path) target = std::filesystem::path(*out_path);
      std::cout << p.sample(rows, target).string() << "\n";
    } else if (evaluate->parsed()) {
      const auto report = p.evaluate(synthetic.empty() ? p.paths().synthetic_csv : std::filesystem::path(synthetic));
      std::cout << report.summary_table();
    } else if (pipeline->parsed()) {
      p.run_all(resume, baseline == "smote");
      std::cout << "outputs in " << p.paths().root.string() << "\n";
    } else if (smote->parsed()) {
      const auto csv = p.baseline_smote(rows);
      const auto report = p.evaluate(csv, p.paths().smote_report_json, p.paths().smote_report_csv,
                                     p.paths().smote_report_summary);
      std::cout << report.summary_table();
    }
  } catch (const tabflow::Error& e) {
    spdlog::error("{}", e.what());
    return tabflow::exit_code(e.kind());
  } catch (const std::exception& e) {
    spdlog::error("unexpected failure: {}", e.what());
    return 1;
  }
  return 0;
}
