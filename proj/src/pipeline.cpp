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

#include "tabflow/pipeline.hpp"

#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tabflow/compressor.hpp"
#include "tabflow/csv.hpp"
#include "tabflow/error.hpp"
#include "tabflow/hashing.hpp"
#include "tabflow/json_io.hpp"
#include "tabflow/smote.hpp"

namespace tabflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kManifestFormat = "tabflow.manifest";
constexpr int kManifestVersion = 1;

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

fs::path require_file(const fs::path& p, std::string_view what) {
  if (!fs::is_regular_file(p)) throw UsageError(fmt::format("{} '{}' does not exist", what, p.string()));
  return p;
}

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
  if (!doc.is_object() || !doc.contains(key) || doc[key].is_null()) return fallback;
  try {
    return doc[key].get<T>();
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("config key '{}': {}", key, e.what()));
  }
}

json section(const json& doc, const char* key) {
  if (!doc.contains(key)) return json::object();
  if (!doc[key].is_object()) throw UsageError(fmt::format("config section '{}' must be an object", key));
  return doc[key];
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& doc, const fs::path& base_dir,
                                         const ConfigOverrides& overrides) {
  if (!doc.is_object()) throw UsageError("config must be a JSON object");
  PipelineConfig c;
  c.seed = overrides.seed ? *overrides.seed : get_or<std::uint64_t>(doc, "seed", 0);
  const auto stage_seed = [&](const json& s) { return get_or<std::uint64_t>(s, "seed", c.seed); };

  const json data = section(doc, "data");
  if (!data.contains("csv") || !data.contains("schema")) {
    throw UsageError("config needs data.csv and data.schema");
  }
  c.data_csv = require_file(resolve(base_dir, get_or<std::string>(data, "csv", "")), "data file");
  c.schema = require_file(resolve(base_dir, get_or<std::string>(data, "schema", "")), "schema file");
  c.test_fraction = get_or(data, "test_fraction", c.test_fraction);
  c.split_seed = stage_seed(data);

  const json reasoner = section(doc, "reasoner");
  c.reasoner_backend = get_or<std::string>(reasoner, "backend", c.reasoner_backend);
  c.reasoner_task = parse_reasoning_task(get_or<std::string>(reasoner, "task", "all"));
  if (c.reasoner_backend == "rule_file") {
    if (!reasoner.contains("rule_file")) throw UsageError("rule_file backend needs reasoner.rule_file");
    c.rule_file = require_file(resolve(base_dir, get_or<std::string>(reasoner, "rule_file", "")), "rule file");
  } else if (c.reasoner_backend == "llm") {
    c.llm = HttpLlmBackend::from_environment();
    c.llm.endpoint = get_or(reasoner, "endpoint", c.llm.endpoint);
    c.llm.model = get_or(reasoner, "model", c.llm.model);
    c.llm.token_env = get_or(reasoner, "token_env", c.llm.token_env);
    c.llm.max_attempts = get_or(reasoner, "max_attempts", c.llm.max_attempts);
    c.llm.timeout = std::chrono::milliseconds(get_or<long>(reasoner, "timeout_ms", c.llm.timeout.count()));
  } else {
    throw UsageError(fmt::format("unknown reasoner backend '{}'", c.reasoner_backend));
  }
  if (reasoner.contains("prompts_dir")) {
    c.prompts_dir = resolve(base_dir, get_or<std::string>(reasoner, "prompts_dir", ""));
  }

  const json validation = section(doc, "validation");
  c.rel_tol = get_or(validation, "rel_tol", c.rel_tol);
  c.max_violation_fraction = get_or(validation, "max_violation_fraction", c.max_violation_fraction);

  json vae = section(doc, "vae");
  vae["seed"] = stage_seed(vae);
  c.vae = VaeConfig::from_json(vae);

  const json diffusion = section(doc, "diffusion");
  c.schedule = NoiseSchedule::from_json(section(diffusion, "schedule"));
  json training = section(diffusion, "training");
  training["seed"] = stage_seed(training);
  c.diffusion = ScoreConfig::from_json(training);

  const json sampler = section(doc, "sampler");
  c.sampler.steps = get_or(sampler, "steps", c.sampler.steps);
  c.sampler.mode = parse_sampler_mode(get_or<std::string>(sampler, "mode", "sde"));
  c.sampler.seed = stage_seed(sampler);
  if (sampler.contains("rows")) c.sample_rows = get_or<std::size_t>(sampler, "rows", 0);
  c.schedule.levels(c.sampler.steps);  // validates the step count

  const json evaluation = section(doc, "evaluation");
  c.evaluation.runs = overrides.runs ? *overrides.runs : get_or(evaluation, "runs", 1);
  c.evaluation.seed = stage_seed(evaluation);
  c.evaluation.dsi_columns = get_or(evaluation, "dsi_columns", std::vector<std::string>{});
  c.evaluation.dsi_components = get_or(evaluation, "dsi_components", c.evaluation.dsi_components);
  c.evaluation.utility_target = get_or<std::string>(evaluation, "utility_target", "");
  if (evaluation.contains("utility_task")) {
    c.evaluation.utility_task = parse_utility_task(get_or<std::string>(evaluation, "utility_task", ""));
  }
  c.evaluation.rel_tol = c.rel_tol;
  const json utility = section(evaluation, "utility");
  auto& u = c.evaluation.utility;
  u.trees = get_or(utility, "trees", u.trees);
  u.learning_rates = get_or(utility, "learning_rates", u.learning_rates);
  u.depths = get_or(utility, "depths", u.depths);
  u.holdout_fraction = get_or(utility, "holdout_fraction", u.holdout_fraction);
  u.patience = get_or(utility, "patience", u.patience);
  if (u.trees.empty() || u.learning_rates.empty() || u.depths.empty()) {
    throw UsageError("evaluation.utility grids must not be empty");
  }
  if (c.evaluation.runs < 1) throw UsageError("evaluation.runs must be at least 1");

  const json baseline = section(doc, "baseline");
  c.smote_baseline = get_or(baseline, "smote", false);
  c.smote_k_neighbors = get_or(baseline, "k_neighbors", c.smote_k_neighbors);
  c.smote_seed = stage_seed(baseline);

  c.output_dir = overrides.output_dir ? *overrides.output_dir
                                      : resolve(base_dir, get_or<std::string>(doc, "output_dir", "out"));

  c.fingerprint = {{"test_fraction", c.test_fraction},
                   {"split_seed", c.split_seed},
                   {"rel_tol", c.rel_tol},
                   {"max_violation_fraction", c.max_violation_fraction},
                   {"vae", c.vae.to_json()},
                   {"schedule", c.schedule.to_json()},
                   {"diffusion", c.diffusion.to_json()},
                   {"sampler", {{"steps", c.sampler.steps},
                                {"mode", c.sampler.mode == SamplerMode::kSde ? "sde" : "ode"},
                                {"seed", c.sampler.seed}}}};
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path, const ConfigOverrides& overrides) {
  const json doc = read_json_file(path);
  return from_json(doc, fs::absolute(path).parent_path(), overrides);
}

OutputPaths::OutputPaths(const fs::path& r)
    : root(r),
      train_csv(r / "split" / "train.csv"),
      test_csv(r / "split" / "test.csv"),
      relationships(r / "relationships.json"),
      validation_report(r / "validation_report.json"),
      model_dir(r / "model"),
      codec(r / "model" / "codec.json"),
      vae(r / "model" / "vae.json"),
      diffusion(r / "model" / "diffusion.json"),
      context(r / "model" / "context.json"),
      manifest(r / "model" / "manifest.json"),
      synthetic_csv(r / "synthetic.csv"),
      report_json(r / "report.json"),
      report_csv(r / "report.csv"),
      report_summary(r / "report_summary.txt"),
      smote_csv(r / "smote_synthetic.csv"),
      smote_report_json(r / "smote_report.json"),
      smote_report_csv(r / "smote_report.csv"),
      smote_report_summary(r / "smote_report_summary.txt") {}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)), paths_(config_.output_dir) {}

const Pipeline::Split& Pipeline::split() {
  if (split_) return *split_;
  const Table all = load_csv(config_.data_csv, config_.schema);
  auto [train, test] = split_train_test(all, config_.test_fraction, config_.split_seed);
  fs::create_directories(paths_.train_csv.parent_path());
  write_csv(paths_.train_csv, train);
  write_csv(paths_.test_csv, test);
  split_ = Split{std::move(train), std::move(test)};
  return *split_;
}

RelationshipSpec Pipeline::current_spec() const {
  if (!fs::exists(paths_.relationships)) return {};
  return load_relationship_spec(paths_.relationships);
}

std::size_t Pipeline::default_rows() {
  return config_.sample_rows ? *config_.sample_rows : split().train.num_rows();
}

InferenceResult Pipeline::infer() {
  const auto& s = split();
  const PromptTemplates templates =
      config_.prompts_dir ? PromptTemplates::load(*config_.prompts_dir) : PromptTemplates::defaults();
  const PromptBundle bundle = build_prompt(s.train.schema(), config_.reasoner_task, templates);
  ReasonerBackend backend;
  if (config_.reasoner_backend == "rule_file") {
    backend = RuleFileBackend{config_.rule_file};
  } else {
    backend = config_.llm;
  }
  InferenceResult result =
      infer_relationships(backend, bundle, s.train, config_.rel_tol, config_.max_violation_fraction);
  fs::create_directories(paths_.root);
  save_relationship_spec(paths_.relationships, result.spec);
  json report = result.validation.to_json();
  report["dropped"] = result.dropped;
  write_json_file(paths_.validation_report, report);
  spdlog::info("infer: kept {} hierarchies, {} math groups, {} temporal chains", result.spec.hierarchies.size(),
               result.spec.math_groups.size(), result.spec.temporal_chains.size());
  return result;
}

void Pipeline::fit() {
  if (!fs::exists(paths_.relationships)) {
    throw UsageError(fmt::format("relationship spec '{}' not found; run infer-relationships first",
                                 paths_.relationships.string()));
  }
  const RelationshipSpec spec = load_relationship_spec(paths_.relationships);
  const auto& s = split();
  CompressResult cr = compress(s.train, spec);
  spdlog::info("fit: compressed {} columns to {}", s.train.num_columns(), cr.compressed.num_columns());

  const ColumnCodec codec = fit_codec(cr.compressed);
  const VaeModel vae = train_vae(cr.compressed, codec, config_.vae);
  const LatentMatrix latents = encode(vae, codec, cr.compressed, EncodeMode::kMean);
  const ScoreModel score = train_score(latents.values, config_.schedule, config_.diffusion);

  fs::create_directories(paths_.model_dir);
  write_json_file(paths_.codec, codec.to_json());
  vae.save(paths_.vae);
  score.save(paths_.diffusion);
  cr.context.save(paths_.context);

  json manifest{
      {"format", kManifestFormat},
      {"version", kManifestVersion},
      {"tool_version", kToolVersion},
      {"config_sha256", sha256_hex(config_.fingerprint.dump())},
      {"seeds",
       {{"split", config_.split_seed},
        {"vae", config_.vae.seed},
        {"diffusion", config_.diffusion.seed},
        {"sampler", config_.sampler.seed}}},
      {"inputs",
       {{"data_csv", sha256_file(config_.data_csv)},
        {"schema", sha256_file(config_.schema)},
        {"relationships", sha256_file(paths_.relationships)}}},
      {"artifacts",
       {{"codec.json", sha256_file(paths_.codec)},
        {"vae.json", sha256_file(paths_.vae)},
        {"diffusion.json", sha256_file(paths_.diffusion)},
        {"context.json", sha256_file(paths_.context)}}}};
  write_json_file(paths_.manifest, manifest);
}

void Pipeline::verify_bundle() const {
  if (!fs::exists(paths_.manifest)) {
    throw UsageError(fmt::format("model bundle manifest '{}' not found; run fit first", paths_.manifest.string()));
  }
  const json m = read_json_file(paths_.manifest);
  require_format(m, std::string(kManifestFormat), kManifestVersion);
  auto check = [](const std::string& want, const fs::path& p, const std::string& label) {
    if (!fs::exists(p)) throw DataError(fmt::format("bundle file {} is missing", label));
    if (sha256_file(p) != want) {
      throw DataError(fmt::format("{} does not match the bundle manifest (hash mismatch)", label));
    }
  };
  try {
    const auto& in = m.at("inputs");
    check(in.at("data_csv").get<std::string>(), config_.data_csv, "data file");
    check(in.at("schema").get<std::string>(), config_.schema, "schema file");
    check(in.at("relationships").get<std::string>(), paths_.relationships, "relationships.json");
    for (const auto& [name, hash] : m.at("artifacts").items()) {
      check(hash.get<std::string>(), paths_.model_dir / name, name);
    }
  } catch (const json::exception& e) {
    throw UsageError(fmt::format("malformed manifest: {}", e.what()));
  }
}

fs::path Pipeline::sample(std::optional<std::size_t> rows, std::optional<fs::path> out) {
  verify_bundle();
  const std::size_t n = rows ? *rows : default_rows();
  const ColumnCodec codec = ColumnCodec::from_json(read_json_file(paths_.codec));
  const VaeModel vae = VaeModel::load(paths_.vae);
  const ScoreModel score = ScoreModel::load(paths_.diffusion);
  const DecompressionContext ctx = DecompressionContext::load(paths_.context);
  if (codec.schema() != ctx.compressed_schema) throw DataError("codec and decompression context disagree on the schema");

  const Eigen::MatrixXd h = sample_latents(score, n, config_.sampler);
  const Table compressed = decode(vae, codec, h);
  DecompressStats stats;
  const Table synthetic = decompress(compressed, ctx, &stats);
  spdlog::info("sample: {} rows, {} temporal gaps clamped", n, stats.clamped_diffs);
  const fs::path target = out ? *out : paths_.synthetic_csv;
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  write_csv(target, synthetic);
  return target;
}

EvaluationReport Pipeline::evaluate(const fs::path& synthetic_csv, const fs::path& report_json,
                                    const fs::path& report_csv, const fs::path& report_summary) {
  if (fs::exists(paths_.manifest)) verify_bundle();
  const auto& s = split();
  std::ifstream in(synthetic_csv, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot open synthetic data '{}'", synthetic_csv.string()));
  const Table synth = parse_csv(in, load_schema(config_.schema));
  const EvaluationReport report = evaluate_all(s.train, s.test, synth, current_spec(), config_.evaluation);
  if (report_json.has_parent_path()) fs::create_directories(report_json.parent_path());
  report.save(report_json, report_csv);
  std::ofstream summary(report_summary, std::ios::binary);
  summary << report.summary_table();
  return report;
}

EvaluationReport Pipeline::evaluate(const fs::path& synthetic_csv) {
  return evaluate(synthetic_csv, paths_.report_json, paths_.report_csv, paths_.report_summary);
}

fs::path Pipeline::baseline_smote(std::optional<std::size_t> rows) {
  const auto& s = split();
  SmoteConfig cfg;
  cfg.k_neighbors = config_.smote_k_neighbors;
  cfg.n_samples = rows ? *rows : default_rows();
  cfg.seed = config_.smote_seed;
  const Table synthetic = smote_generate(s.train, cfg);
  fs::create_directories(paths_.root);
  write_csv(paths_.smote_csv, synthetic);
  return paths_.smote_csv;
}

void Pipeline::run_all(bool resume, bool with_smote) {
  auto skip = [&](const fs::path& p, const char* stage) {
    if (resume && fs::exists(p)) {
      spdlog::info("resume: skipping {} ({} exists)", stage, p.string());
      return true;
    }
    return false;
  };
  if (!skip(paths_.relationships, "infer")) infer();
  if (!skip(paths_.manifest, "fit")) fit();
  if (!skip(paths_.synthetic_csv, "sample")) sample();
  evaluate(paths_.synthetic_csv);
  if (with_smote || config_.smote_baseline) {
    if (!skip(paths_.smote_csv, "baseline-smote")) baseline_smote();
    evaluate(paths_.smote_csv, paths_.smote_report_json, paths_.smote_report_csv, paths_.smote_report_summary);
  }
}

}  // namespace tabflow
