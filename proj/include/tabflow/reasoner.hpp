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

#include <chrono>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tabflow/relationship.hpp"
#include "tabflow/table.hpp"

namespace tabflow {

enum class ReasoningTask { kHierarchy, kMath, kTemporal, kAll };

ReasoningTask parse_reasoning_task(std::string_view text);

/// Editable prompt text. Defaults are compiled in from assets/prompts.
struct PromptTemplates {
  std::string general;
  std::string hierarchy;
  std::string math;
  std::string temporal;
  std::string output_format;  // contains a "{schema}" placeholder

  static PromptTemplates defaults();
  /// Loads <dir>/{general,hierarchy,math,temporal,output_format}.txt; files
  /// that do not exist keep their default text.
  static PromptTemplates load(const std::filesystem::path& dir);
};

/// The reasoner input: general prompt, task instructions, and one serialized
/// column per line. Holds column names and descriptions only, never cell
/// values.
struct PromptBundle {
  std::string general_prompt;
  std::string instructions;
  std::vector<SerializedColumn> serialized_columns;

  /// Instructions followed by the serialized columns, one per line.
  std::string user_message() const;
};

PromptBundle build_prompt(std::span<const ColumnSchema> schema, ReasoningTask task,
                          const PromptTemplates& templates = PromptTemplates::defaults());

/// Chat-completion endpoint. The token is read from the named environment
/// variable at call time.
struct HttpLlmBackend {
  std::string endpoint;  // e.g. http://127.0.0.1:8080/v1/chat/completions
  std::string model;
  std::string token_env = "TABFLOW_LLM_TOKEN";
  double temperature = 0.0;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds timeout{60000};

  /// Endpoint from TABFLOW_LLM_ENDPOINT and model from TABFLOW_LLM_MODEL.
  static HttpLlmBackend from_environment();
};

struct RuleFileBackend {
  std::filesystem::path path;
};

using ReasonerBackend = std::variant<HttpLlmBackend, RuleFileBackend>;

/// POSTs {model, messages=[system, user], temperature} and returns the
/// assistant text. Retries 5xx responses and transport failures with
/// exponential backoff up to max_attempts; 401/403 raise AuthError, other
/// 4xx raise BackendError carrying the response body.
std::string call_llm(const HttpLlmBackend& backend, const PromptBundle& bundle);

/// Pulls the first balanced JSON object out of a model reply, tolerating
/// markdown code fences and surrounding prose. Throws BackendError when no
/// object parses.
std::string extract_json_object(std::string_view reply);

struct InferenceResult {
  RelationshipSpec spec;  // the surviving, validated groups
  ValidationReport validation;
  std::vector<std::string> dropped;  // one line per dropped group, with reason
};

/// Runs every backend in order and takes the union of their groups. Groups
/// that fail to parse, reference unknown columns, conflict with an earlier
/// group, or fail validate_spec on `table` are dropped and logged.
InferenceResult infer_relationships(std::span<const ReasonerBackend> backends,
                                    const PromptBundle& bundle, const Table& table,
                                    double rel_tol = kDefaultRelTol,
                                    double max_violation_fraction = kDefaultMaxViolationFraction);

InferenceResult infer_relationships(const ReasonerBackend& backend, const PromptBundle& bundle,
                                    const Table& table, double rel_tol = kDefaultRelTol,
                                    double max_violation_fraction = kDefaultMaxViolationFraction);

}  // namespace tabflow
