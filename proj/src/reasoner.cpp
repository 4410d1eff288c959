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

#include "tabflow/reasoner.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "tabflow/embedded_assets.hpp"
#include "tabflow/error.hpp"

namespace tabflow {

using nlohmann::json;

ReasoningTask parse_reasoning_task(std::string_view text) {
  if (text == "hierarchy") return ReasoningTask::kHierarchy;
  if (text == "math") return ReasoningTask::kMath;
  if (text == "temporal") return ReasoningTask::kTemporal;
  if (text == "all") return ReasoningTask::kAll;
  throw UsageError(fmt::format("unknown reasoning task '{}'", text));
}

PromptTemplates PromptTemplates::defaults() {
  return {std::string(assets::kAsset_general), std::string(assets::kAsset_hierarchy),
          std::string(assets::kAsset_math), std::string(assets::kAsset_temporal),
          std::string(assets::kAsset_output_format)};
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  PromptTemplates t = defaults();
  auto read = [&](const char* name, std::string& into) {
    std::ifstream in(dir / (std::string(name) + ".txt"), std::ios::binary);
    if (!in) return;
    std::ostringstream buf;
    buf << in.rdbuf();
    into = buf.str();
  };
  read("general", t.general);
  read("hierarchy", t.hierarchy);
  read("math", t.math);
  read("temporal", t.temporal);
  read("output_format", t.output_format);
  return t;
}

std::string PromptBundle::user_message() const {
  std::string out = instructions;
  out += "\nColumns:\n";
  for (const auto& c : serialized_columns) {
    out += c.text;
    out += '\n';
  }
  return out;
}

PromptBundle build_prompt(std::span<const ColumnSchema> schema, ReasoningTask task,
                          const PromptTemplates& templates) {
  if (schema.empty()) throw UsageError("cannot build a prompt for an empty schema");
  const bool all = task == ReasoningTask::kAll;
  std::string instructions;
  std::vector<std::string> keys;
  if (all || task == ReasoningTask::kHierarchy) {
    instructions += templates.hierarchy + "\n";
    keys.push_back(R"("hierarchies": [{"granular": "<column>", "ancestors": ["<column>", ...]}])");
  }
  if (all || task == ReasoningTask::kMath) {
    instructions += templates.math + "\n";
    keys.push_back(
        R"("math_groups": [{"independents": ["<column>", ...], "derived": [{"column": "<column>", "formula": "<infix formula>"}]}])");
  }
  if (all || task == ReasoningTask::kTemporal) {
    instructions += templates.temporal + "\n";
    keys.push_back(R"("temporal_chains": [["<earliest column>", "<next column>", ...]])");
  }
  std::string schema_text = "{";
  for (std::size_t i = 0; i < keys.size(); ++i) {
    schema_text += (i == 0 ? "" : ",\n ") + keys[i];
  }
  schema_text += "}";
  std::string format = templates.output_format;
  if (auto pos = format.find("{schema}"); pos != std::string::npos) {
    format.replace(pos, 8, schema_text);
  } else {
    format += "\n" + schema_text + "\n";
  }
  instructions += format;
  return {templates.general, std::move(instructions), serialize_columns(schema)};
}

HttpLlmBackend HttpLlmBackend::from_environment() {
  HttpLlmBackend b;
  if (const char* e = std::getenv("TABFLOW_LLM_ENDPOINT")) b.endpoint = e;
  if (const char* m = std::getenv("TABFLOW_LLM_MODEL")) b.model = m;
  return b;
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw UsageError(fmt::format("LLM endpoint '{}' needs an http:// or https:// scheme", url));
  }
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/v1/chat/completions"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

std::string call_llm(const HttpLlmBackend& backend, const PromptBundle& bundle) {
  if (backend.endpoint.empty()) throw UsageError("LLM backend has no endpoint");
  const char* token = std::getenv(backend.token_env.c_str());
  if (token == nullptr || *token == '\0') {
    throw BackendError(fmt::format("environment variable {} holds no LLM token", backend.token_env));
  }
  const Endpoint ep = split_endpoint(backend.endpoint);

  json body{{"model", backend.model},
            {"messages",
             json::array({{{"role", "system"}, {"content", bundle.general_prompt}},
                          {{"role", "user"}, {"content", bundle.user_message()}}})},
            {"temperature", backend.temperature}};
  const std::string payload = body.dump();

  httplib::Client client(ep.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(backend.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(backend.timeout - secs);
  client.set_connection_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
  client.set_read_timeout(static_cast<time_t>(secs.count()), static_cast<time_t>(usecs.count()));
  const httplib::Headers headers{{"Authorization", std::string("Bearer ") + token}};

  std::string last_failure;
  auto backoff = backend.initial_backoff;
  for (int attempt = 1; attempt <= backend.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post(ep.path, headers, payload, "application/json");
    if (!res) {
      last_failure = fmt::format("transport error: {}", httplib::to_string(res.error()));
      spdlog::warn("LLM attempt {}/{} failed: {}", attempt, backend.max_attempts, last_failure);
      continue;
    }
    if (res->status >= 500) {
      last_failure = fmt::format("HTTP {}: {}", res->status, res->body);
      spdlog::warn("LLM attempt {}/{} failed: HTTP {}", attempt, backend.max_attempts, res->status);
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw AuthError(fmt::format("LLM endpoint rejected credentials (HTTP {}): {}", res->status,
                                  res->body));
    }
    if (res->status >= 400) {
      throw BackendError(fmt::format("LLM request failed (HTTP {}): {}", res->status, res->body));
    }
    json reply;
    try {
      reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw BackendError(fmt::format("unexpected LLM response shape: {}", e.what()));
    }
  }
  throw BackendError(fmt::format("LLM request failed after {} attempts; last failure: {}",
                                 backend.max_attempts, last_failure));
}

std::string extract_json_object(std::string_view reply) {
  // Scan every '{' as a candidate start and return the first balanced object
  // that parses; braces inside strings are skipped.
  for (std::size_t start = reply.find('{'); start != std::string_view::npos;
       start = reply.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < reply.size(); ++i) {
      const char ch = reply[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (ch == '\\') {
          escaped = true;
        } else if (ch == '"') {
          in_string = false;
        }
        continue;
      }
      if (ch == '"') {
        in_string = true;
      } else if (ch == '{') {
        ++depth;
      } else if (ch == '}' && --depth == 0) {
        std::string candidate(reply.substr(start, i - start + 1));
        if (json::accept(candidate)) return candidate;
        break;
      }
    }
  }
  throw BackendError("reasoner reply contains no JSON object");
}

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot open rule file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string raw_spec(const ReasonerBackend& backend, const PromptBundle& bundle) {
  if (const auto* rule = std::get_if<RuleFileBackend>(&backend)) return read_text(rule->path);
  return extract_json_object(call_llm(std::get<HttpLlmBackend>(backend), bundle));
}

template <typename Group>
void offer(SpecAccumulator& acc, const Group& group, const json& source,
           std::vector<std::string>& dropped) {
  auto problems = acc.add(group);
  if (problems.empty()) return;
  std::string line = fmt::format("{}: {}", source.dump(), fmt::join(problems, "; "));
  spdlog::warn("reasoner: dropping group {}", line);
  dropped.push_back(std::move(line));
}

}  // namespace

InferenceResult infer_relationships(std::span<const ReasonerBackend> backends,
                                    const PromptBundle& bundle, const Table& table,
                                    double rel_tol, double max_violation_fraction) {
  SpecAccumulator acc(table.schema());
  InferenceResult result;

  for (const auto& backend : backends) {
    json doc;
    try {
      doc = json::parse(raw_spec(backend, bundle));
    } catch (const json::exception& e) {
      if (std::holds_alternative<RuleFileBackend>(backend)) {
        throw UsageError(fmt::format("rule file is not valid JSON: {}", e.what()));
      }
      throw BackendError(fmt::format("reasoner reply is not valid JSON: {}", e.what()));
    }
    if (!doc.is_object()) throw BackendError("reasoner output is not a JSON object");

    // Parse group by group so one malformed entry does not sink the rest.
    auto each = [&](const char* key, auto&& handle) {
      if (!doc.contains(key)) return;
      if (!doc[key].is_array()) {
        result.dropped.push_back(fmt::format("'{}' is not an array", key));
        return;
      }
      for (const auto& item : doc[key]) {
        try {
          handle(relationship_spec_from_json(json{{key, json::array({item})}}), item);
        } catch (const UsageError& e) {
          std::string line = fmt::format("{}: {}", item.dump(), e.what());
          spdlog::warn("reasoner: dropping malformed group {}", line);
          result.dropped.push_back(std::move(line));
        }
      }
    };
    each("hierarchies", [&](const RelationshipSpec& s, const json& item) {
      offer(acc, s.hierarchies.front(), item, result.dropped);
    });
    each("math_groups", [&](const RelationshipSpec& s, const json& item) {
      offer(acc, s.math_groups.front(), item, result.dropped);
    });
    each("temporal_chains", [&](const RelationshipSpec& s, const json& item) {
      offer(acc, s.temporal_chains.front(), item, result.dropped);
    });
  }

  const RelationshipSpec& candidate = acc.spec();
  result.validation = validate_spec(candidate, table, rel_tol, max_violation_fraction);
  for (const auto& g : result.validation.groups) {
    if (g.passed) continue;
    std::string line = fmt::format("{}: violation fraction {:.6f} exceeds {}", g.label,
                                   g.violation_fraction, max_violation_fraction);
    spdlog::warn("reasoner: dropping group {}", line);
    result.dropped.push_back(std::move(line));
  }
  result.spec = passing_groups(candidate, result.validation);
  if (result.spec.empty()) {
    spdlog::warn("reasoner: no relationship survived validation; synthesis runs without compression");
  }
  return result;
}

InferenceResult infer_relationships(const ReasonerBackend& backend, const PromptBundle& bundle,
                                    const Table& table, double rel_tol,
                                    double max_violation_fraction) {
  return infer_relationships(std::span<const ReasonerBackend>(&backend, 1), bundle, table, rel_tol,
                             max_violation_fraction);
}

}  // namespace tabflow
