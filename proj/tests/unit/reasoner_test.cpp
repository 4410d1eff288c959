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

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "retail_fixture.hpp"
#include "tabflow/error.hpp"
#include "tabflow/reasoner.hpp"

namespace tabflow {
namespace {

using nlohmann::json;
using testing::make_retail_table;
using testing::retail_spec;

/// Chat-completion stub: answers from a handler on a free local port.
class StubServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit StubServer(Handler handler) {
    server_.Post("/v1/chat/completions", [this, handler](const httplib::Request& req, httplib::Response& res) {
      ++calls_;
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      handler(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }
  int calls() const { return calls_; }
  const std::string& last_body() const { return last_body_; }
  const std::string& last_auth() const { return last_auth_; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> calls_{0};
  std::string last_body_;
  std::string last_auth_;
};

std::string completion(const std::string& content) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}.dump();
}

HttpLlmBackend backend_for(const StubServer& s) {
  ::setenv("TABFLOW_TEST_TOKEN", "secret-token", 1);
  HttpLlmBackend b;
  b.endpoint = s.endpoint();
  b.model = "stub-model";
  b.token_env = "TABFLOW_TEST_TOKEN";
  b.initial_backoff = std::chrono::milliseconds(1);
  b.timeout = std::chrono::milliseconds(5000);
  return b;
}

TEST(Reasoner, PromptHoldsSerializedColumnsOnly) {
  const Table t = make_retail_table(20, 1);
  const auto bundle = build_prompt(t.schema(), ReasoningTask::kAll);
  ASSERT_EQ(bundle.serialized_columns.size(), t.num_columns());
  EXPECT_EQ(bundle.serialized_columns[0].text, "Order Id : Order code");
  const std::string msg = bundle.user_message();
  EXPECT_NE(msg.find("Order City : Destination city of the order"), std::string::npos);
  EXPECT_NE(msg.find("\"hierarchies\""), std::string::npos);
  EXPECT_NE(msg.find("\"temporal_chains\""), std::string::npos);
  EXPECT_EQ(msg.find("{schema}"), std::string::npos);
  // No cell values: a city token that appears only in the data is absent.
  EXPECT_EQ(msg.find("Newcastle NSW"), std::string::npos);
  EXPECT_FALSE(bundle.general_prompt.empty());
}

TEST(Reasoner, PromptForSingleTaskHasOnlyItsKey) {
  const Table t = make_retail_table(5, 1);
  const std::string msg = build_prompt(t.schema(), ReasoningTask::kTemporal).user_message();
  EXPECT_NE(msg.find("\"temporal_chains\""), std::string::npos);
  EXPECT_EQ(msg.find("\"math_groups\""), std::string::npos);
}

TEST(Reasoner, ExtractJsonObjectToleratesFencesAndProse) {
  EXPECT_EQ(extract_json_object("Sure! ```json\n{\"a\": 1}\n``` done"), "{\"a\": 1}");
  EXPECT_EQ(extract_json_object("{not json} then {\"b\": \"}\"}"), "{\"b\": \"}\"}");
  EXPECT_THROW(extract_json_object("no object here"), BackendError);
}

TEST(Reasoner, RuleFilePassthroughEmitsIdenticalSpec) {
  const auto dir = std::filesystem::temp_directory_path() / "tabflow_reasoner_rule";
  std::filesystem::create_directories(dir);
  save_relationship_spec(dir / "rules.json", retail_spec());
  const Table t = make_retail_table(300, 2);
  const auto result = infer_relationships(RuleFileBackend{dir / "rules.json"},
                                          build_prompt(t.schema(), ReasoningTask::kAll), t);
  EXPECT_TRUE(result.spec == retail_spec());
  EXPECT_TRUE(result.dropped.empty());
  std::filesystem::remove_all(dir);
}

TEST(Reasoner, InvalidRuleFileIsUsageError) {
  const auto dir = std::filesystem::temp_directory_path() / "tabflow_reasoner_bad";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "rules.json") << "{ broken";
  const Table t = make_retail_table(10, 2);
  EXPECT_THROW(infer_relationships(RuleFileBackend{dir / "rules.json"},
                                   build_prompt(t.schema(), ReasoningTask::kAll), t),
               UsageError);
  EXPECT_THROW(infer_relationships(RuleFileBackend{dir / "missing.json"},
                                   build_prompt(t.schema(), ReasoningTask::kAll), t),
               UsageError);
  std::filesystem::remove_all(dir);
}

TEST(Reasoner, LlmReplyIsParsedFilteredAndValidated) {
  json reply = to_json(retail_spec());
  // A bogus hierarchy (Type does not determine Market), an unknown column,
  // and a malformed formula.
  reply["hierarchies"].push_back({{"granular", "Type"}, {"ancestors", {"Customer Segment"}}});
  reply["hierarchies"].push_back({{"granular", "Nope"}, {"ancestors", {"Market"}}});
  reply["math_groups"].push_back(
      {{"independents", {"Latitude"}}, {"derived", {{{"column", "Longitude"}, {"formula", "Latitude *"}}}}});
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion("Here you go:\n```json\n" + reply.dump(2) + "\n```"), "application/json");
  });
  const Table t = make_retail_table(400, 3);
  const auto result = infer_relationships(backend_for(server), build_prompt(t.schema(), ReasoningTask::kAll), t);
  EXPECT_TRUE(result.spec == retail_spec());
  EXPECT_EQ(result.dropped.size(), 3u);
  EXPECT_EQ(server.last_auth(), "Bearer secret-token");
  const json sent = json::parse(server.last_body());
  EXPECT_EQ(sent["model"], "stub-model");
  EXPECT_EQ(sent["messages"][0]["role"], "system");
  EXPECT_EQ(sent["messages"][1]["role"], "user");
}

TEST(Reasoner, RetriesServerErrorsThenSucceeds) {
  std::atomic<int> n{0};
  StubServer server([&](const httplib::Request&, httplib::Response& res) {
    if (n++ < 2) {
      res.status = 503;
      res.set_content("busy", "text/plain");
      return;
    }
    res.set_content(completion("{\"temporal_chains\": []}"), "application/json");
  });
  auto b = backend_for(server);
  b.max_attempts = 3;
  PromptBundle bundle;
  bundle.general_prompt = "g";
  EXPECT_EQ(call_llm(b, bundle), "{\"temporal_chains\": []}");
  EXPECT_EQ(server.calls(), 3);
}

TEST(Reasoner, GivesUpAfterMaxAttempts) {
  StubServer server([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  auto b = backend_for(server);
  b.max_attempts = 2;
  EXPECT_THROW(call_llm(b, PromptBundle{}), BackendError);
  EXPECT_EQ(server.calls(), 2);
}

TEST(Reasoner, AuthAndClientErrorsAreNotRetried) {
  {
    StubServer server([](const httplib::Request&, httplib::Response& res) { res.status = 401; });
    EXPECT_THROW(call_llm(backend_for(server), PromptBundle{}), AuthError);
    EXPECT_EQ(server.calls(), 1);
  }
  {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
      res.status = 400;
      res.set_content("bad model", "text/plain");
    });
    try {
      call_llm(backend_for(server), PromptBundle{});
      FAIL();
    } catch (const AuthError&) {
      FAIL();
    } catch (const BackendError& e) {
      EXPECT_NE(std::string(e.what()).find("bad model"), std::string::npos);
    }
    EXPECT_EQ(server.calls(), 1);
  }
}

TEST(Reasoner, MissingTokenOrEndpoint) {
  HttpLlmBackend b;
  b.endpoint = "http://127.0.0.1:9/v1/chat/completions";
  b.token_env = "TABFLOW_TEST_UNSET_TOKEN";
  ::unsetenv("TABFLOW_TEST_UNSET_TOKEN");
  EXPECT_THROW(call_llm(b, PromptBundle{}), BackendError);
  b.endpoint.clear();
  EXPECT_THROW(call_llm(b, PromptBundle{}), UsageError);
}

TEST(Reasoner, NonJsonReplyIsBackendError) {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion("I cannot help with that."), "application/json");
  });
  const Table t = make_retail_table(10, 3);
  EXPECT_THROW(infer_relationships(backend_for(server), build_prompt(t.schema(), ReasoningTask::kAll), t),
               BackendError);
}

}  // namespace
}  // namespace tabflow
