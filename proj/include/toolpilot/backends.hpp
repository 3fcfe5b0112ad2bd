// Copyright 2026 The Toolpilot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TOOLPILOT_BACKENDS_HPP_
#define TOOLPILOT_BACKENDS_HPP_

#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "toolpilot/agent.hpp"
#include "toolpilot/records.hpp"

namespace toolpilot {

// Replays a fixed list of responses in order. Throws BackendError once the
// script is exhausted. Safe for concurrent use; calls are serialized.
class ScriptedBackend : public LlmBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> responses);
  // One JSON string per line, or objects {"response": "..."}.
  static std::vector<std::string> ParseScript(std::string_view text);

  std::string Complete(const std::string& prompt) override;

 private:
  std::mutex mu_;
  std::vector<std::string> responses_;
  std::size_t cursor_ = 0;
};

// Looks the prompt up by FNV-1a 64 hex digest. Stateless.
class PromptMapBackend : public LlmBackend {
 public:
  explicit PromptMapBackend(std::map<std::string, std::string> by_hash);
  // JSON-lines of {"prompt_hash": "...", "response": "..."}.
  static PromptMapBackend FromJsonLines(std::string_view text);
  static std::string PromptHash(std::string_view prompt);

  std::string Complete(const std::string& prompt) override;

 private:
  std::map<std::string, std::string> by_hash_;
};

// Returns the same response for every prompt.
class ConstantBackend : public LlmBackend {
 public:
  explicit ConstantBackend(std::string response)
      : response_(std::move(response)) {}
  std::string Complete(const std::string&) override { return response_; }

 private:
  std::string response_;
};

// Replays a gold trajectory. Stateless: the i-th gold call is emitted when
// the prompt history holds i observations, then the reference answer. With
// `require_gold_apis`, it gives up with a final answer whenever the prompt
// does not offer every gold API.
class OracleBackend : public LlmBackend {
 public:
  explicit OracleBackend(GoldTrajectory gold, bool require_gold_apis = false);
  std::string Complete(const std::string& prompt) override;

  static constexpr std::string_view kGiveUpAnswer =
      "unable to complete: required APIs are not available";

 private:
  GoldTrajectory gold_;
  bool require_gold_apis_;
};

struct HttpBackendConfig {
  std::string url;  // http[s]://host[:port]/path
  std::string model;
  std::string token_env = "TOOLPILOT_API_TOKEN";
  double temperature = 0.0;
  std::chrono::seconds timeout{60};
  int retries = 2;
};

// OpenAI-style chat completion endpoint. The response's first choice
// message content is the completion. Not deterministic.
class HttpBackend : public LlmBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  std::string Complete(const std::string& prompt) override;

  // Request body sent for `prompt`.
  Json RequestBody(const std::string& prompt) const;
  // Extracts choices[0].message.content. Throws BackendError.
  static std::string ParseResponse(std::string_view body);

 private:
  HttpBackendConfig config_;
  std::string scheme_host_;
  std::string path_;
};

// Deterministic stand-in for the tool service providers: echoes the call
// together with a digest of its canonical JSON.
class MockToolRegistry : public ToolRegistry {
 public:
  explicit MockToolRegistry(std::span<const ApiRecord> apis);
  ToolResult Execute(const ToolCall& call) override;

 private:
  std::map<std::string, ApiRecord> apis_;
};

}  // namespace toolpilot

#endif  // TOOLPILOT_BACKENDS_HPP_
