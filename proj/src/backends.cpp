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

#include "toolpilot/backends.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "toolpilot/errors.hpp"
#include "toolpilot/hashing.hpp"

namespace toolpilot {
namespace {

std::vector<std::string_view> Lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return lines;
}

bool Blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::size_t CountObservations(const std::string& prompt) {
  const std::size_t history = prompt.find("\n## History\n");
  if (history == std::string::npos) return 0;
  std::size_t count = 0;
  for (std::size_t pos = prompt.find("\nObservation: ", history);
       pos != std::string::npos;
       pos = prompt.find("\nObservation: ", pos + 1)) {
    ++count;
  }
  return count;
}

}  // namespace

ScriptedBackend::ScriptedBackend(std::vector<std::string> responses)
    : responses_(std::move(responses)) {}

std::vector<std::string> ScriptedBackend::ParseScript(std::string_view text) {
  std::vector<std::string> responses;
  std::size_t line_no = 0;
  for (auto line : Lines(text)) {
    ++line_no;
    if (Blank(line)) continue;
    const Json doc = Json::parse(line, nullptr, false);
    if (doc.is_string()) {
      responses.push_back(doc.get<std::string>());
    } else if (doc.is_object() && doc.contains("response") &&
               doc["response"].is_string()) {
      responses.push_back(doc["response"].get<std::string>());
    } else {
      throw ParseError(line_no, "expected a JSON string or {\"response\": ...}");
    }
  }
  return responses;
}

std::string ScriptedBackend::Complete(const std::string&) {
  std::lock_guard lock(mu_);
  if (cursor_ >= responses_.size()) {
    throw BackendError("scripted backend exhausted after " +
                       std::to_string(responses_.size()) + " responses");
  }
  return responses_[cursor_++];
}

PromptMapBackend::PromptMapBackend(std::map<std::string, std::string> by_hash)
    : by_hash_(std::move(by_hash)) {}

PromptMapBackend PromptMapBackend::FromJsonLines(std::string_view text) {
  std::map<std::string, std::string> by_hash;
  std::size_t line_no = 0;
  for (auto line : Lines(text)) {
    ++line_no;
    if (Blank(line)) continue;
    const Json doc = Json::parse(line, nullptr, false);
    if (!doc.is_object() || !doc.contains("prompt_hash") ||
        !doc.contains("response") || !doc["prompt_hash"].is_string() ||
        !doc["response"].is_string()) {
      throw ParseError(line_no, "expected {\"prompt_hash\", \"response\"}");
    }
    by_hash[doc["prompt_hash"].get<std::string>()] =
        doc["response"].get<std::string>();
  }
  return PromptMapBackend(std::move(by_hash));
}

std::string PromptMapBackend::PromptHash(std::string_view prompt) {
  return HexDigest(Fnv1a64(prompt));
}

std::string PromptMapBackend::Complete(const std::string& prompt) {
  const auto it = by_hash_.find(PromptHash(prompt));
  if (it == by_hash_.end()) {
    throw BackendError("no scripted response for prompt " + PromptHash(prompt));
  }
  return it->second;
}

OracleBackend::OracleBackend(GoldTrajectory gold, bool require_gold_apis)
    : gold_(std::move(gold)), require_gold_apis_(require_gold_apis) {}

std::string OracleBackend::Complete(const std::string& prompt) {
  if (require_gold_apis_) {
    const auto offered = PromptApiIds(prompt);
    for (const auto& call : gold_.calls) {
      if (std::find(offered.begin(), offered.end(), call.api_id) ==
          offered.end()) {
        return Json{{"final_answer", kGiveUpAnswer}}.dump();
      }
    }
  }
  const std::size_t next = CountObservations(prompt);
  if (next < gold_.calls.size()) {
    const auto& call = gold_.calls[next];
    return Json{{"action", call.api_id},
                {"arguments", call.required_arguments}}
        .dump();
  }
  return Json{{"final_answer", gold_.reference_answer.value_or("done")}}.dump();
}

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)) {
  const auto scheme_end = config_.url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("backend url must start with http:// or https://");
  }
  const auto path_start = config_.url.find('/', scheme_end + 3);
  scheme_host_ = config_.url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.url.substr(path_start);
  if (config_.retries < 0) throw ConfigError("retries must be >= 0");
}

Json HttpBackend::RequestBody(const std::string& prompt) const {
  return Json{{"model", config_.model},
              {"messages", Json::array({Json{{"role", "user"},
                                             {"content", prompt}}})},
              {"temperature", config_.temperature}};
}

std::string HttpBackend::ParseResponse(std::string_view body) {
  const Json doc = Json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw BackendError("response is not JSON");
  try {
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception&) {
    throw BackendError("response lacks choices[0].message.content");
  }
}

std::string HttpBackend::Complete(const std::string& prompt) {
  httplib::Headers headers;
  if (const char* token = std::getenv(config_.token_env.c_str())) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  const std::string body = RequestBody(prompt).dump();
  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::seconds(attempt));
    httplib::Client client(scheme_host_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500 || res->status == 429) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError("HTTP " + std::to_string(res->status) + ": " +
                         res->body.substr(0, 200));
    }
    return ParseResponse(res->body);
  }
  throw BackendError("request failed after retries: " + last_error);
}

MockToolRegistry::MockToolRegistry(std::span<const ApiRecord> apis) {
  for (const auto& api : apis) apis_.emplace(api.id, api);
}

ToolResult MockToolRegistry::Execute(const ToolCall& call) {
  if (!apis_.contains(call.api_id)) {
    return {false, "tool error: no provider for '" + call.api_id + "'"};
  }
  const std::string canonical =
      Json{{"action", call.api_id}, {"arguments", call.arguments}}.dump();
  Json obs{{"api", call.api_id},
           {"status", "ok"},
           {"result", HexDigest(Fnv1a64(canonical))}};
  return {true, obs.dump()};
}

}  // namespace toolpilot
