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

#ifndef TOOLPILOT_CONFIG_HPP_
#define TOOLPILOT_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "toolpilot/agent.hpp"
#include "toolpilot/backends.hpp"
#include "toolpilot/encoder.hpp"
#include "toolpilot/eval.hpp"
#include "toolpilot/training.hpp"

namespace toolpilot {

struct BackendConfig {
  // oracle | gated_oracle | scripted | prompt_map | constant | http
  std::string type = "oracle";
  std::string script;    // scripted / prompt_map: JSON-lines file
  std::string response;  // constant
  HttpBackendConfig http;
};

struct PathsConfig {
  std::string apis;
  std::string demos;
  std::string params;
  std::string index;
  std::string pairs;
  std::string suite;  // gold trajectories for suite runs
};

// Structured run configuration. Every section is optional; missing keys
// keep their defaults and unknown keys are rejected.
struct RunConfig {
  EncoderConfig encoder;
  TrainConfig training;
  int retriever_k = 5;
  bool include_parameters = false;
  DemoSelectorConfig demo_selector;
  bool use_demos = true;
  EpisodeConfig agent;
  MatchMode match_mode = MatchMode::kStrictSequence;
  AblationRow suite_row = AblationRow::kRetrieverDemos;
  BackendConfig backend;
  PathsConfig paths;
  std::uint64_t seed = 0;

  // Throws ConfigError naming the offending key.
  static RunConfig FromJson(const Json& doc);
  static RunConfig Load(const std::filesystem::path& path);
  Json ToJson() const;
  void Validate() const;

  // FNV-1a 64 of the canonical JSON dump.
  std::uint64_t Hash() const;

  PipelineConfig Pipeline() const;
};

// Backend factory for suite runs. Scripted backends restart their script
// for every episode. Throws ConfigError for unknown types.
BackendFactory MakeBackendFactory(const BackendConfig& config);

// Single backend for a run without gold trajectories. Oracle types are
// rejected with ConfigError.
std::unique_ptr<LlmBackend> MakeBackend(const BackendConfig& config);

}  // namespace toolpilot

#endif  // TOOLPILOT_CONFIG_HPP_
