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

#ifndef TOOLPILOT_AGENT_HPP_
#define TOOLPILOT_AGENT_HPP_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "toolpilot/demo_selector.hpp"
#include "toolpilot/records.hpp"
#include "toolpilot/retriever.hpp"

namespace toolpilot {

struct ToolCall {
  std::string api_id;
  Json arguments = Json::object();
  friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

struct Finish {
  std::string answer;
  friend bool operator==(const Finish&, const Finish&) = default;
};

using AgentAction = std::variant<ToolCall, Finish>;

// {"action": id, "arguments": {...}} or {"final_answer": text}.
Json ActionToJson(const AgentAction& action);

struct AgentStep {
  std::string prompt;
  std::string raw_llm_output;
  std::optional<AgentAction> parsed;  // validated call, or finish
  std::optional<std::string> error;   // parse / validation / backend error
  std::optional<std::string> observation;
  bool tool_ok = false;

  friend bool operator==(const AgentStep&, const AgentStep&) = default;
};

enum class Termination { kFinished, kMaxSteps, kUnrecoverableError };

std::string_view TerminationName(Termination t);
Termination ParseTermination(std::string_view name);

struct AgentTrace {
  std::string instruction;
  std::vector<std::string> prompt_api_ids;
  std::optional<std::string> demo_source;
  std::vector<AgentStep> steps;
  std::optional<std::string> final_answer;
  Termination termination = Termination::kMaxSteps;

  // Calls that passed validation and executed without a tool error.
  std::vector<ToolCall> SuccessfulCalls() const;

  friend bool operator==(const AgentTrace&, const AgentTrace&) = default;
};

inline constexpr int kTraceSchemaVersion = 1;

Json TraceToJson(const AgentTrace& trace);
AgentTrace TraceFromJson(const Json& doc);
// A suite file: {"schema": "trace_suite", "version": 1, "traces": [...]}.
std::string SerializeTraceSuite(std::span<const AgentTrace> traces);
std::vector<AgentTrace> ParseTraceSuite(std::string_view text);

// Request/response boundary to a language model.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  // Throws BackendError on failure.
  virtual std::string Complete(const std::string& prompt) = 0;
};

struct ToolResult {
  bool ok = true;
  std::string observation;
};

// Executes validated tool calls.
class ToolRegistry {
 public:
  virtual ~ToolRegistry() = default;
  virtual ToolResult Execute(const ToolCall& call) = 0;
};

struct PromptTemplate {
  std::string preamble;
  std::string format_instructions;

  static const PromptTemplate& Default();
};

// Preamble, numbered API list with parameter schemas, optional demo block,
// instruction, response format. Byte-stable for identical inputs.
std::string AssemblePrompt(std::string_view instruction,
                           std::span<const ApiRecord> apis,
                           std::string_view demo_block,
                           const PromptTemplate& tmpl = PromptTemplate::Default());

// "Action: ...\nObservation: ...\n" blocks, one per step, blank-line
// separated. Error steps use "Error:" in place of "Observation:".
std::string SerializeHistory(std::span<const AgentStep> steps);

// Base prompt plus the history of the steps taken so far.
std::string PromptWithHistory(std::string_view base_prompt,
                              std::span<const AgentStep> steps);

// API ids listed in the API section of an assembled prompt, in order.
std::vector<std::string> PromptApiIds(std::string_view prompt);

// Extracts the first JSON object in `raw` and interprets it as an action.
// A free-text prefix before the object is ignored. Throws MalformedAction.
AgentAction ParseAction(std::string_view raw);

// Checks a call against the schemas of the APIs offered in the prompt and
// coerces argument values:
//
//   type    accepted                           result
//   int     integer; integral float; "[+-]d+"  integer
//   float   any number; numeric string         float
//   bool    true/false; "true"/"false"         bool
//   string  string                             string
//
// Throws UnknownApi or ParamError (missing / type mismatch / unexpected).
ToolCall ValidateCall(const ToolCall& call, std::span<const ApiRecord> apis);

struct EpisodeConfig {
  int max_steps = 10;
  int retry_budget = 3;  // consecutive parse/validation errors tolerated

  void Validate() const;
};

// Interact loop: prompt -> backend -> parse -> validate -> execute, at most
// max_steps times. Every failure mode is recorded in the trace.
AgentTrace RunEpisode(std::string_view instruction,
                      std::span<const ApiRecord> apis,
                      std::string_view demo_block, LlmBackend& backend,
                      ToolRegistry& registry, const EpisodeConfig& config,
                      const PromptTemplate& tmpl = PromptTemplate::Default());

// Everything the end-to-end path needs, loaded and fingerprint-checked.
struct PipelineConfig {
  int retriever_k = 5;
  bool use_demos = true;
  DemoSelectorConfig demo;
  EpisodeConfig episode;
};

class Pipeline {
 public:
  // Throws StaleIndex when `index` was built with a different encoder.
  Pipeline(const EncoderParams& params, const ApiIndex& index,
           std::span<const ApiRecord> apis, std::span<const DemoRecord> demos,
           PipelineConfig config,
           PromptTemplate tmpl = PromptTemplate::Default());

  // Retrieve top-k APIs, select demos, render, run the episode.
  AgentTrace Run(std::string_view instruction, LlmBackend& backend,
                 ToolRegistry& registry) const;

  // Runs the episode over a caller-chosen API list, skipping retrieval.
  AgentTrace RunWithApis(std::string_view instruction,
                         std::span<const ApiRecord> apis, LlmBackend& backend,
                         ToolRegistry& registry, bool with_demos) const;

  std::vector<ApiRecord> RetrieveApis(std::string_view instruction) const;
  const std::vector<ApiRecord>& apis() const { return apis_; }
  const PipelineConfig& config() const { return config_; }

 private:
  std::string DemoBlock(std::string_view instruction,
                        std::optional<std::string>* source) const;

  const EncoderParams* params_;
  const ApiIndex* index_;
  std::vector<ApiRecord> apis_;
  std::vector<DemoRecord> demos_;
  DemoPool knowledge_db_;
  DemoPool api_demos_;
  PipelineConfig config_;
  PromptTemplate tmpl_;
};

}  // namespace toolpilot

#endif  // TOOLPILOT_AGENT_HPP_
