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

#include "toolpilot/agent.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <unordered_map>

#include "toolpilot/errors.hpp"

namespace toolpilot {
namespace {

constexpr std::string_view kApiHeader = "## Available APIs\n";
constexpr std::string_view kHistoryHeader = "## History\n";

std::string OneLine(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) out += (c == '\n' || c == '\r') ? ' ' : c;
  return out;
}

// End of the balanced object starting at text[begin] == '{', honoring
// string literals. npos when unbalanced.
std::size_t MatchObject(std::string_view text, std::size_t begin) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = begin; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::string_view::npos;
}

std::optional<Json> FirstJsonObject(std::string_view raw) {
  for (std::size_t pos = raw.find('{'); pos != std::string_view::npos;
       pos = raw.find('{', pos + 1)) {
    const std::size_t end = MatchObject(raw, pos);
    if (end == std::string_view::npos) continue;
    Json doc = Json::parse(raw.substr(pos, end - pos + 1), nullptr, false);
    if (!doc.is_discarded() && doc.is_object()) return doc;
  }
  return std::nullopt;
}

std::optional<Json> CoerceInt(const Json& v) {
  if (v.is_number_integer()) return Json(v.get<std::int64_t>());
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && std::floor(d) == d && std::fabs(d) < 9.0e15) {
      return Json(static_cast<std::int64_t>(d));
    }
    return std::nullopt;
  }
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    std::size_t i = (!s.empty() && (s[0] == '+' || s[0] == '-')) ? 1 : 0;
    if (i == s.size()) return std::nullopt;
    for (std::size_t j = i; j < s.size(); ++j) {
      if (s[j] < '0' || s[j] > '9') return std::nullopt;
    }
    errno = 0;
    const long long parsed = std::strtoll(s.c_str(), nullptr, 10);
    if (errno == ERANGE) return std::nullopt;
    return Json(static_cast<std::int64_t>(parsed));
  }
  return std::nullopt;
}

std::optional<Json> CoerceFloat(const Json& v) {
  if (v.is_number()) return Json(v.get<double>());
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s.empty() || std::isspace(static_cast<unsigned char>(s[0]))) {
      return std::nullopt;
    }
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(d)) {
      return std::nullopt;
    }
    return Json(d);
  }
  return std::nullopt;
}

std::optional<Json> CoerceBool(const Json& v) {
  if (v.is_boolean()) return v;
  if (v.is_string()) {
    if (v == "true") return Json(true);
    if (v == "false") return Json(false);
  }
  return std::nullopt;
}

std::optional<Json> Coerce(ParamType type, const Json& v) {
  switch (type) {
    case ParamType::kInt:
      return CoerceInt(v);
    case ParamType::kFloat:
      return CoerceFloat(v);
    case ParamType::kBool:
      return CoerceBool(v);
    case ParamType::kString:
      if (v.is_string()) return v;
      return std::nullopt;
  }
  return std::nullopt;
}

template <typename T>
std::optional<T> OptionalField(const Json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

Json ActionToJson(const AgentAction& action) {
  if (const auto* call = std::get_if<ToolCall>(&action)) {
    return Json{{"action", call->api_id}, {"arguments", call->arguments}};
  }
  return Json{{"final_answer", std::get<Finish>(action).answer}};
}

std::string_view TerminationName(Termination t) {
  switch (t) {
    case Termination::kFinished:
      return "finished";
    case Termination::kMaxSteps:
      return "max_steps";
    case Termination::kUnrecoverableError:
      return "unrecoverable_error";
  }
  return "max_steps";
}

Termination ParseTermination(std::string_view name) {
  if (name == "finished") return Termination::kFinished;
  if (name == "max_steps") return Termination::kMaxSteps;
  if (name == "unrecoverable_error") return Termination::kUnrecoverableError;
  throw FormatError("unknown termination '" + std::string(name) + "'");
}

std::vector<ToolCall> AgentTrace::SuccessfulCalls() const {
  std::vector<ToolCall> calls;
  for (const auto& step : steps) {
    if (!step.tool_ok || !step.parsed) continue;
    if (const auto* call = std::get_if<ToolCall>(&*step.parsed)) {
      calls.push_back(*call);
    }
  }
  return calls;
}

Json TraceToJson(const AgentTrace& trace) {
  Json steps = Json::array();
  for (const auto& step : trace.steps) {
    Json s;
    s["prompt"] = step.prompt;
    s["raw_llm_output"] = step.raw_llm_output;
    s["action"] = step.parsed ? ActionToJson(*step.parsed) : Json(nullptr);
    s["error"] = step.error ? Json(*step.error) : Json(nullptr);
    s["observation"] =
        step.observation ? Json(*step.observation) : Json(nullptr);
    s["tool_ok"] = step.tool_ok;
    steps.push_back(std::move(s));
  }
  Json doc;
  doc["schema"] = "trace";
  doc["version"] = kTraceSchemaVersion;
  doc["instruction"] = trace.instruction;
  doc["prompt_api_ids"] = trace.prompt_api_ids;
  doc["demo_source"] =
      trace.demo_source ? Json(*trace.demo_source) : Json(nullptr);
  doc["steps"] = std::move(steps);
  doc["final_answer"] =
      trace.final_answer ? Json(*trace.final_answer) : Json(nullptr);
  doc["termination"] = TerminationName(trace.termination);
  return doc;
}

AgentTrace TraceFromJson(const Json& doc) {
  try {
    if (doc.value("schema", "") != "trace" ||
        doc.value("version", 0) != kTraceSchemaVersion) {
      throw FormatError("not a version-1 trace document");
    }
    AgentTrace trace;
    trace.instruction = doc.at("instruction").get<std::string>();
    trace.prompt_api_ids =
        doc.at("prompt_api_ids").get<std::vector<std::string>>();
    trace.demo_source = OptionalField<std::string>(doc, "demo_source");
    for (const auto& s : doc.at("steps")) {
      AgentStep step;
      step.prompt = s.at("prompt").get<std::string>();
      step.raw_llm_output = s.at("raw_llm_output").get<std::string>();
      if (const auto& a = s.at("action"); !a.is_null()) {
        step.parsed = ParseAction(a.dump());
      }
      step.error = OptionalField<std::string>(s, "error");
      step.observation = OptionalField<std::string>(s, "observation");
      step.tool_ok = s.at("tool_ok").get<bool>();
      trace.steps.push_back(std::move(step));
    }
    trace.final_answer = OptionalField<std::string>(doc, "final_answer");
    trace.termination =
        ParseTermination(doc.at("termination").get<std::string>());
    return trace;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad trace document: ") + e.what());
  } catch (const MalformedAction& e) {
    throw FormatError(std::string("bad action in trace: ") + e.what());
  }
}

std::string SerializeTraceSuite(std::span<const AgentTrace> traces) {
  Json doc;
  doc["schema"] = "trace_suite";
  doc["version"] = kTraceSchemaVersion;
  doc["traces"] = Json::array();
  for (const auto& t : traces) doc["traces"].push_back(TraceToJson(t));
  return doc.dump(2) + "\n";
}

std::vector<AgentTrace> ParseTraceSuite(std::string_view text) {
  const Json doc = Json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw FormatError("trace file is not a JSON document");
  }
  std::vector<AgentTrace> traces;
  if (doc.value("schema", "") == "trace") {
    traces.push_back(TraceFromJson(doc));
    return traces;
  }
  if (doc.value("schema", "") != "trace_suite" || !doc.contains("traces")) {
    throw FormatError("unrecognized trace file schema");
  }
  for (const auto& t : doc.at("traces")) traces.push_back(TraceFromJson(t));
  return traces;
}

const PromptTemplate& PromptTemplate::Default() {
  static const PromptTemplate kDefault{
      "You are an assistant that completes the user's instruction by calling "
      "the APIs listed below.\nCall one API per turn and use each observation "
      "to decide the next step. When the task is complete, give the final "
      "answer.\n",
      "Reply with exactly one JSON object.\n"
      "To call an API: {\"action\": \"<api id>\", \"arguments\": "
      "{\"<parameter>\": <value>}}\n"
      "To finish: {\"final_answer\": \"<answer for the user>\"}\n"};
  return kDefault;
}

std::string AssemblePrompt(std::string_view instruction,
                           std::span<const ApiRecord> apis,
                           std::string_view demo_block,
                           const PromptTemplate& tmpl) {
  std::string out(tmpl.preamble);
  out += "\n";
  out += kApiHeader;
  int n = 0;
  for (const auto& api : apis) {
    out += std::to_string(++n) + ". " + api.name + " (id: " + api.id + ")\n";
    out += "   " + OneLine(api.description) + "\n";
    if (api.parameters.empty()) {
      out += "   Parameters: none\n";
      continue;
    }
    out += "   Parameters:\n";
    for (const auto& p : api.parameters) {
      out += "   - " + p.name + " (" + std::string(ParamTypeName(p.type)) +
             (p.required ? ", required" : ", optional") + "): " +
             OneLine(p.description) + "\n";
    }
  }
  if (!demo_block.empty()) {
    out += "\n## Demonstrations\n";
    out += demo_block;
    if (demo_block.back() != '\n') out += "\n";
  }
  out += "\n## Instruction\n";
  out += instruction;
  out += "\n\n## Response format\n";
  out += tmpl.format_instructions;
  return out;
}

std::string SerializeHistory(std::span<const AgentStep> steps) {
  std::string out;
  for (const auto& step : steps) {
    if (!out.empty()) out += "\n";
    if (step.parsed) {
      out += "Action: " + ActionToJson(*step.parsed).dump() + "\n";
    } else {
      out += "Output: " + Json(step.raw_llm_output).dump() + "\n";
    }
    if (step.observation) out += "Observation: " + OneLine(*step.observation) + "\n";
    if (step.error) out += "Error: " + OneLine(*step.error) + "\n";
  }
  return out;
}

std::string PromptWithHistory(std::string_view base_prompt,
                              std::span<const AgentStep> steps) {
  std::string out(base_prompt);
  if (!steps.empty()) {
    out += "\n";
    out += kHistoryHeader;
    out += SerializeHistory(steps);
  }
  return out;
}

std::vector<std::string> PromptApiIds(std::string_view prompt) {
  std::vector<std::string> ids;
  const std::size_t start = prompt.find(kApiHeader);
  if (start == std::string_view::npos) return ids;
  std::size_t pos = start + kApiHeader.size();
  while (pos < prompt.size()) {
    std::size_t eol = prompt.find('\n', pos);
    if (eol == std::string_view::npos) eol = prompt.size();
    const std::string_view line = prompt.substr(pos, eol - pos);
    if (line.empty() || line.starts_with("## ")) break;
    if (line[0] >= '0' && line[0] <= '9') {
      const std::size_t open = line.rfind(" (id: ");
      if (open != std::string_view::npos && line.ends_with(")")) {
        const std::size_t from = open + 6;
        ids.emplace_back(line.substr(from, line.size() - 1 - from));
      }
    }
    pos = eol + 1;
  }
  return ids;
}

AgentAction ParseAction(std::string_view raw) {
  const auto doc = FirstJsonObject(raw);
  if (!doc) throw MalformedAction("no JSON object in model output");
  const bool has_action = doc->contains("action");
  const bool has_answer = doc->contains("final_answer");
  if (has_action && has_answer) {
    throw MalformedAction("both 'action' and 'final_answer' present");
  }
  if (has_answer) {
    const auto& answer = doc->at("final_answer");
    if (doc->size() != 1 || !answer.is_string()) {
      throw MalformedAction("final_answer must be the only key and a string");
    }
    return Finish{answer.get<std::string>()};
  }
  if (has_action) {
    const auto& name = doc->at("action");
    if (!name.is_string() || name.get_ref<const std::string&>().empty()) {
      throw MalformedAction("'action' must be a nonempty string");
    }
    ToolCall call{name.get<std::string>(), Json::object()};
    for (const auto& [key, value] : doc->items()) {
      if (key == "action") continue;
      if (key != "arguments") {
        throw MalformedAction("unexpected key '" + key + "'");
      }
      if (!value.is_object()) {
        throw MalformedAction("'arguments' must be an object");
      }
      call.arguments = value;
    }
    return call;
  }
  throw MalformedAction("object has neither 'action' nor 'final_answer'");
}

ToolCall ValidateCall(const ToolCall& call, std::span<const ApiRecord> apis) {
  const auto api_it = std::find_if(apis.begin(), apis.end(),
                                   [&](const ApiRecord& a) {
                                     return a.id == call.api_id;
                                   });
  if (api_it == apis.end()) throw UnknownApi(call.api_id);
  const ApiRecord& api = *api_it;
  if (!call.arguments.is_object()) {
    throw ParamError(ParamError::Reason::kTypeMismatch, "arguments");
  }
  for (const auto& [key, value] : call.arguments.items()) {
    if (api.FindParam(key) == nullptr) {
      throw ParamError(ParamError::Reason::kUnexpected, key);
    }
  }
  ToolCall validated{call.api_id, Json::object()};
  for (const auto& param : api.parameters) {
    const auto it = call.arguments.find(param.name);
    if (it == call.arguments.end()) {
      if (param.required) {
        throw ParamError(ParamError::Reason::kMissing, param.name);
      }
      continue;
    }
    auto coerced = Coerce(param.type, *it);
    if (!coerced) {
      throw ParamError(ParamError::Reason::kTypeMismatch, param.name);
    }
    validated.arguments[param.name] = std::move(*coerced);
  }
  return validated;
}

void EpisodeConfig::Validate() const {
  if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
  if (retry_budget < 1) throw ConfigError("retry_budget must be at least 1");
}

AgentTrace RunEpisode(std::string_view instruction,
                      std::span<const ApiRecord> apis,
                      std::string_view demo_block, LlmBackend& backend,
                      ToolRegistry& registry, const EpisodeConfig& config,
                      const PromptTemplate& tmpl) {
  config.Validate();
  AgentTrace trace;
  trace.instruction = std::string(instruction);
  for (const auto& api : apis) trace.prompt_api_ids.push_back(api.id);
  trace.termination = Termination::kMaxSteps;

  const std::string base = AssemblePrompt(instruction, apis, demo_block, tmpl);
  int consecutive_errors = 0;
  for (int t = 0; t < config.max_steps; ++t) {
    AgentStep step;
    step.prompt = PromptWithHistory(base, trace.steps);
    try {
      step.raw_llm_output = backend.Complete(step.prompt);
    } catch (const std::exception& e) {
      step.error = std::string("backend failure: ") + e.what();
      trace.steps.push_back(std::move(step));
      trace.termination = Termination::kUnrecoverableError;
      return trace;
    }

    try {
      AgentAction action = ParseAction(step.raw_llm_output);
      if (auto* finish = std::get_if<Finish>(&action)) {
        trace.final_answer = finish->answer;
        step.parsed = std::move(action);
        trace.steps.push_back(std::move(step));
        trace.termination = Termination::kFinished;
        return trace;
      }
      ToolCall validated = ValidateCall(std::get<ToolCall>(action), apis);
      step.parsed = validated;
      const ToolResult result = registry.Execute(validated);
      step.observation = result.observation;
      step.tool_ok = result.ok;
      consecutive_errors = 0;
    } catch (const Error& e) {
      step.error = e.what();
      ++consecutive_errors;
    }
    trace.steps.push_back(std::move(step));
    if (consecutive_errors >= config.retry_budget) {
      trace.termination = Termination::kUnrecoverableError;
      return trace;
    }
  }
  return trace;
}

Pipeline::Pipeline(const EncoderParams& params, const ApiIndex& index,
                   std::span<const ApiRecord> apis,
                   std::span<const DemoRecord> demos, PipelineConfig config,
                   PromptTemplate tmpl)
    : params_(&params),
      index_(&index),
      apis_(apis.begin(), apis.end()),
      demos_(demos.begin(), demos.end()),
      config_(std::move(config)),
      tmpl_(std::move(tmpl)) {
  Retriever check(index, params);  // throws StaleIndex
  config_.demo.Validate();
  config_.episode.Validate();
  if (config_.retriever_k < 1) throw ConfigError("retriever_k must be >= 1");
  std::vector<DemoRecord> kb;
  std::vector<DemoRecord> api_level;
  for (const auto& d : demos_) {
    (d.level == DemoLevel::kSubtask ? kb : api_level).push_back(d);
  }
  knowledge_db_ = DemoPool(kb, DemoLevel::kSubtask, params);
  api_demos_ = DemoPool(api_level, DemoLevel::kApi, params);
}

std::vector<ApiRecord> Pipeline::RetrieveApis(
    std::string_view instruction) const {
  std::unordered_map<std::string_view, const ApiRecord*> by_id;
  for (const auto& a : apis_) by_id.emplace(a.id, &a);
  const Retriever retriever(*index_, *params_);
  std::vector<ApiRecord> out;
  for (const auto& r : retriever(instruction, config_.retriever_k).ranked) {
    const auto it = by_id.find(r.id);
    if (it == by_id.end()) throw UnknownApi("index entry " + r.id);
    out.push_back(*it->second);
  }
  return out;
}

std::string Pipeline::DemoBlock(std::string_view instruction,
                                std::optional<std::string>* source) const {
  if (knowledge_db_.empty() && api_demos_.empty()) return {};
  const auto selection = SelectDemos(Embed(instruction, *params_),
                                     knowledge_db_, api_demos_, config_.demo);
  *source = std::string(DemoSourceName(selection.source));
  return RenderDemos(selection, demos_);
}

AgentTrace Pipeline::RunWithApis(std::string_view instruction,
                                 std::span<const ApiRecord> apis,
                                 LlmBackend& backend, ToolRegistry& registry,
                                 bool with_demos) const {
  std::optional<std::string> source;
  const std::string demos =
      with_demos ? DemoBlock(instruction, &source) : std::string();
  AgentTrace trace = RunEpisode(instruction, apis, demos, backend, registry,
                                config_.episode, tmpl_);
  trace.demo_source = std::move(source);
  return trace;
}

AgentTrace Pipeline::Run(std::string_view instruction, LlmBackend& backend,
                         ToolRegistry& registry) const {
  const auto apis = RetrieveApis(instruction);
  return RunWithApis(instruction, apis, backend, registry, config_.use_demos);
}

}  // namespace toolpilot
