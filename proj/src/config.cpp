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

#include "toolpilot/config.hpp"

#include <functional>
#include <map>
#include <set>

#include "toolpilot/errors.hpp"
#include "toolpilot/file_util.hpp"
#include "toolpilot/hashing.hpp"

namespace toolpilot {
namespace {

using Setter = std::function<void(const Json&)>;

// Applies `setters` to the keys of `section`, rejecting unknown ones.
void ApplySection(const Json& doc, const std::string& name,
                  const std::map<std::string, Setter>& setters) {
  const auto it = doc.find(name);
  if (it == doc.end()) return;
  if (!it->is_object()) throw ConfigError("section '" + name + "' must be an object");
  for (const auto& [key, value] : it->items()) {
    const auto setter = setters.find(key);
    if (setter == setters.end()) {
      throw ConfigError("unknown key '" + name + "." + key + "'");
    }
    try {
      setter->second(value);
    } catch (const Json::exception&) {
      throw ConfigError("bad value for '" + name + "." + key + "'");
    }
  }
}

template <typename T>
Setter Set(T& target) {
  return [&target](const Json& v) { target = v.get<T>(); };
}

}  // namespace

RunConfig RunConfig::FromJson(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> kSections = {
      "encoder", "training", "retriever", "demo_selector", "agent",
      "backend", "paths",    "seeds"};
  for (const auto& [key, value] : doc.items()) {
    if (!kSections.contains(key)) {
      throw ConfigError("unknown config section '" + key + "'");
    }
  }
  RunConfig c;
  ApplySection(doc, "encoder",
               {{"dim", Set(c.encoder.dim)},
                {"num_buckets", Set(c.encoder.num_buckets)},
                {"ngram_orders", Set(c.encoder.ngram_orders)},
                {"seed", Set(c.encoder.seed)},
                {"init_range", Set(c.encoder.init_range)}});
  ApplySection(doc, "training",
               {{"epochs", Set(c.training.epochs)},
                {"batch_size", Set(c.training.batch_size)},
                {"learning_rate", Set(c.training.learning_rate)},
                {"momentum", Set(c.training.momentum)},
                {"similarity_scale", Set(c.training.similarity_scale)},
                {"seed", Set(c.training.seed)}});
  ApplySection(doc, "retriever",
               {{"top_k", Set(c.retriever_k)},
                {"include_parameters", Set(c.include_parameters)}});
  ApplySection(doc, "demo_selector",
               {{"threshold", Set(c.demo_selector.threshold)},
                {"top_k", Set(c.demo_selector.top_k)},
                {"enabled", Set(c.use_demos)}});
  std::string mode(MatchModeName(c.match_mode));
  std::string row(AblationRowName(c.suite_row));
  ApplySection(doc, "agent",
               {{"max_steps", Set(c.agent.max_steps)},
                {"retry_budget", Set(c.agent.retry_budget)},
                {"match_mode", Set(mode)},
                {"suite_row", Set(row)}});
  c.match_mode = ParseMatchMode(mode);
  c.suite_row = ParseAblationRow(row);
  int timeout_s = static_cast<int>(c.backend.http.timeout.count());
  ApplySection(doc, "backend",
               {{"type", Set(c.backend.type)},
                {"script", Set(c.backend.script)},
                {"response", Set(c.backend.response)},
                {"url", Set(c.backend.http.url)},
                {"model", Set(c.backend.http.model)},
                {"token_env", Set(c.backend.http.token_env)},
                {"temperature", Set(c.backend.http.temperature)},
                {"timeout_s", Set(timeout_s)},
                {"retries", Set(c.backend.http.retries)}});
  c.backend.http.timeout = std::chrono::seconds(timeout_s);
  ApplySection(doc, "paths",
               {{"apis", Set(c.paths.apis)},
                {"demos", Set(c.paths.demos)},
                {"params", Set(c.paths.params)},
                {"index", Set(c.paths.index)},
                {"pairs", Set(c.paths.pairs)},
                {"suite", Set(c.paths.suite)}});
  ApplySection(doc, "seeds", {{"global", Set(c.seed)}});
  c.Validate();
  return c;
}

RunConfig RunConfig::Load(const std::filesystem::path& path) {
  const Json doc = Json::parse(ReadFileBytes(path), nullptr, false);
  if (doc.is_discarded()) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON");
  }
  return FromJson(doc);
}

Json RunConfig::ToJson() const {
  return Json{
      {"encoder",
       {{"dim", encoder.dim},
        {"num_buckets", encoder.num_buckets},
        {"ngram_orders", encoder.ngram_orders},
        {"seed", encoder.seed},
        {"init_range", encoder.init_range}}},
      {"training",
       {{"epochs", training.epochs},
        {"batch_size", training.batch_size},
        {"learning_rate", training.learning_rate},
        {"momentum", training.momentum},
        {"similarity_scale", training.similarity_scale},
        {"seed", training.seed}}},
      {"retriever",
       {{"top_k", retriever_k}, {"include_parameters", include_parameters}}},
      {"demo_selector",
       {{"threshold", demo_selector.threshold},
        {"top_k", demo_selector.top_k},
        {"enabled", use_demos}}},
      {"agent",
       {{"max_steps", agent.max_steps},
        {"retry_budget", agent.retry_budget},
        {"match_mode", MatchModeName(match_mode)},
        {"suite_row", AblationRowName(suite_row)}}},
      {"backend",
       {{"type", backend.type},
        {"script", backend.script},
        {"response", backend.response},
        {"url", backend.http.url},
        {"model", backend.http.model},
        {"token_env", backend.http.token_env},
        {"temperature", backend.http.temperature},
        {"timeout_s", backend.http.timeout.count()},
        {"retries", backend.http.retries}}},
      {"paths",
       {{"apis", paths.apis},
        {"demos", paths.demos},
        {"params", paths.params},
        {"index", paths.index},
        {"pairs", paths.pairs},
        {"suite", paths.suite}}},
      {"seeds", {{"global", seed}}}};
}

void RunConfig::Validate() const {
  encoder.Validate();
  training.Validate();
  demo_selector.Validate();
  agent.Validate();
  if (retriever_k < 1) throw ConfigError("retriever.top_k must be >= 1");
  static const std::set<std::string> kBackends = {
      "oracle", "gated_oracle", "scripted", "prompt_map", "constant", "http"};
  if (!kBackends.contains(backend.type)) {
    throw ConfigError("unknown backend type '" + backend.type + "'");
  }
}

std::uint64_t RunConfig::Hash() const { return Fnv1a64(ToJson().dump()); }

PipelineConfig RunConfig::Pipeline() const {
  PipelineConfig p;
  p.retriever_k = retriever_k;
  p.use_demos = use_demos;
  p.demo = demo_selector;
  p.episode = agent;
  return p;
}

BackendFactory MakeBackendFactory(const BackendConfig& config) {
  if (config.type == "oracle" || config.type == "gated_oracle") {
    const bool gated = config.type == "gated_oracle";
    return [gated](const GoldTrajectory& gold) {
      return std::make_unique<OracleBackend>(gold, gated);
    };
  }
  if (config.type == "scripted") {
    const auto responses =
        ScriptedBackend::ParseScript(ReadFileBytes(config.script));
    return [responses](const GoldTrajectory&) {
      return std::make_unique<ScriptedBackend>(responses);
    };
  }
  if (config.type == "prompt_map") {
    auto backend = std::make_shared<PromptMapBackend>(
        PromptMapBackend::FromJsonLines(ReadFileBytes(config.script)));
    return [backend](const GoldTrajectory&) {
      return std::make_unique<PromptMapBackend>(*backend);
    };
  }
  if (config.type == "constant") {
    const std::string response = config.response;
    return [response](const GoldTrajectory&) {
      return std::make_unique<ConstantBackend>(response);
    };
  }
  if (config.type == "http") {
    const HttpBackendConfig http = config.http;
    return [http](const GoldTrajectory&) {
      return std::make_unique<HttpBackend>(http);
    };
  }
  throw ConfigError("unknown backend type '" + config.type + "'");
}

std::unique_ptr<LlmBackend> MakeBackend(const BackendConfig& config) {
  if (config.type == "oracle" || config.type == "gated_oracle") {
    throw ConfigError("oracle backends need a gold suite (use --suite)");
  }
  return MakeBackendFactory(config)(GoldTrajectory{});
}

}  // namespace toolpilot
