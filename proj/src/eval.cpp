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

#include "toolpilot/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <numeric>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "toolpilot/backends.hpp"
#include "toolpilot/errors.hpp"
#include "toolpilot/rng.hpp"

namespace toolpilot {
namespace {

bool ArgumentsMatch(const Json& actual, const Json& gold_required) {
  for (const auto& [key, value] : gold_required.items()) {
    const auto it = actual.find(key);
    if (it == actual.end() || *it != value) return false;
  }
  return true;
}

std::vector<ApiRecord> Lookup(const std::vector<ApiRecord>& apis,
                              const std::vector<std::string>& ids) {
  std::unordered_map<std::string_view, const ApiRecord*> by_id;
  for (const auto& a : apis) by_id.emplace(a.id, &a);
  std::vector<ApiRecord> out;
  std::unordered_set<std::string_view> taken;
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw DanglingApiId(id);
    if (taken.insert(it->second->id).second) out.push_back(*it->second);
  }
  return out;
}

// Independent stream per suite item.
Rng ItemRng(std::uint64_t seed, std::size_t index) {
  std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (index + 1));
  return Rng(SplitMix64(x));
}

std::vector<ApiRecord> RandomApis(const std::vector<ApiRecord>& apis,
                                  std::size_t k, Rng& rng) {
  std::vector<std::size_t> order(apis.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t n = std::min(k, order.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.Below(order.size() - i));
    std::swap(order[i], order[j]);
  }
  std::vector<ApiRecord> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(apis[order[i]]);
  return out;
}

AgentTrace RunRow(const Pipeline& pipeline, const GoldTrajectory& gold,
                  AblationRow row, LlmBackend& backend, ToolRegistry& registry,
                  std::uint64_t seed, std::size_t index, int retriever_k) {
  switch (row) {
    case AblationRow::kOracleApis:
    case AblationRow::kOracleApisDemos: {
      const auto apis = Lookup(pipeline.apis(), gold.ApiIds());
      return pipeline.RunWithApis(gold.instruction, apis, backend, registry,
                                  row == AblationRow::kOracleApisDemos);
    }
    case AblationRow::kFullCollection:
      return pipeline.RunWithApis(gold.instruction, pipeline.apis(), backend,
                                  registry, false);
    case AblationRow::kRandomK: {
      Rng rng = ItemRng(seed, index);
      const auto apis = RandomApis(pipeline.apis(),
                                   static_cast<std::size_t>(retriever_k), rng);
      return pipeline.RunWithApis(gold.instruction, apis, backend, registry,
                                  false);
    }
    case AblationRow::kRetriever:
    case AblationRow::kRetrieverDemos: {
      const auto apis = pipeline.RetrieveApis(gold.instruction);
      return pipeline.RunWithApis(gold.instruction, apis, backend, registry,
                                  row == AblationRow::kRetrieverDemos);
    }
  }
  throw ConfigError("unknown ablation row");
}

}  // namespace

std::string_view MatchModeName(MatchMode mode) {
  return mode == MatchMode::kStrictSequence ? "strict_sequence" : "set_match";
}

MatchMode ParseMatchMode(std::string_view name) {
  if (name == "strict_sequence") return MatchMode::kStrictSequence;
  if (name == "set_match") return MatchMode::kSetMatch;
  throw ConfigError("unknown match mode '" + std::string(name) + "'");
}

bool EpisodeCorrect(const AgentTrace& trace, const GoldTrajectory& gold,
                    MatchMode mode) {
  const auto calls = trace.SuccessfulCalls();
  if (calls.size() != gold.calls.size()) return false;
  if (mode == MatchMode::kSetMatch) {
    std::vector<std::string> actual;
    for (const auto& c : calls) actual.push_back(c.api_id);
    auto expected = gold.ApiIds();
    std::sort(actual.begin(), actual.end());
    std::sort(expected.begin(), expected.end());
    return actual == expected;
  }
  for (std::size_t i = 0; i < calls.size(); ++i) {
    if (calls[i].api_id != gold.calls[i].api_id) return false;
    if (!ArgumentsMatch(calls[i].arguments, gold.calls[i].required_arguments)) {
      return false;
    }
  }
  return true;
}

double ExecutionAccuracy(std::span<const AgentTrace> traces,
                         std::span<const GoldTrajectory> golds,
                         MatchMode mode) {
  if (traces.size() != golds.size()) {
    throw CardinalityMismatch(std::to_string(traces.size()) + " traces vs " +
                              std::to_string(golds.size()) + " golds");
  }
  if (golds.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    correct += EpisodeCorrect(traces[i], golds[i], mode) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(golds.size());
}

Json EvalReport::ToJson() const {
  Json items_json = Json::array();
  for (const auto& item : items) {
    items_json.push_back({{"index", item.index},
                          {"instruction", item.instruction},
                          {"correct", item.correct},
                          {"gold_apis_in_prompt", item.gold_apis_in_prompt},
                          {"termination", item.termination},
                          {"num_steps", item.num_steps},
                          {"error", item.error ? Json(*item.error) : Json()}});
  }
  Json timestamps = Json::object();
  timestamps["started_at"] = started_at ? Json(*started_at) : Json();
  timestamps["finished_at"] = finished_at ? Json(*finished_at) : Json();
  return Json{{"schema", "eval_report"},
              {"version", 1},
              {"run_id", run_id},
              {"config", config},
              {"metrics", metrics},
              {"items", std::move(items_json)},
              {"timestamps", std::move(timestamps)}};
}

std::string EvalReport::MetricsCsv() const {
  std::string out = "metric,value\n";
  char buf[64];
  for (const auto& [name, value] : metrics) {
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    out += name + "," + buf + "\n";
  }
  return out;
}

EvalReport ScoreSuite(std::string run_id, std::span<const AgentTrace> traces,
                      std::span<const GoldTrajectory> golds, MatchMode mode,
                      Json config) {
  if (traces.size() != golds.size()) {
    throw CardinalityMismatch(std::to_string(traces.size()) + " traces vs " +
                              std::to_string(golds.size()) + " golds");
  }
  EvalReport report;
  report.run_id = std::move(run_id);
  report.config = std::move(config);
  report.config["match_mode"] = MatchModeName(mode);
  std::size_t finished = 0;
  std::size_t covered = 0;
  std::size_t steps = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const auto& t = traces[i];
    ItemOutcome item;
    item.index = i;
    item.instruction = golds[i].instruction;
    item.correct = EpisodeCorrect(t, golds[i], mode);
    const auto gold_ids = golds[i].ApiIds();
    item.gold_apis_in_prompt = std::all_of(
        gold_ids.begin(), gold_ids.end(), [&](const std::string& id) {
          return std::find(t.prompt_api_ids.begin(), t.prompt_api_ids.end(),
                           id) != t.prompt_api_ids.end();
        });
    item.termination = TerminationName(t.termination);
    item.num_steps = t.steps.size();
    finished += t.termination == Termination::kFinished ? 1 : 0;
    covered += item.gold_apis_in_prompt ? 1 : 0;
    steps += t.steps.size();
    report.items.push_back(std::move(item));
  }
  const double n = std::max<double>(1.0, static_cast<double>(golds.size()));
  report.metrics["execution_accuracy"] = ExecutionAccuracy(traces, golds, mode);
  report.metrics["execution_accuracy_strict_sequence"] =
      ExecutionAccuracy(traces, golds, MatchMode::kStrictSequence);
  report.metrics["execution_accuracy_set_match"] =
      ExecutionAccuracy(traces, golds, MatchMode::kSetMatch);
  report.metrics["finished_rate"] = static_cast<double>(finished) / n;
  report.metrics["gold_api_coverage"] = static_cast<double>(covered) / n;
  report.metrics["mean_steps"] = static_cast<double>(steps) / n;
  return report;
}

std::string_view AblationRowName(AblationRow row) {
  switch (row) {
    case AblationRow::kOracleApis:
      return "oracle_apis";
    case AblationRow::kOracleApisDemos:
      return "oracle_apis_demos";
    case AblationRow::kFullCollection:
      return "full_collection";
    case AblationRow::kRandomK:
      return "random_k";
    case AblationRow::kRetriever:
      return "retriever";
    case AblationRow::kRetrieverDemos:
      return "retriever_demos";
  }
  return "unknown";
}

AblationRow ParseAblationRow(std::string_view name) {
  for (const auto row : AllAblationRows()) {
    if (AblationRowName(row) == name) return row;
  }
  throw ConfigError("unknown ablation row '" + std::string(name) + "'");
}

std::vector<AblationRow> AllAblationRows() {
  return {AblationRow::kOracleApis,     AblationRow::kOracleApisDemos,
          AblationRow::kFullCollection, AblationRow::kRandomK,
          AblationRow::kRetriever,      AblationRow::kRetrieverDemos};
}

std::vector<AgentTrace> RunSuite(const Pipeline& pipeline,
                                 std::span<const GoldTrajectory> golds,
                                 AblationRow row,
                                 const BackendFactory& make_backend,
                                 std::uint64_t seed, int jobs,
                                 std::vector<std::optional<std::string>>* errors) {
  std::vector<AgentTrace> traces(golds.size());
  std::vector<std::optional<std::string>> item_errors(golds.size());
  const MockToolRegistry registry_proto(pipeline.apis());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < golds.size(); i = next++) {
      MockToolRegistry registry = registry_proto;
      try {
        auto backend = make_backend(golds[i]);
        traces[i] = RunRow(pipeline, golds[i], row, *backend, registry, seed, i,
                           pipeline.config().retriever_k);
      } catch (const std::exception& e) {
        item_errors[i] = e.what();
        traces[i] = AgentTrace{};
        traces[i].instruction = golds[i].instruction;
        traces[i].termination = Termination::kUnrecoverableError;
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(golds.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (errors) *errors = std::move(item_errors);
  return traces;
}

AblationResult RunAblation(const Pipeline& pipeline,
                           std::span<const GoldTrajectory> golds,
                           const BackendFactory& make_backend,
                           const AblationConfig& config) {
  AblationResult result;
  for (const auto row : config.rows) {
    EvalReport report;
    const auto started = config.record_times ? std::optional(UtcTimestamp())
                                             : std::nullopt;
    std::vector<std::optional<std::string>> errors;
    auto traces = RunSuite(pipeline, golds, row, make_backend, config.seed,
                           config.jobs, &errors);
    Json snapshot{{"row", AblationRowName(row)},
                  {"seed", config.seed},
                  {"retriever_k", config.pipeline.retriever_k},
                  {"max_steps", config.pipeline.episode.max_steps},
                  {"retry_budget", config.pipeline.episode.retry_budget},
                  {"demo_threshold", config.pipeline.demo.threshold},
                  {"demo_top_k", config.pipeline.demo.top_k},
                  {"num_items", golds.size()}};
    report = ScoreSuite(std::string(AblationRowName(row)) + "-seed" +
                            std::to_string(config.seed),
                        traces, golds, config.mode, std::move(snapshot));
    for (std::size_t i = 0; i < errors.size(); ++i) {
      report.items[i].error = errors[i];
    }
    report.started_at = started;
    if (config.record_times) report.finished_at = UtcTimestamp();
    result.reports.push_back(std::move(report));
    result.traces.push_back(std::move(traces));
  }
  return result;
}

std::string AblationCsv(std::span<const EvalReport> reports) {
  std::string out = "row,metric,value\n";
  char buf[64];
  for (const auto& r : reports) {
    const std::string row = r.config.value("row", r.run_id);
    for (const auto& [name, value] : r.metrics) {
      std::snprintf(buf, sizeof(buf), "%.6f", value);
      out += row + "," + name + "," + buf + "\n";
    }
  }
  return out;
}

std::string AblationTable(std::span<const EvalReport> reports) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-20s %10s %10s %10s %10s\n", "row",
                "exec_acc", "set_match", "coverage", "steps");
  out += buf;
  for (const auto& r : reports) {
    const auto metric = [&](const char* name) {
      const auto it = r.metrics.find(name);
      return it == r.metrics.end() ? 0.0 : it->second;
    };
    std::snprintf(buf, sizeof(buf), "%-20s %10.4f %10.4f %10.4f %10.2f\n",
                  r.config.value("row", r.run_id).c_str(),
                  metric("execution_accuracy"),
                  metric("execution_accuracy_set_match"),
                  metric("gold_api_coverage"), metric("mean_steps"));
    out += buf;
  }
  return out;
}

std::string UtcTimestamp() {
  const auto now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace toolpilot
