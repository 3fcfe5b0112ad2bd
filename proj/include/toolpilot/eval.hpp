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

#ifndef TOOLPILOT_EVAL_HPP_
#define TOOLPILOT_EVAL_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toolpilot/agent.hpp"
#include "toolpilot/records.hpp"
#include "toolpilot/retriever.hpp"

namespace toolpilot {

enum class MatchMode { kStrictSequence, kSetMatch };

std::string_view MatchModeName(MatchMode mode);
MatchMode ParseMatchMode(std::string_view name);  // throws ConfigError

// strict_sequence: the successful calls, in order, are exactly the gold
// api ids and every gold required argument has the gold value.
// set_match: same multiset of api ids, arguments ignored.
bool EpisodeCorrect(const AgentTrace& trace, const GoldTrajectory& gold,
                    MatchMode mode);

// Fraction of correct episodes. Throws CardinalityMismatch unless there is
// exactly one trace per gold.
double ExecutionAccuracy(std::span<const AgentTrace> traces,
                         std::span<const GoldTrajectory> golds,
                         MatchMode mode);

struct ItemOutcome {
  std::size_t index = 0;
  std::string instruction;
  bool correct = false;
  bool gold_apis_in_prompt = false;
  std::string termination;
  std::size_t num_steps = 0;
  std::optional<std::string> error;  // set when the item itself failed
};

struct EvalReport {
  std::string run_id;
  Json config = Json::object();
  std::map<std::string, double> metrics;
  std::vector<ItemOutcome> items;
  std::optional<std::string> started_at;
  std::optional<std::string> finished_at;

  Json ToJson() const;
  // "metric,value" rows.
  std::string MetricsCsv() const;
};

// Metrics over a finished suite: execution accuracy under both matchers
// (the configured mode is reported as "execution_accuracy"), plus finish
// rate, mean steps and gold-API prompt coverage.
EvalReport ScoreSuite(std::string run_id, std::span<const AgentTrace> traces,
                      std::span<const GoldTrajectory> golds, MatchMode mode,
                      Json config = Json::object());

// Rows of the ablation table: which APIs the prompt offers and whether
// demos are included.
enum class AblationRow {
  kOracleApis,       // the gold trajectory's APIs, no demos
  kOracleApisDemos,  // gold APIs plus selected demos
  kFullCollection,   // every API, no retrieval
  kRandomK,          // k uniformly drawn APIs
  kRetriever,        // top-k retrieved APIs
  kRetrieverDemos,   // top-k retrieved APIs plus selected demos
};

std::string_view AblationRowName(AblationRow row);
AblationRow ParseAblationRow(std::string_view name);  // throws ConfigError
std::vector<AblationRow> AllAblationRows();

// Builds a fresh backend for one episode.
using BackendFactory =
    std::function<std::unique_ptr<LlmBackend>(const GoldTrajectory& gold)>;

struct AblationConfig {
  std::vector<AblationRow> rows = AllAblationRows();
  PipelineConfig pipeline;
  MatchMode mode = MatchMode::kStrictSequence;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool record_times = false;
};

struct AblationResult {
  std::vector<EvalReport> reports;                // one per row
  std::vector<std::vector<AgentTrace>> traces;    // per row, per item
};

// Runs every row over the same gold suite. Items may execute concurrently;
// results are gathered in item order so reports do not depend on `jobs`.
// Per-item failures are recorded in the report rather than thrown.
AblationResult RunAblation(const Pipeline& pipeline,
                           std::span<const GoldTrajectory> golds,
                           const BackendFactory& make_backend,
                           const AblationConfig& config);

// Runs one row: the traces for every gold, in order.
std::vector<AgentTrace> RunSuite(const Pipeline& pipeline,
                                 std::span<const GoldTrajectory> golds,
                                 AblationRow row,
                                 const BackendFactory& make_backend,
                                 std::uint64_t seed, int jobs,
                                 std::vector<std::optional<std::string>>* errors);

// "row,metric,value" CSV and a fixed-width text table of the headline
// metrics, one line per row.
std::string AblationCsv(std::span<const EvalReport> reports);
std::string AblationTable(std::span<const EvalReport> reports);

// UTC wall-clock time, ISO 8601.
std::string UtcTimestamp();

}  // namespace toolpilot

#endif  // TOOLPILOT_EVAL_HPP_
