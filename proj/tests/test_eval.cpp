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


#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "toolpilot/backends.hpp"
#include "toolpilot/config.hpp"
#include "toolpilot/corpus.hpp"
#include "toolpilot/errors.hpp"
#include "toolpilot/eval.hpp"
#include "toolpilot/synthetic.hpp"
#include "toolpilot/tokenizer.hpp"

using namespace toolpilot;

namespace {

AgentTrace TraceOf(const std::vector<ToolCall>& calls, bool finish = true) {
  AgentTrace t;
  for (const auto& c : calls) {
    AgentStep s;
    s.parsed = c;
    s.observation = "ok";
    s.tool_ok = true;
    t.steps.push_back(s);
  }
  if (finish) {
    AgentStep s;
    s.parsed = Finish{"done"};
    t.steps.push_back(s);
    t.final_answer = "done";
    t.termination = Termination::kFinished;
  }
  return t;
}

GoldTrajectory Gold(const std::vector<std::pair<std::string, Json>>& calls) {
  GoldTrajectory g;
  g.instruction = "task";
  for (const auto& [id, args] : calls) g.calls.push_back({id, args});
  return g;
}

}  // namespace

TEST_CASE("execution accuracy") {
  const auto g1 = Gold({{"a", {{"x", 1}}}, {"b", Json::object()}});
  const auto g2 = Gold({{"c", Json::object()}});

  CHECK(EpisodeCorrect(TraceOf({{"a", {{"x", 1}, {"y", 2}}}, {"b", {}}}), g1,
                       MatchMode::kStrictSequence));
  CHECK_FALSE(EpisodeCorrect(TraceOf({{"a", {{"x", 2}}}, {"b", {}}}), g1,
                             MatchMode::kStrictSequence));
  CHECK(EpisodeCorrect(TraceOf({{"a", {{"x", 2}}}, {"b", {}}}), g1, MatchMode::kSetMatch));
  CHECK_FALSE(EpisodeCorrect(TraceOf({{"b", {}}, {"a", {{"x", 1}}}}), g1,
                             MatchMode::kStrictSequence));
  CHECK(EpisodeCorrect(TraceOf({{"b", {}}, {"a", {{"x", 1}}}}), g1, MatchMode::kSetMatch));
  CHECK_FALSE(EpisodeCorrect(TraceOf({}), g2, MatchMode::kSetMatch));

  // Failed steps and tool errors do not count as calls.
  auto with_error = TraceOf({{"c", {}}});
  AgentStep err;
  err.raw_llm_output = "junk";
  err.error = "MalformedAction: junk";
  with_error.steps.insert(with_error.steps.begin(), err);
  CHECK(EpisodeCorrect(with_error, g2, MatchMode::kStrictSequence));
  auto tool_fail = TraceOf({{"c", {}}});
  tool_fail.steps[0].tool_ok = false;
  CHECK_FALSE(EpisodeCorrect(tool_fail, g2, MatchMode::kStrictSequence));

  const std::vector<GoldTrajectory> golds = {g2, g2, g2, g2, g2};
  const std::vector<AgentTrace> traces = {TraceOf({{"c", {}}}), TraceOf({}),
                                          TraceOf({{"c", {}}}), TraceOf({{"d", {}}}),
                                          TraceOf({{"c", {}}})};
  CHECK(ExecutionAccuracy(traces, golds, MatchMode::kStrictSequence) == 0.6);
  const std::vector<AgentTrace> replay(5, TraceOf({{"c", {}}}));
  CHECK(ExecutionAccuracy(replay, golds, MatchMode::kStrictSequence) == 1.0);
  const std::vector<AgentTrace> empty(5, TraceOf({}));
  CHECK(ExecutionAccuracy(empty, golds, MatchMode::kSetMatch) == 0.0);
  CHECK_THROWS_AS(ExecutionAccuracy(std::span(traces).first(4), golds,
                                    MatchMode::kSetMatch),
                  CardinalityMismatch);

  CHECK(ParseMatchMode("set_match") == MatchMode::kSetMatch);
  CHECK(MatchModeName(MatchMode::kStrictSequence) == "strict_sequence");
  CHECK_THROWS_AS(ParseMatchMode("fuzzy"), ConfigError);
}

TEST_CASE("strict accuracy never exceeds set match") {
  Rng rng(6);
  const std::vector<std::string> ids = {"a", "b", "c"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<GoldTrajectory> golds;
    std::vector<AgentTrace> traces;
    for (int i = 0; i < 5; ++i) {
      std::vector<std::pair<std::string, Json>> g;
      std::vector<ToolCall> calls;
      const int n = 1 + static_cast<int>(rng.Below(3));
      for (int j = 0; j < n; ++j) g.push_back({ids[rng.Below(3)], {{"v", rng.Below(2)}}});
      const int m = static_cast<int>(rng.Below(4));
      for (int j = 0; j < m; ++j) calls.push_back({ids[rng.Below(3)], {{"v", rng.Below(2)}}});
      golds.push_back(Gold(g));
      traces.push_back(TraceOf(calls));
    }
    CHECK(ExecutionAccuracy(traces, golds, MatchMode::kStrictSequence) <=
          ExecutionAccuracy(traces, golds, MatchMode::kSetMatch));
  }
}

TEST_CASE("score suite report") {
  const auto g = Gold({{"c", Json::object()}});
  const std::vector<GoldTrajectory> golds = {g, g};
  auto t0 = TraceOf({{"c", {}}});
  t0.prompt_api_ids = {"c", "d"};
  auto t1 = TraceOf({}, false);
  t1.prompt_api_ids = {"d"};
  const std::vector<AgentTrace> traces = {t0, t1};
  const auto report = ScoreSuite("run", traces, golds, MatchMode::kStrictSequence,
                                 Json{{"row", "retriever"}});
  CHECK(report.items.size() == 2);
  CHECK(report.metrics.at("execution_accuracy") == 0.5);
  CHECK(report.metrics.at("finished_rate") == 0.5);
  CHECK(report.metrics.at("gold_api_coverage") == 0.5);
  CHECK(report.items[0].gold_apis_in_prompt);
  CHECK_FALSE(report.items[1].gold_apis_in_prompt);
  CHECK(report.ToJson()["config"]["row"] == "retriever");
  CHECK(report.ToJson()["timestamps"]["started_at"].is_null());
  CHECK(report.MetricsCsv().starts_with("metric,value\n"));
  CHECK(report.MetricsCsv().find("execution_accuracy,0.500000\n") != std::string::npos);
}

TEST_CASE("synthetic corpus shape") {
  const SyntheticSpec spec;
  CHECK(spec.TotalApis() == 45);
  CHECK(std::abs(spec.MeanTrajectoryLength() - 3.5) < 1e-12);
  const auto c = GenerateSyntheticCorpus(spec);
  CHECK(c.apis.size() == 45);
  CHECK(c.training_pairs.size() == 500);
  CHECK(c.eval_queries.size() == 100);
  CHECK(c.trajectories.size() == 100);

  std::set<std::string> categories, ids;
  for (const auto& a : c.apis) {
    REQUIRE(a.category.has_value());
    categories.insert(*a.category);
    ids.insert(a.id);
  }
  CHECK(categories.size() == 11);
  CHECK(ids.size() == 45);

  std::set<std::string> train_text;
  for (const auto& p : c.training_pairs) {
    CHECK(ids.contains(p.positive_api_id));
    CHECK_FALSE(Tokenize(p.instruction).empty());
    train_text.insert(p.instruction);
  }
  for (const auto& q : c.eval_queries) CHECK_FALSE(train_text.contains(q.instruction));
  CHECK_NOTHROW(CheckTrajectories(c.trajectories, c.apis));
  std::size_t api_demos = 0;
  for (const auto& d : c.demos) api_demos += d.level == DemoLevel::kApi;
  CHECK(api_demos == 45);

  const auto again = GenerateSyntheticCorpus(spec);
  CHECK(FormatApis(again.apis) == FormatApis(c.apis));
  CHECK(FormatPairs(again.training_pairs) == FormatPairs(c.training_pairs));
  CHECK(FormatTrajectories(again.trajectories) == FormatTrajectories(c.trajectories));
  CHECK(FormatDemos(again.demos) == FormatDemos(c.demos));

  // Round trips through the corpus loaders.
  CHECK(ParseApis(FormatApis(c.apis)) == c.apis);
  CHECK(ParseTrajectories(FormatTrajectories(c.trajectories)) == c.trajectories);
  CHECK(ParseDemos(FormatDemos(c.demos)) == c.demos);
}

TEST_CASE("trajectory lengths follow the configured distribution") {
  const SyntheticSpec spec;
  Rng rng(2024);
  double total = 0.0;
  std::map<int, int> hist;
  for (int i = 0; i < 1000; ++i) {
    const int n = SampleTrajectoryLength(spec, rng);
    total += n;
    ++hist[n];
  }
  CHECK(std::abs(total / 1000.0 - 3.5) <= 0.2);
  CHECK(hist.rbegin()->first <= 9);
  CHECK_FALSE(hist.contains(8));
}

TEST_CASE("synthetic spec validation and json") {
  SyntheticSpec spec;
  spec.trajectory_lengths = {{1, 0.5}, {2, 0.4}};
  CHECK_THROWS_AS(spec.Validate(), ConfigError);
  spec = SyntheticSpec{};
  spec.num_functionalities = 0;
  CHECK_THROWS_AS(spec.Validate(), ConfigError);
  spec = SyntheticSpec{};
  spec.seed = 9;
  spec.apis_per_functionality = 3;
  const auto back = SyntheticSpec::FromJson(spec.ToJson());
  CHECK(back.ToJson() == spec.ToJson());
  CHECK_THROWS_AS(SyntheticSpec::FromJson(Json{{"bogus", 1}}), ConfigError);
  CHECK(GenerateSyntheticCorpus(back).apis.size() == 34);
}

TEST_CASE("ablation rows are named and parsed") {
  for (auto row : AllAblationRows()) CHECK(ParseAblationRow(AblationRowName(row)) == row);
  CHECK(AllAblationRows().size() == 6);
  CHECK_THROWS_AS(ParseAblationRow("nope"), ConfigError);
}

TEST_CASE("ablation with the oracle backend") {
  SyntheticSpec spec;
  spec.num_trajectories = 12;
  const auto c = GenerateSyntheticCorpus(spec);
  const auto params = toolpilot::testing::SmallEncoder(0, 32, 2048);
  const auto index = BuildIndex(c.apis, params);
  AblationConfig ac;
  ac.pipeline.retriever_k = 5;
  const Pipeline pipeline(params, index, c.apis, c.demos, ac.pipeline);
  const BackendFactory oracle = [](const GoldTrajectory& g) {
    return std::make_unique<OracleBackend>(g);
  };
  ac.jobs = 3;
  const auto result = RunAblation(pipeline, c.trajectories, oracle, ac);
  REQUIRE(result.reports.size() == 6);
  // Calls are validated against the prompt's APIs, so the oracle
  // succeeds exactly on items whose prompt covers the gold APIs.
  for (const auto& r : result.reports) {
    CHECK(r.items.size() == 12);
    CHECK(r.metrics.at("execution_accuracy") == r.metrics.at("gold_api_coverage"));
  }
  for (std::size_t row : {0, 1, 2}) {
    CHECK(result.reports[row].metrics.at("execution_accuracy") == 1.0);
  }
  const auto& full = result.traces[2];
  const auto& retr = result.traces[4];
  for (std::size_t i = 0; i < full.size(); ++i) {
    CHECK(full[i].prompt_api_ids.size() == c.apis.size());
    CHECK(retr[i].prompt_api_ids.size() == 5);
    CHECK(result.traces[0][i].prompt_api_ids.size() <= c.trajectories[i].calls.size());
    CHECK_FALSE(result.traces[0][i].demo_source.has_value());
    CHECK(result.traces[5][i].demo_source.has_value());
  }

  // Single-threaded run is identical.
  ac.jobs = 1;
  const auto serial = RunAblation(pipeline, c.trajectories, oracle, ac);
  for (std::size_t r = 0; r < 6; ++r) {
    CHECK(SerializeTraceSuite(serial.traces[r]) == SerializeTraceSuite(result.traces[r]));
    CHECK(serial.reports[r].ToJson() == result.reports[r].ToJson());
  }
  CHECK(AblationCsv(result.reports).starts_with("row,metric,value\n"));
  CHECK(AblationTable(result.reports).find("random_k") != std::string::npos);

  // Item failures are recorded, not fatal.
  const BackendFactory broken = [](const GoldTrajectory&) -> std::unique_ptr<LlmBackend> {
    throw BackendError("no model");
  };
  std::vector<std::optional<std::string>> errors;
  const auto traces = RunSuite(pipeline, c.trajectories, AblationRow::kRetriever, broken,
                               0, 2, &errors);
  CHECK(traces.size() == 12);
  CHECK(errors[0].has_value());
}

TEST_CASE("run config") {
  const Json doc = {{"training", {{"epochs", 3}}},
                    {"retriever", {{"top_k", 7}}},
                    {"agent", {{"match_mode", "set_match"}, {"suite_row", "random_k"}}},
                    {"seeds", {{"global", 5}}}};
  const auto cfg = RunConfig::FromJson(doc);
  CHECK(cfg.training.epochs == 3);
  CHECK(cfg.retriever_k == 7);
  CHECK(cfg.match_mode == MatchMode::kSetMatch);
  CHECK(cfg.suite_row == AblationRow::kRandomK);
  CHECK(cfg.seed == 5);
  CHECK(cfg.Pipeline().retriever_k == 7);
  CHECK(RunConfig::FromJson(cfg.ToJson()).ToJson() == cfg.ToJson());
  CHECK(RunConfig::FromJson(cfg.ToJson()).Hash() == cfg.Hash());
  CHECK(cfg.Hash() != RunConfig{}.Hash());

  CHECK_THROWS_AS(RunConfig::FromJson(Json{{"trainer", Json::object()}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::FromJson(Json{{"training", {{"epoch", 1}}}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::FromJson(Json{{"training", {{"epochs", "x"}}}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::FromJson(Json{{"training", {{"learning_rate", -1}}}}),
                  ConfigError);
  CHECK_THROWS_AS(RunConfig::FromJson(Json{{"backend", {{"type", "magic"}}}}), ConfigError);
  CHECK_THROWS_AS(MakeBackend(BackendConfig{}), ConfigError);
}
