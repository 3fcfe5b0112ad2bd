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
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "toolpilot/demo_selector.hpp"
#include "toolpilot/errors.hpp"
#include "toolpilot/file_util.hpp"
#include "toolpilot/retriever.hpp"
#include "toolpilot/tokenizer.hpp"

using namespace toolpilot;
using toolpilot::testing::BruteForceRanking;
using toolpilot::testing::MakeApi;
using toolpilot::testing::RandomApis;
using toolpilot::testing::RandomText;
using toolpilot::testing::SmallEncoder;

TEST_CASE("retrieve equals brute-force oracle") {
  Rng rng(17);
  for (int corpus = 0; corpus < 20; ++corpus) {
    const int n = 1 + static_cast<int>(rng.Below(60));
    const auto apis = RandomApis(rng, n);
    const auto params = SmallEncoder(corpus);
    const auto index = BuildIndex(apis, params);
    REQUIRE(index.size() == static_cast<std::size_t>(n));
    for (int q = 0; q < 5; ++q) {
      const std::string query = RandomText(rng, 1, 5);
      const auto oracle = BruteForceRanking(apis, params, query);
      for (int k : {1, 3, n, n + 4}) {
        const auto got = Retrieve(index, query, k, params).ranked;
        const std::size_t expect_len = std::min<std::size_t>(k, n);
        REQUIRE(got.size() == expect_len);
        for (std::size_t i = 0; i < expect_len; ++i) {
          CHECK(got[i].id == oracle[i].id);
          CHECK(std::abs(got[i].score - oracle[i].score) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("retrieve output is prefix-stable in k") {
  Rng rng(23);
  const auto apis = RandomApis(rng, 40);
  const auto params = SmallEncoder(2);
  const auto index = BuildIndex(apis, params);
  const Retriever retriever(index, params);
  for (int q = 0; q < 10; ++q) {
    const std::string query = RandomText(rng, 1, 4);
    const auto full = retriever(query, 40).Ids();
    for (int k = 1; k <= 40; ++k) {
      const auto part = retriever(query, k).Ids();
      CHECK(std::equal(part.begin(), part.end(), full.begin()));
    }
  }
}

TEST_CASE("identical text ranks first with unit score") {
  const std::vector<ApiRecord> apis = {
      MakeApi("open_door", "opens a door by id"),
      MakeApi("close_door", "closes a door by id"),
      MakeApi("list_cameras", "lists every camera")};
  const auto params = SmallEncoder(1);
  const auto index = BuildIndex(apis, params);
  const auto r = Retrieve(index, "close_door: closes a door by id", 2, params);
  CHECK(r.ranked[0].id == "close_door");
  CHECK(std::abs(r.ranked[0].score - 1.0) < 1e-6);

  // Twins with identical indexed text tie; ascending id wins.
  std::vector<ApiRecord> twins = {MakeApi("b_tool", "same words"),
                                  MakeApi("a_tool", "same words")};
  twins[0].name = twins[1].name = "same";
  const auto tidx = BuildIndex(twins, params);
  const auto tr = Retrieve(tidx, "same words", 2, params);
  CHECK(tr.ranked[0].score == tr.ranked[1].score);
  CHECK(tr.Ids() == std::vector<std::string>{"a_tool", "b_tool"});
}

TEST_CASE("index build and persistence") {
  const auto params = SmallEncoder(5);
  CHECK(BuildIndex({}, params).size() == 0);
  const std::vector<ApiRecord> apis = {MakeApi("x", "alpha beta"), MakeApi("y", "gamma")};
  const auto index = BuildIndex(apis, params);
  CHECK(SerializeIndex(BuildIndex(apis, params)) == SerializeIndex(index));
  CHECK(DeserializeIndex(SerializeIndex(index)) == index);

  auto dup = apis;
  dup.push_back(apis[0]);
  CHECK_THROWS_AS(BuildIndex(dup, params), DuplicateApiId);
  std::vector<ApiRecord> bad = {MakeApi("blank", "")};
  bad[0].name = "";
  try {
    BuildIndex(bad, params);
    FAIL("expected EmptyText");
  } catch (const EmptyText& e) {
    CHECK(std::string(e.what()).find("blank") != std::string::npos);
  }

  const auto other = SmallEncoder(6);
  CHECK_THROWS_AS(Retriever(index, other), StaleIndex);
  CHECK_THROWS_AS(Retrieve(index, "alpha", 1, other), StaleIndex);
  CHECK_THROWS_AS(Retrieve(index, "alpha", 0, params), ConfigError);
  CHECK_THROWS_AS(Retrieve(index, "", 1, params), EmptyText);

  const auto dir = toolpilot::testing::TempDir("index");
  SaveIndex(index, dir / "idx.bin");
  CHECK(LoadIndex(dir / "idx.bin", params) == index);
  CHECK_THROWS_AS(LoadIndex(dir / "idx.bin", other), StaleIndex);
}

TEST_CASE("recall at k") {
  const std::vector<ApiRecord> apis = {
      MakeApi("open_door", "opens a door"), MakeApi("list_cameras", "lists cameras"),
      MakeApi("sound_alarm", "sounds the alarm"), MakeApi("read_sensor", "reads a sensor")};
  const auto params = SmallEncoder(8);
  const auto index = BuildIndex(apis, params);
  const Retriever retriever(index, params);

  const std::vector<EvalQuery> exact = {
      {"open_door: opens a door", {"open_door"}},
      {"sound_alarm: sounds the alarm", {"sound_alarm"}}};
  CHECK(RecallAtK(index, params, exact, 1) == 1.0);

  // Macro average of per-query coverage, counted against the ranking.
  const std::vector<EvalQuery> multi = {
      {"open_door: opens a door", {"open_door", "read_sensor"}},
      {"camera door alarm", {"list_cameras"}}};
  for (int k = 1; k <= 4; ++k) {
    const auto top = std::vector<std::string>(retriever(multi[0].instruction, k).Ids());
    const auto top2 = std::vector<std::string>(retriever(multi[1].instruction, k).Ids());
    auto has = [](const std::vector<std::string>& v, const char* id) {
      return std::find(v.begin(), v.end(), id) != v.end() ? 1.0 : 0.0;
    };
    const double q1 = (has(top, "open_door") + has(top, "read_sensor")) / 2.0;
    const double q2 = has(top2, "list_cameras");
    CHECK(RecallAtK(index, params, multi, k) == doctest::Approx((q1 + q2) / 2.0).epsilon(1e-12));
  }
  CHECK(RecallAtK(index, params, multi, 4) == 1.0);
  CHECK(PerQueryRecall(retriever, multi, 4) == std::vector<double>{1.0, 1.0});

  const std::vector<EvalQuery> unknown = {{"door", {"nope"}}};
  CHECK_THROWS_AS(RecallAtK(index, params, unknown, 1), UnknownGoldId);
  CHECK_THROWS_AS(RecallAtK(index, params, {}, 1), ConfigError);
}

TEST_CASE("recall is monotone in k") {
  Rng rng(31);
  const auto apis = RandomApis(rng, 25);
  const auto params = SmallEncoder(3);
  const auto index = BuildIndex(apis, params);
  std::vector<EvalQuery> queries;
  for (int i = 0; i < 40; ++i) {
    queries.push_back({RandomText(rng, 1, 5),
                       {apis[rng.Below(apis.size())].id, apis[rng.Below(apis.size())].id}});
  }
  double prev = 0.0;
  for (int k = 1; k <= 25; ++k) {
    const double r = RecallAtK(index, params, queries, k);
    CHECK(r >= prev);
    prev = r;
  }
  CHECK(prev == 1.0);
}

// ---------------------------------------------------------------- demos

namespace {

struct HandEncoder {
  EncoderParams params;
};

// dim 3, unigram only, identity projection: a one-word text embeds to
// its bucket row, normalized.
HandEncoder MakeHandEncoder(
    const std::vector<std::pair<std::string, Eigen::Vector3d>>& rows) {
  HandEncoder h;
  h.params.dim = 3;
  h.params.num_buckets = 4093;
  h.params.ngram_orders = {1};
  h.params.tensors = EncoderTensors<double>::Zero(4093, 3);
  h.params.tensors.projection.setIdentity();
  std::set<std::uint32_t> used;
  for (const auto& [word, v] : rows) {
    const std::vector<std::string> tok = {word};
    const auto b = NgramBucket(tok, 4093);
    REQUIRE(used.insert(b).second);
    h.params.tensors.table.row(b) = v.transpose();
  }
  return h;
}

Eigen::Vector3d AtCos(double c) { return {c, std::sqrt(1.0 - c * c), 0.0}; }

DemoRecord Demo(std::string id, std::string text, DemoLevel level) {
  DemoRecord d{std::move(id), std::move(text), level, {}};
  if (level == DemoLevel::kApi) d.related_api_ids = {"some_api"};
  return d;
}

}  // namespace

TEST_CASE("hand-built similarities select the top two") {
  const auto h = MakeHandEncoder({{"query", {1, 0, 0}},
                                  {"alpha", AtCos(0.9)},
                                  {"beta", AtCos(0.7)},
                                  {"gamma", AtCos(0.2)},
                                  {"fallbackone", AtCos(0.5)},
                                  {"fallbacktwo", AtCos(0.8)}});
  const std::vector<DemoRecord> kb = {Demo("d_gamma", "gamma", DemoLevel::kSubtask),
                                      Demo("d_alpha", "alpha", DemoLevel::kSubtask),
                                      Demo("d_beta", "beta", DemoLevel::kSubtask)};
  const std::vector<DemoRecord> api = {Demo("f1", "fallbackone", DemoLevel::kApi),
                                       Demo("f2", "fallbacktwo", DemoLevel::kApi)};

  const auto sel = SelectDemos("query", kb, api, {0.6, 2}, h.params);
  CHECK(sel.source == DemoSource::kSubtaskLevel);
  REQUIRE(sel.demos.size() == 2);
  CHECK(sel.demos[0].id == "d_alpha");
  CHECK(sel.demos[1].id == "d_beta");
  CHECK(std::abs(sel.demos[0].score - 0.9) < 1e-12);
  CHECK(std::abs(sel.demos[1].score - 0.7) < 1e-12);

  // Only alpha exceeds 0.8; top_k is an upper bound.
  const auto one = SelectDemos("query", kb, api, {0.8, 3}, h.params);
  CHECK(one.demos.size() == 1);
  CHECK(one.source == DemoSource::kSubtaskLevel);

  const auto fb = SelectDemos("query", kb, api, {0.95, 3}, h.params);
  CHECK(fb.source == DemoSource::kApiLevelFallback);
  REQUIRE(fb.demos.size() == 2);
  CHECK(fb.demos[0].id == "f2");
  CHECK(fb.demos[1].id == "f1");
  CHECK(DemoSourceName(fb.source) == "api_level_fallback");
  CHECK(DemoSourceName(sel.source) == "subtask_level");
}

TEST_CASE("threshold is strict") {
  // (3,4,0)/5 has cosine exactly 0.6 with (1,0,0).
  const auto h = MakeHandEncoder({{"query", {1, 0, 0}}, {"edge", {3, 4, 0}},
                                  {"apidemo", {0, 1, 0}}});
  const std::vector<DemoRecord> kb = {Demo("edge", "edge", DemoLevel::kSubtask)};
  const std::vector<DemoRecord> api = {Demo("a", "apidemo", DemoLevel::kApi)};
  CHECK(Embed("edge", h.params)(0) == 0.6);
  CHECK(SelectDemos("query", kb, api, {0.6, 3}, h.params).source ==
        DemoSource::kApiLevelFallback);
  CHECK(SelectDemos("query", kb, api, {0.5999, 3}, h.params).source ==
        DemoSource::kSubtaskLevel);
}

TEST_CASE("demo selector threshold laws on random pools") {
  Rng rng(41);
  const auto params = SmallEncoder(9);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<DemoRecord> kb, api;
    const int nk = 1 + static_cast<int>(rng.Below(8));
    for (int i = 0; i < nk; ++i) {
      kb.push_back(Demo("k" + std::to_string(i), RandomText(rng, 2, 6), DemoLevel::kSubtask));
    }
    for (int i = 0; i < 4; ++i) {
      api.push_back(Demo("a" + std::to_string(i), RandomText(rng, 2, 6), DemoLevel::kApi));
    }
    const std::string q = RandomText(rng, 2, 6);
    CHECK(SelectDemos(q, kb, api, {1.0, 3}, params).source == DemoSource::kApiLevelFallback);
    CHECK(SelectDemos(q, kb, api, {1.5, 3}, params).source == DemoSource::kApiLevelFallback);
    const auto all = SelectDemos(q, kb, api, {-1.0, nk}, params);
    CHECK(all.source == DemoSource::kSubtaskLevel);
    CHECK(all.demos.size() == static_cast<std::size_t>(nk));
    for (std::size_t i = 1; i < all.demos.size(); ++i) {
      CHECK(RanksBefore(all.demos[i - 1].score, all.demos[i - 1].id,
                        all.demos[i].score, all.demos[i].id));
    }
    // Raising the threshold keeps the surviving order.
    for (double t = -1.0; t <= 1.0; t += 0.1) {
      const auto s = SelectDemos(q, kb, api, {t, nk}, params);
      if (s.source != DemoSource::kSubtaskLevel) continue;
      for (std::size_t i = 0; i < s.demos.size(); ++i) {
        CHECK(s.demos[i].id == all.demos[i].id);
        CHECK(s.demos[i].score > t);
      }
    }
  }
}

TEST_CASE("demo selector errors") {
  const auto params = SmallEncoder(2);
  CHECK_THROWS_AS(SelectDemos("door", {}, {}, {}, params), EmptyDemoPools);
  const std::vector<DemoRecord> kb = {Demo("k", "door", DemoLevel::kSubtask)};
  CHECK_THROWS_AS(SelectDemos("", kb, {}, {}, params), EmptyText);
  CHECK_THROWS_AS(SelectDemos("door", kb, {}, {0.5, 0}, params), ConfigError);
  CHECK_THROWS_AS(DemoPool(kb, DemoLevel::kApi, params), FormatError);

  // No subtask match and an empty api pool: empty fallback.
  const auto none = SelectDemos("door", {}, std::vector<DemoRecord>{Demo("a", "gate", DemoLevel::kApi)},
                                {0.5, 2}, params);
  CHECK(none.source == DemoSource::kApiLevelFallback);
  const auto empty_api = SelectDemos("camera", kb, {}, {1.0, 2}, params);
  CHECK(empty_api.demos.empty());

  const auto same = SelectDemos("door", kb, {}, {0.5, 2}, params);
  CHECK(same.demos.at(0).id == "k");
}

TEST_CASE("render demos") {
  const std::vector<DemoRecord> demos = {
      {"d1", "Instruction: unlock the north gate\n"
             "Action: {\"action\":\"unlock_gate\",\"arguments\":{\"gate\":\"north\"}}\n"
             "Observation: ok", DemoLevel::kSubtask, {}},
      {"d2", "Instruction: list cameras on floor 2\n"
             "Action: {\"action\":\"list_cameras\",\"arguments\":{\"floor\":2}}",
       DemoLevel::kSubtask, {}}};
  CHECK(RenderDemos({}, demos).empty());

  DemoSelection one{{{"d2", 0.8}}, DemoSource::kSubtaskLevel};
  const auto r1 = RenderDemos(one, demos);
  CHECK(r1.find(demos[1].text) != std::string::npos);
  CHECK(r1.find(demos[1].text) == r1.rfind(demos[1].text));

  DemoSelection two{{{"d1", 0.9}, {"d2", 0.8}}, DemoSource::kSubtaskLevel};
  CHECK(RenderDemos(two, demos) ==
        ReadFileBytes(std::string(TOOLPILOT_GOLDEN_DIR) + "/demos_two.txt"));

  DemoSelection missing{{{"ghost", 0.9}}, DemoSource::kSubtaskLevel};
  CHECK_THROWS_AS(RenderDemos(missing, demos), UnknownDemoId);
}
