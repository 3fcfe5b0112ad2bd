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


#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "toolpilot/agent.hpp"
#include "toolpilot/backends.hpp"
#include "toolpilot/errors.hpp"

// After Eigen: <resolv.h> defines a `res` macro.
#include "httplib.h"

using namespace toolpilot;
using toolpilot::testing::MakeApi;
using toolpilot::testing::MatchesGolden;
using toolpilot::testing::SmallEncoder;

namespace {

std::vector<ApiRecord> DoorApis() {
  return {
      MakeApi("open_door", "Opens a door.",
              {{"door_id", ParamType::kInt, true, "numeric door id"},
               {"force", ParamType::kBool, false, "override interlocks"}}),
      MakeApi("set_timer", "Sets a countdown timer.",
              {{"seconds", ParamType::kFloat, true, "duration"},
               {"label", ParamType::kString, false, "display label"}}),
      MakeApi("list_doors", "Lists all doors."),
  };
}

std::string Call(const std::string& api, const Json& args) {
  return Json{{"action", api}, {"arguments", args}}.dump();
}

std::string Answer(const std::string& text) {
  return Json{{"final_answer", text}}.dump();
}

// Step-level contract: an observation exactly when a call was accepted.
void CheckTraceInvariants(const AgentTrace& trace, const EpisodeConfig& cfg) {
  CHECK(trace.steps.size() <= static_cast<std::size_t>(cfg.max_steps));
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    const bool is_call = s.parsed && std::holds_alternative<ToolCall>(*s.parsed);
    const bool is_finish = s.parsed && std::holds_alternative<Finish>(*s.parsed);
    CHECK(s.observation.has_value() == is_call);
    if (is_finish) CHECK(i + 1 == trace.steps.size());
    CHECK(s.parsed.has_value() != s.error.has_value());
  }
}

}  // namespace

TEST_CASE("parse action") {
  const auto call = ParseAction(R"({"action":"get_camera_list","arguments":{}})");
  REQUIRE(std::holds_alternative<ToolCall>(call));
  CHECK(std::get<ToolCall>(call).api_id == "get_camera_list");
  CHECK(std::get<ToolCall>(call).arguments == Json::object());

  CHECK(std::get<Finish>(ParseAction(R"({"final_answer":"done"})")).answer == "done");
  CHECK(std::get<ToolCall>(ParseAction(R"({"action":"x"})")).arguments == Json::object());
  CHECK_THROWS_AS(ParseAction("I think we should open the door."), MalformedAction);
  CHECK_THROWS_AS(ParseAction(R"({"action":"x","final_answer":"y"})"), MalformedAction);
  CHECK_THROWS_AS(ParseAction(R"({"action":"x","args":{}})"), MalformedAction);
  CHECK_THROWS_AS(ParseAction(R"({"action":"x","arguments":[1]})"), MalformedAction);
  CHECK_THROWS_AS(ParseAction(R"({"action":3})"), MalformedAction);
  CHECK_THROWS_AS(ParseAction(R"({"final_answer":5})"), MalformedAction);
  CHECK_THROWS_AS(ParseAction(R"({"thought":"hmm"})"), MalformedAction);
  CHECK_THROWS_AS(ParseAction(""), MalformedAction);

  // Scratchpad prefix, braces inside strings, unparsable leading object.
  const auto prefixed = ParseAction(
      "Thought: the door is {closed}.\n"
      R"({"action":"open_door","arguments":{"door_id":4}} trailing)");
  CHECK(std::get<ToolCall>(prefixed).arguments == Json{{"door_id", 4}});
  CHECK(std::get<Finish>(ParseAction(R"({"final_answer":"a } b { c"})")).answer ==
        "a } b { c");
}

TEST_CASE("validate call and coercion") {
  const auto apis = DoorApis();
  const ToolCall exact{"open_door", {{"door_id", 3}, {"force", true}}};
  CHECK(ValidateCall(exact, apis) == exact);
  CHECK(ValidateCall({"list_doors", Json::object()}, apis).arguments == Json::object());

  CHECK(ValidateCall({"open_door", {{"door_id", "3"}}}, apis).arguments ==
        Json{{"door_id", 3}});
  CHECK(ValidateCall({"open_door", {{"door_id", "-12"}}}, apis).arguments["door_id"] == -12);
  CHECK(ValidateCall({"open_door", {{"door_id", 3.0}}}, apis).arguments["door_id"].is_number_integer());
  CHECK(ValidateCall({"open_door", {{"door_id", 1}, {"force", "false"}}}, apis)
            .arguments["force"] == false);
  CHECK(ValidateCall({"set_timer", {{"seconds", "2.5"}}}, apis).arguments["seconds"] == 2.5);
  CHECK(ValidateCall({"set_timer", {{"seconds", 2}}}, apis).arguments["seconds"] == 2.0);

  auto expect_param = [&](const ToolCall& c, ParamError::Reason reason,
                          const std::string& name) {
    try {
      ValidateCall(c, apis);
      FAIL("expected ParamError");
    } catch (const ParamError& e) {
      CHECK(e.reason() == reason);
      CHECK(e.param() == name);
    }
  };
  expect_param({"open_door", Json::object()}, ParamError::Reason::kMissing, "door_id");
  expect_param({"open_door", {{"door_id", "3.5"}}}, ParamError::Reason::kTypeMismatch, "door_id");
  expect_param({"open_door", {{"door_id", 3.5}}}, ParamError::Reason::kTypeMismatch, "door_id");
  expect_param({"open_door", {{"door_id", true}}}, ParamError::Reason::kTypeMismatch, "door_id");
  expect_param({"open_door", {{"door_id", 1}, {"force", "yes"}}},
               ParamError::Reason::kTypeMismatch, "force");
  expect_param({"set_timer", {{"seconds", 1}, {"label", 7}}},
               ParamError::Reason::kTypeMismatch, "label");
  expect_param({"set_timer", {{"seconds", "soon"}}}, ParamError::Reason::kTypeMismatch, "seconds");
  expect_param({"list_doors", {{"floor", 1}}}, ParamError::Reason::kUnexpected, "floor");
  CHECK_THROWS_AS(ValidateCall({"fly", Json::object()}, apis), UnknownApi);
}

TEST_CASE("prompt assembly") {
  const auto apis = DoorApis();
  const std::string p = AssemblePrompt("open door 4", apis, "");
  CHECK(p == AssemblePrompt("open door 4", apis, ""));
  CHECK(p.find("## Demonstrations") == std::string::npos);
  CHECK(PromptApiIds(p) == std::vector<std::string>{"open_door", "set_timer", "list_doors"});
  CHECK(MatchesGolden("prompt_order_a.txt", p));

  const std::vector<ApiRecord> permuted = {apis[2], apis[0], apis[1]};
  const std::string q = AssemblePrompt("open door 4", permuted, "");
  CHECK(MatchesGolden("prompt_order_b.txt", q));
  // Only the API section differs.
  const auto head = p.find("## Available APIs");
  const auto tail = p.find("## Instruction");
  CHECK(p.substr(0, head) == q.substr(0, head));
  CHECK(p.substr(tail) == q.substr(q.find("## Instruction")));

  const std::string with_demos = AssemblePrompt("open door 4", apis, "Demo 1:\nsomething\n");
  CHECK(with_demos.find("## Demonstrations\nDemo 1:\nsomething\n") != std::string::npos);
}

TEST_CASE("scripted episode with two calls then finish") {
  const auto apis = DoorApis();
  MockToolRegistry registry(apis);
  ScriptedBackend backend({Call("list_doors", Json::object()),
                           Call("open_door", {{"door_id", 4}}), Answer("door 4 open")});
  const EpisodeConfig cfg;
  const auto trace = RunEpisode("open door 4", apis, "", backend, registry, cfg);
  CHECK(trace.steps.size() == 3);
  CHECK(trace.termination == Termination::kFinished);
  CHECK(trace.final_answer == "door 4 open");
  CHECK(trace.SuccessfulCalls().size() == 2);
  CheckTraceInvariants(trace, cfg);

  // The prompt at step t carries steps 1..t-1 verbatim.
  const std::string base = AssemblePrompt("open door 4", apis, "");
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const std::span<const AgentStep> prior(trace.steps.data(), t);
    CHECK(trace.steps[t].prompt == PromptWithHistory(base, prior));
    if (t > 0) CHECK(trace.steps[t].prompt.find(SerializeHistory(prior)) != std::string::npos);
  }
  CHECK(MatchesGolden("history_three_steps.txt", SerializeHistory(trace.steps)));
}

TEST_CASE("episode termination contracts") {
  const auto apis = DoorApis();
  MockToolRegistry registry(apis);

  for (int n : {1, 4, 10}) {
    ConstantBackend forever(Call("list_doors", Json::object()));
    EpisodeConfig cfg;
    cfg.max_steps = n;
    const auto t = RunEpisode("loop", apis, "", forever, registry, cfg);
    CHECK(t.termination == Termination::kMaxSteps);
    CHECK(t.steps.size() == static_cast<std::size_t>(n));
    CheckTraceInvariants(t, cfg);
  }

  for (int r : {1, 3, 5}) {
    ConstantBackend prose("Let me think about which door to open.");
    EpisodeConfig cfg;
    cfg.retry_budget = r;
    const auto t = RunEpisode("prose", apis, "", prose, registry, cfg);
    CHECK(t.termination == Termination::kUnrecoverableError);
    CHECK(t.steps.size() == static_cast<std::size_t>(r));
    CheckTraceInvariants(t, cfg);
  }

  // Errors separated by a good call reset the counter.
  ScriptedBackend mixed({"oops", Call("open_door", Json::object()), Call("list_doors", Json::object()),
                         "nope", Call("fly", Json::object()), Answer("ok")});
  EpisodeConfig cfg;
  cfg.retry_budget = 3;
  const auto t = RunEpisode("mixed", apis, "", mixed, registry, cfg);
  CHECK(t.termination == Termination::kFinished);
  CHECK(t.steps.size() == 6);
  CHECK(t.steps[1].error.value().find("MissingParam: door_id") != std::string::npos);
  CHECK(t.steps[4].error.value().find("UnknownApi") != std::string::npos);
  CheckTraceInvariants(t, cfg);

  // Backend failure is unrecoverable at once.
  ScriptedBackend short_script({Call("list_doors", Json::object())});
  const auto b = RunEpisode("short", apis, "", short_script, registry, cfg);
  CHECK(b.termination == Termination::kUnrecoverableError);
  CHECK(b.steps.size() == 2);
  CHECK(b.steps.back().error.value().find("BackendError") != std::string::npos);

  EpisodeConfig bad;
  bad.max_steps = 0;
  ConstantBackend any(Answer("x"));
  CHECK_THROWS_AS(RunEpisode("x", apis, "", any, registry, bad), ConfigError);
}

TEST_CASE("trace json round trip") {
  const auto apis = DoorApis();
  MockToolRegistry registry(apis);
  ScriptedBackend backend({"bad output", Call("open_door", {{"door_id", "4"}}), Answer("done")});
  auto trace = RunEpisode("open door 4", apis, "", backend, registry, EpisodeConfig{});
  trace.demo_source = "subtask_level";
  const Json doc = TraceToJson(trace);
  CHECK(doc["schema"] == "trace");
  CHECK(doc["version"] == kTraceSchemaVersion);
  CHECK(TraceFromJson(doc) == trace);
  CHECK(TraceFromJson(Json::parse(doc.dump())) == trace);

  const std::vector<AgentTrace> suite = {trace, trace};
  const std::string text = SerializeTraceSuite(suite);
  CHECK(ParseTraceSuite(text) == suite);
  CHECK(ParseTraceSuite(doc.dump()) == std::vector<AgentTrace>{trace});
  CHECK_THROWS(ParseTraceSuite("{\"schema\":\"other\"}"));
}

TEST_CASE("oracle backend replays gold and gives up when gated") {
  const auto apis = DoorApis();
  GoldTrajectory gold{"open door 4 and time it",
                      {{"open_door", {{"door_id", 4}}}, {"set_timer", {{"seconds", 30.0}}}},
                      "done"};
  MockToolRegistry registry(apis);
  OracleBackend oracle(gold);
  const auto t = RunEpisode(gold.instruction, apis, "", oracle, registry, EpisodeConfig{});
  CHECK(t.termination == Termination::kFinished);
  REQUIRE(t.SuccessfulCalls().size() == 2);
  CHECK(t.SuccessfulCalls()[0].api_id == "open_door");
  CHECK(t.final_answer == "done");

  OracleBackend gated(gold, true);
  const std::vector<ApiRecord> partial = {apis[0], apis[2]};
  const auto g = RunEpisode(gold.instruction, partial, "", gated, registry, EpisodeConfig{});
  CHECK(g.steps.size() == 1);
  CHECK(g.final_answer == std::string(OracleBackend::kGiveUpAnswer));
}

TEST_CASE("prompt map and scripted backends") {
  const std::string prompt = "hello";
  const auto map = PromptMapBackend::FromJsonLines(
      Json{{"prompt_hash", PromptMapBackend::PromptHash(prompt)}, {"response", "hi"}}.dump() + "\n");
  PromptMapBackend backend = map;
  CHECK(backend.Complete(prompt) == "hi");
  CHECK_THROWS_AS(backend.Complete("other"), BackendError);
  CHECK_THROWS_AS(PromptMapBackend::FromJsonLines("{\"x\":1}\n"), ParseError);

  CHECK(ScriptedBackend::ParseScript("\"a\"\n\n{\"response\":\"b\"}\n") ==
        std::vector<std::string>{"a", "b"});
  CHECK_THROWS_AS(ScriptedBackend::ParseScript("\"a\"\n42\n"), ParseError);

  const auto apis = DoorApis();
  MockToolRegistry reg(apis);
  const ToolCall c{"list_doors", Json::object()};
  CHECK(reg.Execute(c).observation == reg.Execute(c).observation);
  CHECK(reg.Execute(c).ok);
  CHECK_FALSE(reg.Execute({"fly", Json::object()}).ok);
}

TEST_CASE("http backend request, response and retry") {
  HttpBackendConfig cfg;
  cfg.model = "tiny";
  cfg.retries = 1;
  cfg.timeout = std::chrono::seconds(5);
  cfg.token_env = "TOOLPILOT_TEST_TOKEN";

  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth, seen_body;
  server.Post("/v1/chat", [&](const httplib::Request& req, httplib::Response& res) {
    if (hits++ == 0) {
      res.status = 503;
      return;
    }
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"{\"final_answer\":\"hi\"}"}}]})",
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("TOOLPILOT_TEST_TOKEN", "secret", 1);
  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat";
  HttpBackend backend(cfg);
  CHECK(backend.Complete("prompt text") == R"({"final_answer":"hi"})");
  CHECK(hits == 2);
  CHECK(seen_auth == "Bearer secret");
  CHECK(Json::parse(seen_body) == backend.RequestBody("prompt text"));
  CHECK(backend.RequestBody("p")["messages"][0]["role"] == "user");
  server.stop();
  worker.join();

  CHECK_THROWS_AS(HttpBackend::ParseResponse("{}"), BackendError);
  CHECK_THROWS_AS(HttpBackend::ParseResponse("not json"), BackendError);
  HttpBackendConfig bad;
  bad.url = "localhost";
  CHECK_THROWS_AS(HttpBackend{bad}, ConfigError);
}

TEST_CASE("pipeline places retrieved apis in rank order") {
  const auto apis = DoorApis();
  const auto params = SmallEncoder(12);
  const auto index = BuildIndex(apis, params);
  PipelineConfig pc;
  pc.retriever_k = 2;
  const std::vector<DemoRecord> demos = {
      {"task_demo_0", "Instruction: open door 2\nAction: open_door", DemoLevel::kSubtask, {}},
      {"api_demo_open_door", "open_door usage", DemoLevel::kApi, {"open_door"}}};
  const Pipeline pipeline(params, index, apis, demos, pc);
  const auto ranked = Retrieve(index, "open door 4", 2, params).Ids();
  MockToolRegistry registry(apis);

  ScriptedBackend b1({Call(ranked[0], {{"door_id", 4}}), Answer("ok")});
  const auto t1 = pipeline.Run("open door 4", b1, registry);
  CHECK(t1.prompt_api_ids == ranked);
  CHECK(PromptApiIds(t1.steps[0].prompt) == ranked);
  CHECK(t1.demo_source.has_value());

  ScriptedBackend b2({Call(ranked[0], {{"door_id", 4}}), Answer("ok")});
  const auto t2 = pipeline.Run("open door 4", b2, registry);
  CHECK(TraceToJson(t1).dump() == TraceToJson(t2).dump());

  const auto other = SmallEncoder(13);
  CHECK_THROWS_AS(Pipeline(other, index, apis, demos, pc), StaleIndex);
}
