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

#include "toolpilot/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <string_view>
#include <unordered_set>

#include "toolpilot/errors.hpp"

namespace toolpilot {
namespace {

struct Functionality {
  std::string_view stem;    // used in ids and parameter names
  std::string_view formal;  // description wording
  std::array<std::string_view, 3> user;  // instruction wording
};

// Formal and user vocabularies are disjoint apart from stop words.
constexpr std::array<Functionality, 11> kFunctionalities = {{
    {"camera", "optical capture endpoint", {"camera", "cam", "webcam"}},
    {"alarm", "intrusion notification rule", {"alarm", "siren", "alert"}},
    {"door", "physical access portal", {"door", "gate", "entrance"}},
    {"account", "operator credential profile", {"user", "login", "staff member"}},
    {"recording", "archived footage segment", {"recording", "clip", "video"}},
    {"zone", "monitored perimeter region", {"zone", "area", "sector"}},
    {"visitor", "temporary entrant registration", {"visitor", "guest pass", "badge"}},
    {"schedule", "time window policy", {"schedule", "timetable", "shift"}},
    {"sensor", "environmental probe", {"sensor", "detector", "thermometer"}},
    {"report", "compliance digest document", {"report", "summary", "overview"}},
    {"map", "floor layout drawing", {"map", "blueprint", "site plan"}},
}};

// Qualifiers that extend the cluster list past the base functionalities.
constexpr std::array<std::string_view, 8> kQualifiers = {
    "north", "south", "east", "west", "rooftop", "basement", "lobby", "annex"};

struct Operation {
  std::string_view verb;         // id / name prefix
  std::string_view description;  // "{}" is replaced by the formal noun
  std::array<std::string_view, 3> user;
};

constexpr std::array<Operation, 8> kOperations = {{
    {"list", "Enumerates each {} known to the platform.",
     {"list all", "show me every", "give me all"}},
    {"get", "Fetches the stored attributes of a single {}.",
     {"tell me about", "look up", "what are the details of"}},
    {"create", "Registers a fresh {} in the inventory.",
     {"add", "set up", "create"}},
    {"delete", "Permanently purges one {} from the inventory.",
     {"delete", "remove", "get rid of"}},
    {"update", "Modifies configuration values of an existing {}.",
     {"change", "edit", "adjust"}},
    {"status", "Reports operational health telemetry for a {}.",
     {"check on", "diagnose", "test"}},
    {"export", "Serializes historical {} data into an archive file.",
     {"download", "back up", "save a copy of"}},
    {"search", "Filters {} entries by matching criteria.",
     {"find", "search for", "look for"}},
}};

constexpr std::array<std::string_view, 6> kTemplates = {
    "{verb} the {noun}{args}{ctx}",
    "please {verb} the {noun}{args}{ctx}",
    "can you {verb} the {noun}{args}{ctx}",
    "i need to {verb} a {noun}{args}{ctx}",
    "{ctx_lead}{verb} the {noun}{args}",
    "quickly {verb} that {noun}{args}{ctx}",
};

constexpr std::array<std::string_view, 6> kPlaces = {
    "site", "floor", "building", "wing", "campus", "level"};
constexpr std::array<std::string_view, 6> kSettings = {
    "brightness", "sensitivity", "volume", "timeout", "retention", "mode"};
constexpr std::array<std::string_view, 6> kValues = {
    "high", "low", "medium", "off", "auto", "max"};
constexpr std::array<std::string_view, 6> kQueries = {
    "north", "parking", "loading", "main", "rear", "server"};

std::string ReplaceAll(std::string text, std::string_view from,
                       std::string_view to) {
  for (std::size_t pos = text.find(from); pos != std::string::npos;
       pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
  return text;
}

template <typename Container>
const auto& Pick(const Container& items, Rng& rng) {
  return items[static_cast<std::size_t>(rng.Below(items.size()))];
}

struct ApiBlueprint {
  std::string id;
  std::string stem;  // qualified stem, e.g. "north_camera"
  std::string qualifier;
  const Functionality* functionality;
  const Operation* operation;
  std::vector<std::size_t> templates;  // indices into kTemplates
};

std::vector<ParamSpec> ParamsFor(const ApiBlueprint& bp) {
  const std::string id_param = bp.stem + "_id";
  const std::string noun(bp.functionality->formal);
  const std::string_view verb = bp.operation->verb;
  if (verb == "list") {
    return {{"limit", ParamType::kInt, false, "Maximum number of results."},
            {"site", ParamType::kString, false, "Restrict to one site."}};
  }
  if (verb == "create") {
    return {{"label", ParamType::kString, true, "Label of the new " + noun + "."},
            {"site", ParamType::kString, false, "Owning site."}};
  }
  if (verb == "update") {
    return {{id_param, ParamType::kInt, true, "Identifier of the " + noun + "."},
            {"setting", ParamType::kString, true, "Setting to modify."},
            {"value", ParamType::kString, true, "New value."}};
  }
  if (verb == "export") {
    return {{id_param, ParamType::kInt, true, "Identifier of the " + noun + "."},
            {"days", ParamType::kInt, true, "Number of days of history."},
            {"compress", ParamType::kBool, false, "Compress the archive."}};
  }
  if (verb == "search") {
    return {{"query", ParamType::kString, true, "Filter expression."},
            {"limit", ParamType::kInt, false, "Maximum number of results."}};
  }
  return {{id_param, ParamType::kInt, true, "Identifier of the " + noun + "."}};
}

// Random values for the required parameters plus the phrase that mentions
// them in an instruction.
std::pair<Json, std::string> SampleArguments(
    const std::vector<ParamSpec>& params, Rng& rng) {
  Json args = Json::object();
  std::string phrase;
  for (const auto& p : params) {
    if (!p.required) continue;
    if (p.name == "label") {
      const std::string label = std::string(Pick(kQueries, rng)) + "_" +
                                std::to_string(rng.Below(100));
      args[p.name] = label;
      phrase += " named " + label;
    } else if (p.name == "setting") {
      const std::string setting(Pick(kSettings, rng));
      args[p.name] = setting;
      phrase += " setting " + setting;
    } else if (p.name == "value") {
      const std::string value(Pick(kValues, rng));
      args[p.name] = value;
      phrase += " to " + value;
    } else if (p.name == "days") {
      const auto days = static_cast<std::int64_t>(1 + rng.Below(30));
      args[p.name] = days;
      phrase += " covering " + std::to_string(days) + " days";
    } else if (p.name == "query") {
      const std::string q(Pick(kQueries, rng));
      args[p.name] = q;
      phrase += " matching " + q;
    } else if (p.type == ParamType::kInt) {
      const auto id = static_cast<std::int64_t>(1 + rng.Below(500));
      args[p.name] = id;
      phrase += " number " + std::to_string(id);
    }
  }
  return {std::move(args), std::move(phrase)};
}

struct Utterance {
  std::string text;
  Json arguments;
};

Utterance SampleInstruction(const ApiBlueprint& bp,
                            const std::vector<ParamSpec>& params, Rng& rng) {
  const auto& tmpl = kTemplates[bp.templates[rng.Below(bp.templates.size())]];
  std::string noun(Pick(bp.functionality->user, rng));
  if (!bp.qualifier.empty()) noun = bp.qualifier + " " + noun;
  auto [args, args_phrase] = SampleArguments(params, rng);
  const std::string place = std::string(Pick(kPlaces, rng)) + " " +
                            std::to_string(1 + rng.Below(20));
  std::string text(tmpl);
  text = ReplaceAll(text, "{verb}", Pick(bp.operation->user, rng));
  text = ReplaceAll(text, "{noun}", noun);
  text = ReplaceAll(text, "{args}", args_phrase);
  text = ReplaceAll(text, "{ctx_lead}", "on " + place + ", ");
  text = ReplaceAll(text, "{ctx}", " on " + place);
  return {std::move(text), std::move(args)};
}

}  // namespace

double SyntheticSpec::MeanTrajectoryLength() const {
  double mean = 0.0;
  for (const auto& [len, p] : trajectory_lengths) mean += len * p;
  return mean;
}

void SyntheticSpec::Validate() const {
  const int max_clusters =
      static_cast<int>(kFunctionalities.size() * (1 + kQualifiers.size()));
  if (num_functionalities < 1 || num_functionalities > max_clusters) {
    throw ConfigError("num_functionalities must lie in [1, " +
                      std::to_string(max_clusters) + "]");
  }
  if (apis_per_functionality < 1 ||
      apis_per_functionality > static_cast<int>(kOperations.size())) {
    throw ConfigError("apis_per_functionality must lie in [1, 8]");
  }
  if (extra_apis < 0 || extra_apis > num_functionalities ||
      apis_per_functionality + (extra_apis > 0 ? 1 : 0) >
          static_cast<int>(kOperations.size())) {
    throw ConfigError("extra_apis out of range");
  }
  if (templates_per_api < 1 ||
      templates_per_api > static_cast<int>(kTemplates.size())) {
    throw ConfigError("templates_per_api must lie in [1, 6]");
  }
  if (trajectory_lengths.empty()) {
    throw ConfigError("trajectory length distribution is empty");
  }
  double total = 0.0;
  for (const auto& [len, p] : trajectory_lengths) {
    if (len < 1 || len > TotalApis()) {
      throw ConfigError("trajectory length " + std::to_string(len) +
                        " is out of range");
    }
    if (!(p >= 0.0)) throw ConfigError("negative trajectory probability");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw ConfigError("trajectory length probabilities must sum to 1");
  }
  if (num_training_pairs < 0 || num_eval_queries < 0 ||
      num_trajectories < 0 || num_subtask_demos < 0) {
    throw ConfigError("corpus counts must be non-negative");
  }
}

Json SyntheticSpec::ToJson() const {
  Json lengths = Json::object();
  for (const auto& [len, p] : trajectory_lengths) {
    lengths[std::to_string(len)] = p;
  }
  return Json{{"num_functionalities", num_functionalities},
              {"apis_per_functionality", apis_per_functionality},
              {"extra_apis", extra_apis},
              {"templates_per_api", templates_per_api},
              {"trajectory_lengths", std::move(lengths)},
              {"num_training_pairs", num_training_pairs},
              {"num_eval_queries", num_eval_queries},
              {"num_trajectories", num_trajectories},
              {"num_subtask_demos", num_subtask_demos},
              {"seed", seed}};
}

SyntheticSpec SyntheticSpec::FromJson(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("synthetic spec must be an object");
  SyntheticSpec spec;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "num_functionalities") {
        spec.num_functionalities = value.get<int>();
      } else if (key == "apis_per_functionality") {
        spec.apis_per_functionality = value.get<int>();
      } else if (key == "extra_apis") {
        spec.extra_apis = value.get<int>();
      } else if (key == "templates_per_api") {
        spec.templates_per_api = value.get<int>();
      } else if (key == "trajectory_lengths") {
        spec.trajectory_lengths.clear();
        for (const auto& [len, p] : value.items()) {
          spec.trajectory_lengths[std::stoi(len)] = p.get<double>();
        }
      } else if (key == "num_training_pairs") {
        spec.num_training_pairs = value.get<int>();
      } else if (key == "num_eval_queries") {
        spec.num_eval_queries = value.get<int>();
      } else if (key == "num_trajectories") {
        spec.num_trajectories = value.get<int>();
      } else if (key == "num_subtask_demos") {
        spec.num_subtask_demos = value.get<int>();
      } else if (key == "seed") {
        spec.seed = value.get<std::uint64_t>();
      } else {
        throw ConfigError("unknown synthetic spec key '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad synthetic spec: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ConfigError(std::string("bad synthetic spec: ") + e.what());
  }
  spec.Validate();
  return spec;
}

int SampleTrajectoryLength(const SyntheticSpec& spec, Rng& rng) {
  const double u = rng.Unit();
  double cumulative = 0.0;
  for (const auto& [len, p] : spec.trajectory_lengths) {
    cumulative += p;
    if (u < cumulative) return len;
  }
  return spec.trajectory_lengths.rbegin()->first;
}

SyntheticCorpus GenerateSyntheticCorpus(const SyntheticSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  SyntheticCorpus corpus;

  // APIs: each cluster draws its operations without replacement.
  std::vector<ApiBlueprint> blueprints;
  std::vector<std::vector<ParamSpec>> params;
  for (int f = 0; f < spec.num_functionalities; ++f) {
    const auto& base = kFunctionalities[static_cast<std::size_t>(f) %
                                        kFunctionalities.size()];
    const auto round = static_cast<std::size_t>(f) / kFunctionalities.size();
    const std::string qualifier =
        round == 0 ? "" : std::string(kQualifiers[round - 1]);
    const std::string stem =
        qualifier.empty() ? std::string(base.stem)
                          : qualifier + "_" + std::string(base.stem);
    std::vector<std::size_t> ops(kOperations.size());
    std::iota(ops.begin(), ops.end(), std::size_t{0});
    FisherYatesShuffle(std::span<std::size_t>(ops), rng);
    const int count = spec.apis_per_functionality + (f < spec.extra_apis ? 1 : 0);
    for (int j = 0; j < count; ++j) {
      ApiBlueprint bp;
      bp.functionality = &base;
      bp.operation = &kOperations[ops[static_cast<std::size_t>(j)]];
      bp.qualifier = qualifier;
      bp.stem = stem;
      bp.id = std::string(bp.operation->verb) + "_" + stem;
      std::vector<std::size_t> tmpl(kTemplates.size());
      std::iota(tmpl.begin(), tmpl.end(), std::size_t{0});
      FisherYatesShuffle(std::span<std::size_t>(tmpl), rng);
      tmpl.resize(static_cast<std::size_t>(spec.templates_per_api));
      bp.templates = std::move(tmpl);

      std::string formal(base.formal);
      if (!qualifier.empty()) formal = qualifier + " " + formal;
      ApiRecord api;
      api.id = bp.id;
      api.name = bp.id;
      api.description = ReplaceAll(std::string(bp.operation->description), "{}", formal);
      api.parameters = ParamsFor(bp);
      api.category = stem;
      params.push_back(api.parameters);
      corpus.apis.push_back(std::move(api));
      blueprints.push_back(std::move(bp));
    }
  }
  const std::size_t n = blueprints.size();

  // Training pairs cycle through a shuffled API order for even coverage.
  std::unordered_set<std::string> seen_instructions;
  std::vector<std::size_t> cycle(n);
  std::iota(cycle.begin(), cycle.end(), std::size_t{0});
  for (int i = 0; i < spec.num_training_pairs; ++i) {
    if (static_cast<std::size_t>(i) % n == 0) {
      FisherYatesShuffle(std::span<std::size_t>(cycle), rng);
    }
    const std::size_t a = cycle[static_cast<std::size_t>(i) % n];
    auto utt = SampleInstruction(blueprints[a], params[a], rng);
    seen_instructions.insert(utt.text);
    corpus.training_pairs.push_back({std::move(utt.text), blueprints[a].id});
  }

  // Held-out queries never repeat a training instruction verbatim.
  for (int i = 0; i < spec.num_eval_queries; ++i) {
    const auto a = static_cast<std::size_t>(rng.Below(n));
    Utterance utt = SampleInstruction(blueprints[a], params[a], rng);
    for (int tries = 0; seen_instructions.contains(utt.text) && tries < 100;
         ++tries) {
      utt = SampleInstruction(blueprints[a], params[a], rng);
    }
    corpus.eval_queries.push_back({std::move(utt.text), {blueprints[a].id}});
  }

  // Multi-step trajectories over distinct APIs.
  auto sample_trajectory = [&]() {
    const auto len = static_cast<std::size_t>(SampleTrajectoryLength(spec, rng));
    std::vector<std::size_t> picks(n);
    std::iota(picks.begin(), picks.end(), std::size_t{0});
    for (std::size_t i = 0; i < len; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.Below(n - i));
      std::swap(picks[i], picks[j]);
    }
    GoldTrajectory traj;
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t a = picks[i];
      auto utt = SampleInstruction(blueprints[a], params[a], rng);
      if (!traj.instruction.empty()) traj.instruction += ", then ";
      traj.instruction += utt.text;
      traj.calls.push_back({blueprints[a].id, std::move(utt.arguments)});
    }
    traj.reference_answer = "completed " + std::to_string(len) + " step" +
                            (len == 1 ? "" : "s");
    return traj;
  };
  for (int i = 0; i < spec.num_trajectories; ++i) {
    corpus.trajectories.push_back(sample_trajectory());
  }

  // Subtask-level demos are separately sampled solved tasks; every API gets
  // one API-level usage demo.
  for (int i = 0; i < spec.num_subtask_demos; ++i) {
    const GoldTrajectory traj = sample_trajectory();
    DemoRecord demo;
    demo.id = "task_demo_" + std::to_string(i);
    demo.level = DemoLevel::kSubtask;
    demo.text = "Task: " + traj.instruction + "\nSolution:";
    for (const auto& c : traj.calls) {
      demo.text += "\n" + Json{{"action", c.api_id},
                               {"arguments", c.required_arguments}}
                              .dump();
      demo.related_api_ids.push_back(c.api_id);
    }
    corpus.demos.push_back(std::move(demo));
  }
  for (std::size_t a = 0; a < n; ++a) {
    auto utt = SampleInstruction(blueprints[a], params[a], rng);
    DemoRecord demo;
    demo.id = "api_demo_" + blueprints[a].id;
    demo.level = DemoLevel::kApi;
    demo.related_api_ids = {blueprints[a].id};
    demo.text = "Example for " + blueprints[a].id + ": " + utt.text + "\n" +
                Json{{"action", blueprints[a].id}, {"arguments", utt.arguments}}
                    .dump();
    corpus.demos.push_back(std::move(demo));
  }
  return corpus;
}

}  // namespace toolpilot
