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

#include "toolpilot/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <unordered_set>

#include "toolpilot/errors.hpp"
#include "toolpilot/file_util.hpp"
#include "toolpilot/rng.hpp"
#include "toolpilot/tokenizer.hpp"

namespace toolpilot {
namespace {

// Field access with line-numbered schema errors.
class Fields {
 public:
  Fields(const Json& doc, std::size_t line, std::string_view prefix = "")
      : doc_(doc), line_(line), prefix_(prefix) {
    if (!doc.is_object()) throw SchemaError(line, std::string(prefix), "expected object");
  }

  void AllowOnly(std::initializer_list<std::string_view> keys) const {
    for (const auto& [key, value] : doc_.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw SchemaError(line_, Name(key), "unknown field");
      }
    }
  }

  const Json& Required(std::string_view key) const {
    const auto it = doc_.find(key);
    if (it == doc_.end()) throw SchemaError(line_, Name(key), "missing");
    return *it;
  }

  std::string String(std::string_view key, bool nonempty = true) const {
    const Json& v = Required(key);
    if (!v.is_string()) throw SchemaError(line_, Name(key), "expected string");
    auto s = v.get<std::string>();
    if (nonempty && s.empty()) throw SchemaError(line_, Name(key), "empty");
    return s;
  }

  std::optional<std::string> OptionalString(std::string_view key) const {
    const auto it = doc_.find(key);
    if (it == doc_.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw SchemaError(line_, Name(key), "expected string");
    return it->get<std::string>();
  }

  bool Bool(std::string_view key) const {
    const Json& v = Required(key);
    if (!v.is_boolean()) throw SchemaError(line_, Name(key), "expected bool");
    return v.get<bool>();
  }

  std::vector<std::string> Strings(std::string_view key) const {
    const Json& v = Required(key);
    if (!v.is_array()) throw SchemaError(line_, Name(key), "expected array");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string() || e.get_ref<const std::string&>().empty()) {
        throw SchemaError(line_, Name(key), "expected nonempty strings");
      }
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  const Json& Array(std::string_view key) const {
    const Json& v = Required(key);
    if (!v.is_array()) throw SchemaError(line_, Name(key), "expected array");
    return v;
  }

  const Json& Object(std::string_view key) const {
    const Json& v = Required(key);
    if (!v.is_object()) throw SchemaError(line_, Name(key), "expected object");
    return v;
  }

  std::string Name(std::string_view key) const {
    return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key);
  }
  std::size_t line() const { return line_; }

 private:
  const Json& doc_;
  std::size_t line_;
  std::string prefix_;
};

Json ToJson(const ApiRecord& api) {
  Json params = Json::array();
  for (const auto& p : api.parameters) {
    params.push_back({{"name", p.name},
                      {"type", ParamTypeName(p.type)},
                      {"required", p.required},
                      {"description", p.description}});
  }
  Json doc{{"id", api.id},
           {"name", api.name},
           {"description", api.description},
           {"parameters", std::move(params)}};
  if (api.category) doc["category"] = *api.category;
  return doc;
}

ApiRecord ApiFromJson(const Json& doc, std::size_t line) {
  Fields f(doc, line);
  f.AllowOnly({"id", "name", "description", "parameters", "category"});
  ApiRecord api;
  api.id = f.String("id");
  api.name = f.String("name");
  api.description = f.String("description");
  api.category = f.OptionalString("category");
  std::set<std::string> names;
  for (const auto& p : f.Array("parameters")) {
    Fields pf(p, line, "parameters");
    pf.AllowOnly({"name", "type", "required", "description"});
    ParamSpec spec;
    spec.name = pf.String("name");
    try {
      spec.type = ParseParamType(pf.String("type"));
    } catch (const FormatError& e) {
      throw SchemaError(line, "parameters.type", e.what());
    }
    spec.required = pf.Bool("required");
    spec.description = pf.String("description", false);
    if (!names.insert(spec.name).second) {
      throw SchemaError(line, "parameters.name",
                        "duplicate parameter '" + spec.name + "'");
    }
    api.parameters.push_back(std::move(spec));
  }
  return api;
}

Json ToJson(const DemoRecord& demo) {
  return Json{{"id", demo.id},
              {"text", demo.text},
              {"level", demo.level == DemoLevel::kSubtask ? "subtask" : "api"},
              {"related_api_ids", demo.related_api_ids}};
}

DemoRecord DemoFromJson(const Json& doc, std::size_t line) {
  Fields f(doc, line);
  f.AllowOnly({"id", "text", "level", "related_api_ids"});
  DemoRecord demo;
  demo.id = f.String("id");
  demo.text = f.String("text");
  const auto level = f.String("level");
  if (level == "subtask") {
    demo.level = DemoLevel::kSubtask;
  } else if (level == "api") {
    demo.level = DemoLevel::kApi;
  } else {
    throw SchemaError(line, "level", "expected 'subtask' or 'api'");
  }
  demo.related_api_ids = f.Strings("related_api_ids");
  if (demo.level == DemoLevel::kApi && demo.related_api_ids.empty()) {
    throw SchemaError(line, "related_api_ids",
                      "api-level demos need at least one api id");
  }
  return demo;
}

Json ToJson(const TrainingPair& pair) {
  return Json{{"instruction", pair.instruction},
              {"api_id", pair.positive_api_id}};
}

TrainingPair PairFromJson(const Json& doc, std::size_t line) {
  Fields f(doc, line);
  f.AllowOnly({"instruction", "api_id"});
  TrainingPair pair{f.String("instruction"), f.String("api_id")};
  if (Tokenize(pair.instruction).empty()) {
    throw SchemaError(line, "instruction", "no tokens");
  }
  return pair;
}

Json ToJson(const GoldTrajectory& traj) {
  Json calls = Json::array();
  for (const auto& c : traj.calls) {
    calls.push_back(
        {{"api_id", c.api_id}, {"required_arguments", c.required_arguments}});
  }
  Json doc{{"instruction", traj.instruction}, {"calls", std::move(calls)}};
  if (traj.reference_answer) doc["reference_answer"] = *traj.reference_answer;
  return doc;
}

GoldTrajectory TrajectoryFromJson(const Json& doc, std::size_t line,
                                  std::string_view prefix = "") {
  Fields f(doc, line, prefix);
  f.AllowOnly({"instruction", "calls", "reference_answer"});
  GoldTrajectory traj;
  traj.instruction = f.String("instruction");
  traj.reference_answer = f.OptionalString("reference_answer");
  const std::string calls_name = f.Name("calls");
  for (const auto& c : f.Array("calls")) {
    Fields cf(c, line, calls_name);
    cf.AllowOnly({"api_id", "required_arguments"});
    traj.calls.push_back({cf.String("api_id"), cf.Object("required_arguments")});
  }
  if (traj.calls.empty()) throw SchemaError(line, calls_name, "empty trajectory");
  return traj;
}

Json ToJson(const PromptSample& sample) {
  return Json{{"instruction", sample.instruction},
              {"api_ids_in_prompt", sample.api_ids_in_prompt},
              {"gold", ToJson(sample.gold)}};
}

PromptSample PromptSampleFromJson(const Json& doc, std::size_t line) {
  Fields f(doc, line);
  f.AllowOnly({"instruction", "api_ids_in_prompt", "gold"});
  PromptSample sample;
  sample.instruction = f.String("instruction");
  sample.api_ids_in_prompt = f.Strings("api_ids_in_prompt");
  sample.gold = TrajectoryFromJson(f.Object("gold"), line, "gold");
  if (!sample.GoldCovered()) {
    throw SchemaError(line, "api_ids_in_prompt", "does not cover gold calls");
  }
  return sample;
}

template <typename T, typename Decode>
std::vector<T> ParseJsonLines(std::string_view text, std::string_view kind,
                              Decode decode) {
  std::vector<T> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    Json doc = Json::parse(line, nullptr, false);
    if (doc.is_discarded()) throw ParseError(line_no, "invalid JSON");
    if (first) {
      first = false;
      if (doc.is_object() && doc.contains("schema")) {
        if (doc["schema"] != kind) {
          throw SchemaError(line_no, "schema",
                            "expected '" + std::string(kind) + "'");
        }
        if (doc.value("version", 0) != kCorpusSchemaVersion) {
          throw SchemaError(line_no, "version", "unsupported version");
        }
        continue;
      }
    }
    out.push_back(decode(doc, line_no));
  }
  return out;
}

template <typename T>
std::string FormatJsonLines(std::span<const T> records, std::string_view kind) {
  std::string out =
      Json{{"schema", kind}, {"version", kCorpusSchemaVersion}}.dump() + "\n";
  for (const auto& r : records) out += ToJson(r).dump() + "\n";
  return out;
}

bool IsAsciiPunct(char c) {
  return c != '\0' && std::strchr("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~", c);
}

bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

}  // namespace

std::vector<ApiRecord> ParseApis(std::string_view text) {
  auto apis = ParseJsonLines<ApiRecord>(text, "api", ApiFromJson);
  std::unordered_set<std::string_view> seen;
  for (const auto& a : apis) {
    if (!seen.insert(a.id).second) throw DuplicateApiId(a.id);
  }
  return apis;
}

std::vector<DemoRecord> ParseDemos(std::string_view text) {
  return ParseJsonLines<DemoRecord>(text, "demo", DemoFromJson);
}

std::vector<TrainingPair> ParsePairs(std::string_view text) {
  return ParseJsonLines<TrainingPair>(text, "pair", PairFromJson);
}

std::vector<GoldTrajectory> ParseTrajectories(std::string_view text) {
  return ParseJsonLines<GoldTrajectory>(
      text, "trajectory",
      [](const Json& doc, std::size_t line) { return TrajectoryFromJson(doc, line); });
}

std::vector<PromptSample> ParsePromptSamples(std::string_view text) {
  return ParseJsonLines<PromptSample>(text, "prompt_sample",
                                      PromptSampleFromJson);
}

std::string FormatApis(std::span<const ApiRecord> r) {
  return FormatJsonLines(r, "api");
}
std::string FormatDemos(std::span<const DemoRecord> r) {
  return FormatJsonLines(r, "demo");
}
std::string FormatPairs(std::span<const TrainingPair> r) {
  return FormatJsonLines(r, "pair");
}
std::string FormatTrajectories(std::span<const GoldTrajectory> r) {
  return FormatJsonLines(r, "trajectory");
}
std::string FormatPromptSamples(std::span<const PromptSample> r) {
  return FormatJsonLines(r, "prompt_sample");
}

std::vector<ApiRecord> LoadApis(const std::filesystem::path& p) {
  return ParseApis(ReadFileBytes(p));
}
std::vector<DemoRecord> LoadDemos(const std::filesystem::path& p) {
  return ParseDemos(ReadFileBytes(p));
}
std::vector<TrainingPair> LoadPairs(const std::filesystem::path& p) {
  return ParsePairs(ReadFileBytes(p));
}
std::vector<GoldTrajectory> LoadTrajectories(const std::filesystem::path& p) {
  return ParseTrajectories(ReadFileBytes(p));
}
std::vector<PromptSample> LoadPromptSamples(const std::filesystem::path& p) {
  return ParsePromptSamples(ReadFileBytes(p));
}

void SaveApis(std::span<const ApiRecord> r, const std::filesystem::path& p) {
  WriteFileBytes(p, FormatApis(r));
}
void SaveDemos(std::span<const DemoRecord> r, const std::filesystem::path& p) {
  WriteFileBytes(p, FormatDemos(r));
}
void SavePairs(std::span<const TrainingPair> r,
               const std::filesystem::path& p) {
  WriteFileBytes(p, FormatPairs(r));
}
void SaveTrajectories(std::span<const GoldTrajectory> r,
                      const std::filesystem::path& p) {
  WriteFileBytes(p, FormatTrajectories(r));
}
void SavePromptSamples(std::span<const PromptSample> r,
                       const std::filesystem::path& p) {
  WriteFileBytes(p, FormatPromptSamples(r));
}

std::string SniffSchema(std::string_view text) {
  const std::size_t eol = text.find('\n');
  const Json doc = Json::parse(text.substr(0, eol), nullptr, false);
  if (doc.is_object() && doc.contains("schema") && doc["schema"].is_string()) {
    return doc["schema"].get<std::string>();
  }
  return {};
}

void CheckTrajectories(std::span<const GoldTrajectory> trajectories,
                       std::span<const ApiRecord> apis) {
  std::unordered_set<std::string_view> ids;
  for (const auto& a : apis) ids.insert(a.id);
  for (const auto& t : trajectories) {
    for (const auto& c : t.calls) {
      if (!ids.contains(c.api_id)) throw DanglingApiId(c.api_id);
    }
  }
}

PromptSample AugmentShuffleApis(const PromptSample& sample,
                                std::uint64_t seed) {
  PromptSample out = sample;
  Rng rng(seed);
  FisherYatesShuffle(std::span<std::string>(out.api_ids_in_prompt), rng);
  return out;
}

PromptSample AugmentInjectIrrelevant(const PromptSample& sample,
                                     std::span<const ApiRecord> pool,
                                     std::size_t m, std::uint64_t seed) {
  const auto gold = sample.gold.ApiIds();
  const std::unordered_set<std::string_view> gold_ids(gold.begin(), gold.end());
  const std::unordered_set<std::string_view> in_prompt(
      sample.api_ids_in_prompt.begin(), sample.api_ids_in_prompt.end());
  std::vector<std::string> candidates;
  for (const auto& api : pool) {
    if (gold_ids.contains(api.id)) throw PoolOverlapsGold(api.id);
    if (!in_prompt.contains(api.id)) candidates.push_back(api.id);
  }
  if (m > candidates.size()) {
    throw PoolTooSmall("need " + std::to_string(m) + " irrelevant apis, have " +
                       std::to_string(candidates.size()));
  }
  PromptSample out = sample;
  if (m == 0) return out;
  Rng rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.Below(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }
  auto& ids = out.api_ids_in_prompt;
  for (std::size_t i = 0; i < m; ++i) {
    const auto at = static_cast<std::size_t>(rng.Below(ids.size() + 1));
    ids.insert(ids.begin() + static_cast<long>(at), candidates[i]);
  }
  return out;
}

std::string SynonymSubstitute(std::string_view instruction,
                              const Lexicon& lexicon, std::uint64_t seed,
                              double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw ConfigError("substitution rate must lie in [0, 1]");
  }
  for (const auto& [word, replacements] : lexicon) {
    for (const auto& r : replacements) {
      if (Tokenize(r).size() != 1 ||
          std::any_of(r.begin(), r.end(), IsAsciiSpace)) {
        throw ConfigError("replacement '" + r + "' for '" + word +
                          "' is not a single token");
      }
    }
  }
  Rng rng(seed);
  std::string out;
  out.reserve(instruction.size());
  std::size_t pos = 0;
  while (pos < instruction.size()) {
    if (IsAsciiSpace(instruction[pos])) {
      out += instruction[pos++];
      continue;
    }
    std::size_t end = pos;
    while (end < instruction.size() && !IsAsciiSpace(instruction[end])) ++end;
    const std::string_view word = instruction.substr(pos, end - pos);
    pos = end;

    std::size_t core_begin = 0;
    std::size_t core_end = word.size();
    while (core_begin < core_end && IsAsciiPunct(word[core_begin])) ++core_begin;
    while (core_end > core_begin && IsAsciiPunct(word[core_end - 1])) --core_end;
    std::string key(word.substr(core_begin, core_end - core_begin));
    for (char& c : key) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    const auto it = key.empty() ? lexicon.end() : lexicon.find(key);
    if (it == lexicon.end() || it->second.empty()) {
      out += word;
      continue;
    }
    if (rng.Unit() < rate) {
      const auto& choice = it->second[rng.Below(it->second.size())];
      out += word.substr(0, core_begin);
      out += choice;
      out += word.substr(core_end);
    } else {
      out += word;
    }
  }
  return out;
}

PromptSample AugmentSynonyms(const PromptSample& sample, const Lexicon& lexicon,
                             std::uint64_t seed, double rate) {
  PromptSample out = sample;
  out.instruction = SynonymSubstitute(sample.instruction, lexicon, seed, rate);
  return out;
}

Lexicon ParseLexicon(std::string_view json_text) {
  const Json doc = Json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw FormatError("lexicon must be a JSON object");
  }
  Lexicon lexicon;
  for (const auto& [word, reps] : doc.items()) {
    if (!reps.is_array()) throw FormatError("lexicon entry '" + word + "' is not a list");
    auto& out = lexicon[word];
    for (const auto& r : reps) {
      if (!r.is_string()) throw FormatError("lexicon entry '" + word + "' has non-string");
      out.push_back(r.get<std::string>());
    }
  }
  return lexicon;
}

}  // namespace toolpilot
