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

#ifndef TOOLPILOT_RECORDS_HPP_
#define TOOLPILOT_RECORDS_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace toolpilot {

using Json = nlohmann::json;

enum class ParamType { kString, kInt, kFloat, kBool };

std::string_view ParamTypeName(ParamType type);
// Throws FormatError for unknown tags.
ParamType ParseParamType(std::string_view tag);

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::kString;
  bool required = false;
  std::string description;

  friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

// One callable tool.
struct ApiRecord {
  std::string id;
  std::string name;
  std::string description;
  std::vector<ParamSpec> parameters;
  std::optional<std::string> category;

  const ParamSpec* FindParam(std::string_view param_name) const;

  friend bool operator==(const ApiRecord&, const ApiRecord&) = default;
};

// Text embedded for an API: "name: description", optionally followed by
// the parameter names and their descriptions.
std::string ApiText(const ApiRecord& api, bool include_parameters = false);

struct TrainingPair {
  std::string instruction;
  std::string positive_api_id;

  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

enum class DemoLevel { kSubtask, kApi };

struct DemoRecord {
  std::string id;
  std::string text;
  DemoLevel level = DemoLevel::kSubtask;
  std::vector<std::string> related_api_ids;

  friend bool operator==(const DemoRecord&, const DemoRecord&) = default;
};

struct GoldCall {
  std::string api_id;
  Json required_arguments = Json::object();

  friend bool operator==(const GoldCall&, const GoldCall&) = default;
};

struct GoldTrajectory {
  std::string instruction;
  std::vector<GoldCall> calls;
  std::optional<std::string> reference_answer;

  std::vector<std::string> ApiIds() const;

  friend bool operator==(const GoldTrajectory&, const GoldTrajectory&) =
      default;
};

struct PromptSample {
  std::string instruction;
  std::vector<std::string> api_ids_in_prompt;
  GoldTrajectory gold;

  // Every gold call's api id appears in the prompt list.
  bool GoldCovered() const;

  friend bool operator==(const PromptSample&, const PromptSample&) = default;
};

}  // namespace toolpilot

#endif  // TOOLPILOT_RECORDS_HPP_
