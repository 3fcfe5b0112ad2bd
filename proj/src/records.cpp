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

#include "toolpilot/records.hpp"

#include <algorithm>

#include "toolpilot/errors.hpp"

namespace toolpilot {

std::string_view ParamTypeName(ParamType type) {
  switch (type) {
    case ParamType::kString:
      return "string";
    case ParamType::kInt:
      return "int";
    case ParamType::kFloat:
      return "float";
    case ParamType::kBool:
      return "bool";
  }
  return "string";
}

ParamType ParseParamType(std::string_view tag) {
  if (tag == "string") return ParamType::kString;
  if (tag == "int") return ParamType::kInt;
  if (tag == "float") return ParamType::kFloat;
  if (tag == "bool") return ParamType::kBool;
  throw FormatError("unknown parameter type '" + std::string(tag) + "'");
}

const ParamSpec* ApiRecord::FindParam(std::string_view param_name) const {
  for (const auto& p : parameters) {
    if (p.name == param_name) return &p;
  }
  return nullptr;
}

std::string ApiText(const ApiRecord& api, bool include_parameters) {
  std::string text = api.name + ": " + api.description;
  if (include_parameters) {
    for (const auto& p : api.parameters) {
      text += " " + p.name + " " + p.description;
    }
  }
  return text;
}

std::vector<std::string> GoldTrajectory::ApiIds() const {
  std::vector<std::string> ids;
  ids.reserve(calls.size());
  for (const auto& c : calls) ids.push_back(c.api_id);
  return ids;
}

bool PromptSample::GoldCovered() const {
  return std::all_of(gold.calls.begin(), gold.calls.end(),
                     [&](const GoldCall& c) {
                       return std::find(api_ids_in_prompt.begin(),
                                        api_ids_in_prompt.end(),
                                        c.api_id) != api_ids_in_prompt.end();
                     });
}

}  // namespace toolpilot
