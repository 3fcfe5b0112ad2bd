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

#include "toolpilot/demo_selector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "toolpilot/errors.hpp"

namespace toolpilot {
namespace {

constexpr std::string_view kDemoHeader =
    "The following demonstrations show how similar tasks were solved.\n";

std::vector<ScoredId> TopK(const DemoPool& pool, const EmbeddingVector& query,
                           std::size_t k, bool thresholded, double threshold) {
  std::vector<ScoredId> scored;
  if (pool.empty()) return scored;
  const Vector<double> sims = pool.embeddings() * query;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double s = sims(static_cast<Eigen::Index>(i));
    if (!thresholded || s > threshold) scored.push_back({pool.ids()[i], s});
  }
  const auto before = [](const ScoredId& a, const ScoredId& b) {
    return RanksBefore(a.score, a.id, b.score, b.id);
  };
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(n),
                    scored.end(), before);
  scored.resize(n);
  return scored;
}

}  // namespace

void DemoSelectorConfig::Validate() const {
  if (!std::isfinite(threshold)) throw ConfigError("threshold must be finite");
  if (top_k < 1) throw ConfigError("demo top_k must be at least 1");
}

std::string_view DemoSourceName(DemoSource source) {
  return source == DemoSource::kSubtaskLevel ? "subtask_level"
                                             : "api_level_fallback";
}

DemoPool::DemoPool(std::span<const DemoRecord> demos, DemoLevel level,
                   const EncoderParams& params) {
  embeddings_.resize(static_cast<Eigen::Index>(demos.size()), params.dim);
  for (std::size_t i = 0; i < demos.size(); ++i) {
    const auto& demo = demos[i];
    if (demo.level != level) {
      throw FormatError("demo '" + demo.id + "' is in the wrong pool");
    }
    try {
      embeddings_.row(static_cast<Eigen::Index>(i)) =
          Embed(demo.text, params).transpose();
    } catch (const EmptyText&) {
      throw EmptyText("demo '" + demo.id + "' has no tokens");
    }
    ids_.push_back(demo.id);
  }
}

DemoSelection SelectDemos(const EmbeddingVector& query,
                          const DemoPool& knowledge_db,
                          const DemoPool& api_demos,
                          const DemoSelectorConfig& config) {
  config.Validate();
  if (knowledge_db.empty() && api_demos.empty()) {
    throw EmptyDemoPools("no subtask-level or API-level demos available");
  }
  const auto k = static_cast<std::size_t>(config.top_k);
  DemoSelection selection;
  selection.demos = TopK(knowledge_db, query, k, true, config.threshold);
  if (!selection.demos.empty()) {
    selection.source = DemoSource::kSubtaskLevel;
    return selection;
  }
  selection.source = DemoSource::kApiLevelFallback;
  selection.demos = TopK(api_demos, query, k, false, 0.0);
  return selection;
}

DemoSelection SelectDemos(std::string_view query,
                          std::span<const DemoRecord> knowledge_db,
                          std::span<const DemoRecord> api_demos,
                          const DemoSelectorConfig& config,
                          const EncoderParams& params) {
  if (knowledge_db.empty() && api_demos.empty()) {
    throw EmptyDemoPools("no subtask-level or API-level demos available");
  }
  const DemoPool kb(knowledge_db, DemoLevel::kSubtask, params);
  const DemoPool api(api_demos, DemoLevel::kApi, params);
  return SelectDemos(Embed(query, params), kb, api, config);
}

std::string RenderDemos(const DemoSelection& selection,
                        std::span<const DemoRecord> demos) {
  if (selection.demos.empty()) return {};
  std::unordered_map<std::string_view, const DemoRecord*> by_id;
  for (const auto& d : demos) by_id.emplace(d.id, &d);
  std::string out(kDemoHeader);
  int n = 0;
  for (const auto& scored : selection.demos) {
    const auto it = by_id.find(scored.id);
    if (it == by_id.end()) throw UnknownDemoId(scored.id);
    out += "\nDemo " + std::to_string(++n) + ":\n" + it->second->text + "\n";
  }
  return out;
}

}  // namespace toolpilot
