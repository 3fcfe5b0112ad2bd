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

#ifndef TOOLPILOT_DEMO_SELECTOR_HPP_
#define TOOLPILOT_DEMO_SELECTOR_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toolpilot/encoder.hpp"
#include "toolpilot/records.hpp"
#include "toolpilot/retriever.hpp"

namespace toolpilot {

struct DemoSelectorConfig {
  double threshold = 0.7;  // strict: a demo qualifies when sim > threshold
  int top_k = 3;

  void Validate() const;
};

enum class DemoSource { kSubtaskLevel, kApiLevelFallback };

std::string_view DemoSourceName(DemoSource source);

struct DemoSelection {
  std::vector<ScoredId> demos;  // descending score, ties by ascending id
  DemoSource source = DemoSource::kApiLevelFallback;
};

// Demo records of a single level with their embeddings computed up front.
class DemoPool {
 public:
  DemoPool() = default;
  // Throws FormatError if a record's level differs from `level`,
  // EmptyText naming the demo id for untokenizable text.
  DemoPool(std::span<const DemoRecord> demos, DemoLevel level,
           const EncoderParams& params);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const RowMatrix<double>& embeddings() const { return embeddings_; }

 private:
  std::vector<std::string> ids_;
  RowMatrix<double> embeddings_;
};

// Embeds the query, keeps subtask-level demos scoring strictly above the
// threshold and returns the best top_k of them. When none qualifies, the
// API-level pool is ranked by the same score without a threshold.
// Throws EmptyDemoPools when both pools are empty.
DemoSelection SelectDemos(const EmbeddingVector& query,
                          const DemoPool& knowledge_db,
                          const DemoPool& api_demos,
                          const DemoSelectorConfig& config);

DemoSelection SelectDemos(std::string_view query,
                          std::span<const DemoRecord> knowledge_db,
                          std::span<const DemoRecord> api_demos,
                          const DemoSelectorConfig& config,
                          const EncoderParams& params);

// Header line followed by "Demo <n>:\n<text>\n" blocks separated by blank
// lines. Empty selection renders as "". Throws UnknownDemoId.
std::string RenderDemos(const DemoSelection& selection,
                        std::span<const DemoRecord> demos);

}  // namespace toolpilot

#endif  // TOOLPILOT_DEMO_SELECTOR_HPP_
