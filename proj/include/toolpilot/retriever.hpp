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

#ifndef TOOLPILOT_RETRIEVER_HPP_
#define TOOLPILOT_RETRIEVER_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toolpilot/encoder.hpp"
#include "toolpilot/records.hpp"

namespace toolpilot {

// Embedded API collection. Immutable once built.
struct ApiIndex {
  std::vector<std::string> ids;
  RowMatrix<double> embeddings;  // one unit-norm row per id
  std::uint64_t params_fingerprint = 0;
  bool include_parameters = false;

  std::size_t size() const { return ids.size(); }
  friend bool operator==(const ApiIndex&, const ApiIndex&) = default;
};

struct ScoredId {
  std::string id;
  double score = 0.0;
  friend bool operator==(const ScoredId&, const ScoredId&) = default;
};

// Descending score, ties by ascending id.
struct RetrievalResult {
  std::vector<ScoredId> ranked;
  std::vector<std::string> Ids() const;
};

// Orders (score, id) pairs: higher score first, then smaller id.
inline bool RanksBefore(double score_a, std::string_view id_a, double score_b,
                        std::string_view id_b) {
  if (score_a != score_b) return score_a > score_b;
  return id_a < id_b;
}

// Embeds "name: description" for every record. Throws DuplicateApiId, or
// EmptyText naming the offending api id.
ApiIndex BuildIndex(std::span<const ApiRecord> apis, const EncoderParams& params,
                    bool include_parameters = false);

// Exact top-k over every index entry for an already-embedded query.
RetrievalResult RankByEmbedding(const ApiIndex& index,
                                const EmbeddingVector& query, std::size_t k);

// Throws StaleIndex when `params` is not the encoder the index was built
// with, ConfigError for k < 1, EmptyText for an untokenizable instruction.
RetrievalResult Retrieve(const ApiIndex& index, std::string_view instruction,
                         int k, const EncoderParams& params);

// Binds an index to its encoder after a single fingerprint check.
class Retriever {
 public:
  Retriever(const ApiIndex& index, const EncoderParams& params);

  RetrievalResult operator()(std::string_view instruction, int k) const;
  const ApiIndex& index() const { return *index_; }
  const EncoderParams& params() const { return *params_; }

 private:
  const ApiIndex* index_;
  const EncoderParams* params_;
};

struct EvalQuery {
  std::string instruction;
  std::vector<std::string> gold_api_ids;
};

// Fraction of distinct gold ids found in the top-k, per query.
std::vector<double> PerQueryRecall(const Retriever& retriever,
                                   std::span<const EvalQuery> eval_set, int k);

// Macro average of PerQueryRecall. Throws UnknownGoldId, ConfigError on an
// empty eval set.
double RecallAtK(const ApiIndex& index, const EncoderParams& params,
                 std::span<const EvalQuery> eval_set, int k);

// Binary index file tagged with the encoder fingerprint.
void SaveIndex(const ApiIndex& index, const std::filesystem::path& path);
// Throws StaleIndex if `params` does not match the stored fingerprint.
ApiIndex LoadIndex(const std::filesystem::path& path,
                   const EncoderParams& params);
std::string SerializeIndex(const ApiIndex& index);
ApiIndex DeserializeIndex(std::string_view bytes);

}  // namespace toolpilot

#endif  // TOOLPILOT_RETRIEVER_HPP_
