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

#include "toolpilot/retriever.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <unordered_set>

#include "toolpilot/errors.hpp"
#include "toolpilot/file_util.hpp"
#include "toolpilot/hashing.hpp"

namespace toolpilot {

std::vector<std::string> RetrievalResult::Ids() const {
  std::vector<std::string> ids;
  ids.reserve(ranked.size());
  for (const auto& r : ranked) ids.push_back(r.id);
  return ids;
}

ApiIndex BuildIndex(std::span<const ApiRecord> apis, const EncoderParams& params,
                    bool include_parameters) {
  ApiIndex index;
  index.params_fingerprint = EncoderFingerprint(params);
  index.include_parameters = include_parameters;
  index.embeddings.resize(static_cast<Eigen::Index>(apis.size()), params.dim);
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < apis.size(); ++i) {
    const auto& api = apis[i];
    if (!seen.insert(api.id).second) throw DuplicateApiId(api.id);
    try {
      index.embeddings.row(static_cast<Eigen::Index>(i)) =
          Embed(ApiText(api, include_parameters), params).transpose();
    } catch (const EmptyText&) {
      throw EmptyText("api '" + api.id + "' has no indexable text");
    }
    index.ids.push_back(api.id);
  }
  return index;
}

RetrievalResult RankByEmbedding(const ApiIndex& index,
                                const EmbeddingVector& query, std::size_t k) {
  const Vector<double> scores = index.embeddings * query;
  std::vector<std::size_t> order(index.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto before = [&](std::size_t a, std::size_t b) {
    return RanksBefore(scores(static_cast<Eigen::Index>(a)), index.ids[a],
                       scores(static_cast<Eigen::Index>(b)), index.ids[b]);
  };
  const std::size_t n = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(n),
                    order.end(), before);
  RetrievalResult result;
  result.ranked.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.ranked.push_back(
        {index.ids[order[i]], scores(static_cast<Eigen::Index>(order[i]))});
  }
  return result;
}

Retriever::Retriever(const ApiIndex& index, const EncoderParams& params)
    : index_(&index), params_(&params) {
  if (EncoderFingerprint(params) != index.params_fingerprint) {
    throw StaleIndex("index was built with encoder " +
                     HexDigest(index.params_fingerprint) +
                     ", query encoder is " +
                     HexDigest(EncoderFingerprint(params)));
  }
}

RetrievalResult Retriever::operator()(std::string_view instruction,
                                      int k) const {
  if (k < 1) throw ConfigError("k must be at least 1");
  return RankByEmbedding(*index_, Embed(instruction, *params_),
                         static_cast<std::size_t>(k));
}

RetrievalResult Retrieve(const ApiIndex& index, std::string_view instruction,
                         int k, const EncoderParams& params) {
  return Retriever(index, params)(instruction, k);
}

std::vector<double> PerQueryRecall(const Retriever& retriever,
                                   std::span<const EvalQuery> eval_set,
                                   int k) {
  const auto& ids = retriever.index().ids;
  std::unordered_set<std::string_view> known(ids.begin(), ids.end());
  std::vector<double> recalls;
  recalls.reserve(eval_set.size());
  for (const auto& query : eval_set) {
    std::unordered_set<std::string_view> gold;
    for (const auto& g : query.gold_api_ids) {
      if (!known.contains(g)) throw UnknownGoldId(g);
      gold.insert(g);
    }
    if (gold.empty()) {
      throw UnknownGoldId("query has no gold ids: " + query.instruction);
    }
    const auto result = retriever(query.instruction, k);
    std::size_t hits = 0;
    for (const auto& r : result.ranked) hits += gold.contains(r.id) ? 1 : 0;
    recalls.push_back(static_cast<double>(hits) /
                      static_cast<double>(gold.size()));
  }
  return recalls;
}

double RecallAtK(const ApiIndex& index, const EncoderParams& params,
                 std::span<const EvalQuery> eval_set, int k) {
  if (eval_set.empty()) throw ConfigError("recall needs a nonempty eval set");
  const Retriever retriever(index, params);
  const auto recalls = PerQueryRecall(retriever, eval_set, k);
  return std::accumulate(recalls.begin(), recalls.end(), 0.0) /
         static_cast<double>(recalls.size());
}

namespace {

constexpr std::string_view kIndexMagic = "TPINDEX1";

template <typename T>
void Put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T Get(std::string_view bytes, std::size_t& pos) {
  if (sizeof(T) > bytes.size() - pos) throw FormatError("index file truncated");
  T value;
  std::memcpy(&value, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

std::string SerializeIndex(const ApiIndex& index) {
  std::string out(kIndexMagic);
  Put<std::uint64_t>(out, index.params_fingerprint);
  Put<std::uint32_t>(out, index.include_parameters ? 1 : 0);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(index.embeddings.cols()));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(index.size()));
  for (std::size_t i = 0; i < index.size(); ++i) {
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(index.ids[i].size()));
    out += index.ids[i];
    const auto row = index.embeddings.row(static_cast<Eigen::Index>(i));
    for (Eigen::Index j = 0; j < row.size(); ++j) Put<double>(out, row(j));
  }
  return out;
}

ApiIndex DeserializeIndex(std::string_view bytes) {
  if (bytes.substr(0, kIndexMagic.size()) != kIndexMagic) {
    throw FormatError("not an index file");
  }
  std::size_t pos = kIndexMagic.size();
  ApiIndex index;
  index.params_fingerprint = Get<std::uint64_t>(bytes, pos);
  index.include_parameters = Get<std::uint32_t>(bytes, pos) != 0;
  const auto dim = Get<std::uint32_t>(bytes, pos);
  const auto count = Get<std::uint32_t>(bytes, pos);
  if (static_cast<std::uint64_t>(count) * dim * sizeof(double) > bytes.size()) {
    throw FormatError("index header inconsistent with file size");
  }
  index.embeddings.resize(count, dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = Get<std::uint32_t>(bytes, pos);
    if (len > bytes.size() - pos) throw FormatError("index file truncated");
    index.ids.emplace_back(bytes.substr(pos, len));
    pos += len;
    for (std::uint32_t j = 0; j < dim; ++j) {
      index.embeddings(i, j) = Get<double>(bytes, pos);
    }
  }
  if (pos != bytes.size()) throw FormatError("trailing bytes in index file");
  return index;
}

void SaveIndex(const ApiIndex& index, const std::filesystem::path& path) {
  WriteFileBytes(path, SerializeIndex(index));
}

ApiIndex LoadIndex(const std::filesystem::path& path,
                   const EncoderParams& params) {
  auto index = DeserializeIndex(ReadFileBytes(path));
  if (index.params_fingerprint != EncoderFingerprint(params)) {
    throw StaleIndex("index '" + path.string() +
                     "' does not match the supplied encoder");
  }
  return index;
}

}  // namespace toolpilot
