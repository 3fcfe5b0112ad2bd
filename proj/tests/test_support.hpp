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

// Shared fixtures and reference oracles for the test binaries.

#ifndef TOOLPILOT_TESTS_TEST_SUPPORT_HPP_
#define TOOLPILOT_TESTS_TEST_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "toolpilot/contrastive.hpp"
#include "toolpilot/encoder.hpp"
#include "toolpilot/file_util.hpp"
#include "toolpilot/records.hpp"
#include "toolpilot/retriever.hpp"
#include "toolpilot/rng.hpp"

namespace toolpilot::testing {

inline const std::vector<std::string>& Vocabulary() {
  static const std::vector<std::string> words = {
      "camera", "door",   "sensor", "alarm",  "zone",   "light",  "report",
      "list",   "status", "create", "delete", "update", "fetch",  "record",
      "video",  "floor",  "gate",   "badge",  "user",   "event",  "signal",
      "motion", "audio",  "panel",  "relay",  "timer",  "backup", "export",
      "query",  "device"};
  return words;
}

inline std::string RandomText(Rng& rng, int min_words, int max_words) {
  const auto& vocab = Vocabulary();
  const int n = min_words + static_cast<int>(rng.Below(max_words - min_words + 1));
  std::string text;
  for (int i = 0; i < n; ++i) {
    if (i) text += ' ';
    text += vocab[rng.Below(vocab.size())];
  }
  return text;
}

inline ApiRecord MakeApi(std::string id, std::string description,
                         std::vector<ParamSpec> params = {}) {
  ApiRecord api;
  api.name = id;
  api.id = std::move(id);
  api.description = std::move(description);
  api.parameters = std::move(params);
  return api;
}

// n APIs with random descriptions. Some descriptions repeat on purpose
// so identical embeddings exercise the id tie-break.
inline std::vector<ApiRecord> RandomApis(Rng& rng, int n) {
  std::vector<ApiRecord> apis;
  std::vector<std::string> descriptions;
  for (int i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "api_%03d", static_cast<int>(rng.Below(1000)) * 1000 + i);
    std::string desc = (!descriptions.empty() && rng.Below(8) == 0)
                           ? descriptions[rng.Below(descriptions.size())]
                           : RandomText(rng, 2, 6);
    descriptions.push_back(desc);
    apis.push_back(MakeApi(id, desc));
  }
  // Identical name + description gives identical embeddings; give the
  // twins a shared name so their indexed text matches too.
  for (auto& api : apis) api.name = "tool";
  return apis;
}

inline EncoderParams SmallEncoder(std::uint64_t seed, int dim = 16,
                                  int buckets = 509) {
  EncoderConfig cfg;
  cfg.dim = dim;
  cfg.num_buckets = buckets;
  cfg.seed = seed;
  return InitEncoder<double>(cfg);
}

// Full similarity list, stable sort by descending score then ascending id.
inline std::vector<ScoredId> BruteForceRanking(const std::vector<ApiRecord>& apis,
                                               const EncoderParams& params,
                                               const std::string& query) {
  const auto q = Embed(query, params);
  std::vector<ScoredId> all;
  for (const auto& api : apis) {
    const auto e = Embed(ApiText(api), params);
    double dot = 0.0;
    for (Eigen::Index i = 0; i < q.size(); ++i) dot += q(i) * e(i);
    all.push_back({api.id, dot});
  }
  std::stable_sort(all.begin(), all.end(), [](const ScoredId& a, const ScoredId& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return all;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  int coordinates = 0;
};

template <typename To>
BasicEncoderParams<To> CastParams(const EncoderParams& p) {
  BasicEncoderParams<To> out;
  out.dim = p.dim;
  out.num_buckets = p.num_buckets;
  out.ngram_orders = p.ngram_orders;
  out.tensors.table = p.tensors.table.template cast<To>();
  out.tensors.projection = p.tensors.projection.template cast<To>();
  out.tensors.bias = p.tensors.bias.template cast<To>();
  return out;
}

// Central differences against the analytical MNR gradient on a random
// batch of k instruction/api text pairs. The difference quotient is
// evaluated in extended precision; the relative error has a 1e-8 floor.
inline GradCheckResult GradCheck(int k, std::uint64_t seed, int num_coords = 120,
                                 double eps = 1e-5, double scale = 20.0) {
  using Wide = long double;
  Rng rng(seed * 7919 + static_cast<std::uint64_t>(k));
  const EncoderParams params = SmallEncoder(seed);
  std::vector<std::string> instructions, api_texts;
  for (int i = 0; i < k; ++i) {
    instructions.push_back(RandomText(rng, 2, 6));
    api_texts.push_back(RandomText(rng, 2, 6));
  }
  const auto analytic = MnrLossGrad<double>(instructions, api_texts, params, scale);

  std::set<std::uint32_t> rows;
  for (const auto* texts : {&instructions, &api_texts}) {
    for (const auto& t : *texts) {
      for (auto b : Featurize(t, params).bucket_ids) rows.insert(b);
    }
  }
  std::vector<std::size_t> coords;
  const std::size_t table = params.tensors.table.size();
  for (auto r : rows) {
    for (int c = 0; c < params.dim; ++c) coords.push_back(r * params.dim + c);
  }
  for (std::size_t i = table; i < params.tensors.size(); ++i) coords.push_back(i);
  FisherYatesShuffle(std::span<std::size_t>(coords), rng);
  coords.resize(std::min<std::size_t>(coords.size(), num_coords));

  auto wide = CastParams<Wide>(params);
  GradCheckResult out;
  for (const std::size_t flat : coords) {
    const Wide orig = wide.tensors.at(flat);
    wide.tensors.at(flat) = orig + eps;
    const Wide up = MnrBatchLoss<Wide>(instructions, api_texts, wide, scale);
    wide.tensors.at(flat) = orig - eps;
    const Wide down = MnrBatchLoss<Wide>(instructions, api_texts, wide, scale);
    wide.tensors.at(flat) = orig;
    const double numeric = static_cast<double>((up - down) / (2 * Wide(eps)));
    const double a = analytic.grad.at(flat);
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(a - numeric) / denom);
    ++out.coordinates;
  }
  return out;
}

// Compares against tests/golden/<name>; TOOLPILOT_UPDATE_GOLDEN=1
// rewrites the file instead.
inline bool MatchesGolden(const std::string& name, const std::string& actual) {
  const std::filesystem::path path = std::filesystem::path(TOOLPILOT_GOLDEN_DIR) / name;
  if (const char* update = std::getenv("TOOLPILOT_UPDATE_GOLDEN"); update && *update == '1') {
    WriteFileBytes(path, actual);
    return true;
  }
  return ReadFileBytes(path) == actual;
}

inline std::filesystem::path TempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("toolpilot_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace toolpilot::testing

#endif  // TOOLPILOT_TESTS_TEST_SUPPORT_HPP_
