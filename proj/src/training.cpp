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

#include "toolpilot/training.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_set>

#include "toolpilot/errors.hpp"
#include "toolpilot/rng.hpp"

namespace toolpilot {

void TrainConfig::Validate() const {
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
  if (!(similarity_scale > 0.0) || !std::isfinite(similarity_scale)) {
    throw ConfigError("similarity_scale must be positive");
  }
}

ApiLookup IndexApis(std::span<const ApiRecord> apis) {
  ApiLookup lookup;
  lookup.reserve(apis.size());
  for (const auto& api : apis) {
    if (!lookup.emplace(api.id, &api).second) {
      throw DuplicateApiId(api.id);
    }
  }
  return lookup;
}

std::vector<std::vector<std::size_t>> AssembleBatches(
    std::span<const TrainingPair> pairs, std::span<const std::size_t> order,
    int batch_size) {
  std::vector<std::vector<std::size_t>> batches;
  std::vector<std::size_t> pending(order.begin(), order.end());
  const auto cap = static_cast<std::size_t>(batch_size);
  while (!pending.empty()) {
    std::vector<std::size_t> batch;
    std::vector<std::size_t> rest;
    std::unordered_set<std::string_view> used;
    for (std::size_t idx : pending) {
      const auto& api = pairs[idx].positive_api_id;
      if (batch.size() < cap && !used.contains(api)) {
        used.insert(api);
        batch.push_back(idx);
      } else {
        rest.push_back(idx);
      }
    }
    batches.push_back(std::move(batch));
    pending = std::move(rest);
  }
  return batches;
}

LossAndGradient<double> BatchLossGrad(std::span<const TrainingPair> batch,
                                      const ApiLookup& apis,
                                      const EncoderParams& params,
                                      double scale) {
  std::vector<std::string> instructions;
  std::vector<std::string> api_texts;
  instructions.reserve(batch.size());
  api_texts.reserve(batch.size());
  for (const auto& pair : batch) {
    const auto it = apis.find(pair.positive_api_id);
    if (it == apis.end()) throw DanglingApiId(pair.positive_api_id);
    instructions.push_back(pair.instruction);
    api_texts.push_back(ApiText(*it->second));
  }
  return MnrLossGrad<double>(instructions, api_texts, params, scale);
}

TrainResult Train(std::span<const TrainingPair> pairs,
                  std::span<const ApiRecord> apis, const TrainConfig& config,
                  EncoderParams initial) {
  config.Validate();
  if (pairs.empty()) throw ConfigError("no training pairs");
  const ApiLookup lookup = IndexApis(apis);
  for (const auto& pair : pairs) {
    if (!lookup.contains(pair.positive_api_id)) {
      throw DanglingApiId(pair.positive_api_id);
    }
  }

  TrainResult result{std::move(initial), {}};
  EncoderParams& params = result.params;
  auto velocity =
      EncoderTensors<double>::Zero(params.num_buckets, params.dim);

  Rng rng(config.seed);
  std::vector<std::size_t> order(pairs.size());
  std::vector<TrainingPair> batch_pairs;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    FisherYatesShuffle(std::span<std::size_t>(order), rng);

    double weighted_loss = 0.0;
    std::size_t seen = 0;
    for (const auto& batch : AssembleBatches(pairs, order, config.batch_size)) {
      batch_pairs.clear();
      for (std::size_t idx : batch) batch_pairs.push_back(pairs[idx]);
      auto step = BatchLossGrad(batch_pairs, lookup, params,
                                config.similarity_scale);
      weighted_loss += step.loss * static_cast<double>(batch.size());
      seen += batch.size();

      velocity.table = config.momentum * velocity.table + step.grad.table;
      velocity.projection =
          config.momentum * velocity.projection + step.grad.projection;
      velocity.bias = config.momentum * velocity.bias + step.grad.bias;
      params.tensors.table -= config.learning_rate * velocity.table;
      params.tensors.projection -= config.learning_rate * velocity.projection;
      params.tensors.bias -= config.learning_rate * velocity.bias;
    }
    result.loss_history.push_back(weighted_loss / static_cast<double>(seen));
  }
  return result;
}

std::string LossHistoryCsv(std::span<const double> history) {
  std::string out = "epoch,mean_loss\n";
  char buf[64];
  for (std::size_t i = 0; i < history.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, history[i]);
    out += buf;
  }
  return out;
}

}  // namespace toolpilot
