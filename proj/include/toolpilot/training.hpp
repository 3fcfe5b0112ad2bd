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

#ifndef TOOLPILOT_TRAINING_HPP_
#define TOOLPILOT_TRAINING_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "toolpilot/contrastive.hpp"
#include "toolpilot/encoder.hpp"
#include "toolpilot/records.hpp"

namespace toolpilot {

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;
  double learning_rate = 0.5;
  double momentum = 0.9;
  // Multiplies cosine similarities before the softmax. 1 gives the
  // unscaled loss.
  double similarity_scale = 20.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct TrainResult {
  EncoderParams params;
  std::vector<double> loss_history;  // mean loss per epoch
};

using ApiLookup = std::unordered_map<std::string, const ApiRecord*>;

// Throws DuplicateApiId on repeated ids.
ApiLookup IndexApis(std::span<const ApiRecord> apis);

// Splits `order` (indices into `pairs`) into batches of at most
// `batch_size` with no repeated positive api inside a batch. A pair whose
// api is already in the current batch is deferred, keeping its relative
// order, to the next batch.
std::vector<std::vector<std::size_t>> AssembleBatches(
    std::span<const TrainingPair> pairs, std::span<const std::size_t> order,
    int batch_size);

// Loss and gradient of one batch; api texts are resolved through `apis`.
LossAndGradient<double> BatchLossGrad(std::span<const TrainingPair> batch,
                                      const ApiLookup& apis,
                                      const EncoderParams& params,
                                      double scale);

// SGD with momentum over seeded per-epoch shuffles:
//   velocity = momentum * velocity + grad;  params -= lr * velocity
// Throws ConfigError, DanglingApiId; EmptyText propagates from the encoder.
TrainResult Train(std::span<const TrainingPair> pairs,
                  std::span<const ApiRecord> apis, const TrainConfig& config,
                  EncoderParams initial);

// "epoch,mean_loss" CSV, epochs numbered from 1.
std::string LossHistoryCsv(std::span<const double> history);

}  // namespace toolpilot

#endif  // TOOLPILOT_TRAINING_HPP_
