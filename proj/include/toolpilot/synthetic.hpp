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

#ifndef TOOLPILOT_SYNTHETIC_HPP_
#define TOOLPILOT_SYNTHETIC_HPP_

#include <cstdint>
#include <map>
#include <vector>

#include "toolpilot/records.hpp"
#include "toolpilot/retriever.hpp"
#include "toolpilot/rng.hpp"

namespace toolpilot {

// Shape of a generated tool-use corpus. APIs come in functionality clusters
// that share a domain noun and differ in the operation they perform, so
// neighbours are semantically close. API descriptions use formal wording;
// user instructions use a disjoint everyday vocabulary.
struct SyntheticSpec {
  int num_functionalities = 11;
  int apis_per_functionality = 4;
  int extra_apis = 1;  // spread one each over the first clusters
  int templates_per_api = 5;
  // Trajectory length -> probability. Default mean is 3.5, max 9.
  std::map<int, double> trajectory_lengths = {
      {1, 0.10}, {2, 0.20}, {3, 0.24}, {4, 0.21},
      {5, 0.15}, {6, 0.05}, {7, 0.03}, {9, 0.02}};
  int num_training_pairs = 500;
  int num_eval_queries = 100;
  int num_trajectories = 100;
  int num_subtask_demos = 40;
  std::uint64_t seed = 0;

  int TotalApis() const {
    return num_functionalities * apis_per_functionality + extra_apis;
  }
  double MeanTrajectoryLength() const;
  // Throws ConfigError.
  void Validate() const;

  Json ToJson() const;
  static SyntheticSpec FromJson(const Json& doc);
};

struct SyntheticCorpus {
  std::vector<ApiRecord> apis;
  std::vector<TrainingPair> training_pairs;
  std::vector<EvalQuery> eval_queries;  // single gold each, held out
  std::vector<GoldTrajectory> trajectories;
  std::vector<DemoRecord> demos;        // subtask-level then api-level
};

SyntheticCorpus GenerateSyntheticCorpus(const SyntheticSpec& spec);

// Draws one trajectory length from the spec's distribution.
int SampleTrajectoryLength(const SyntheticSpec& spec, Rng& rng);

}  // namespace toolpilot

#endif  // TOOLPILOT_SYNTHETIC_HPP_
