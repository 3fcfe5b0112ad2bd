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

#ifndef TOOLPILOT_CORPUS_HPP_
#define TOOLPILOT_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "toolpilot/records.hpp"

namespace toolpilot {

// JSON-lines corpora. Each file starts with a header line
//   {"schema": "<kind>", "version": 1}
// followed by one record per line with keys in sorted order. Loading
// accepts files without the header; saving always writes it.
inline constexpr int kCorpusSchemaVersion = 1;

std::vector<ApiRecord> ParseApis(std::string_view text);
std::vector<DemoRecord> ParseDemos(std::string_view text);
std::vector<TrainingPair> ParsePairs(std::string_view text);
std::vector<GoldTrajectory> ParseTrajectories(std::string_view text);
std::vector<PromptSample> ParsePromptSamples(std::string_view text);

std::string FormatApis(std::span<const ApiRecord> records);
std::string FormatDemos(std::span<const DemoRecord> records);
std::string FormatPairs(std::span<const TrainingPair> records);
std::string FormatTrajectories(std::span<const GoldTrajectory> records);
std::string FormatPromptSamples(std::span<const PromptSample> records);

std::vector<ApiRecord> LoadApis(const std::filesystem::path& path);
std::vector<DemoRecord> LoadDemos(const std::filesystem::path& path);
std::vector<TrainingPair> LoadPairs(const std::filesystem::path& path);
std::vector<GoldTrajectory> LoadTrajectories(const std::filesystem::path& path);
std::vector<PromptSample> LoadPromptSamples(const std::filesystem::path& path);

void SaveApis(std::span<const ApiRecord> r, const std::filesystem::path& path);
void SaveDemos(std::span<const DemoRecord> r, const std::filesystem::path& path);
void SavePairs(std::span<const TrainingPair> r,
               const std::filesystem::path& path);
void SaveTrajectories(std::span<const GoldTrajectory> r,
                      const std::filesystem::path& path);
void SavePromptSamples(std::span<const PromptSample> r,
                       const std::filesystem::path& path);

// Reads the schema tag of a JSON-lines file's header, or "" if absent.
std::string SniffSchema(std::string_view text);

// Throws DanglingApiId for any gold call whose api is not in `apis`.
void CheckTrajectories(std::span<const GoldTrajectory> trajectories,
                       std::span<const ApiRecord> apis);

// Seeded Fisher-Yates permutation of the prompt's API list.
PromptSample AugmentShuffleApis(const PromptSample& sample, std::uint64_t seed);

// Draws m ids from `pool` without replacement (partial Fisher-Yates over the
// pool entries not already in the prompt) and inserts each at a uniformly
// drawn position of the growing list. Throws PoolOverlapsGold when the pool
// contains a gold api, PoolTooSmall when fewer than m candidates remain.
PromptSample AugmentInjectIrrelevant(const PromptSample& sample,
                                     std::span<const ApiRecord> pool,
                                     std::size_t m, std::uint64_t seed);

using Lexicon = std::map<std::string, std::vector<std::string>>;

// Every whitespace-delimited word whose lowercased, punctuation-trimmed
// core is in the lexicon is replaced, with probability `rate`, by a
// uniformly chosen replacement. Separators and surrounding punctuation are
// kept. Replacements must be single tokens. Throws ConfigError.
std::string SynonymSubstitute(std::string_view instruction,
                              const Lexicon& lexicon, std::uint64_t seed,
                              double rate);

PromptSample AugmentSynonyms(const PromptSample& sample, const Lexicon& lexicon,
                             std::uint64_t seed, double rate);

// {"word": ["replacement", ...], ...}
Lexicon ParseLexicon(std::string_view json_text);

}  // namespace toolpilot

#endif  // TOOLPILOT_CORPUS_HPP_
