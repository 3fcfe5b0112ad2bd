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

#ifndef TOOLPILOT_TOKENIZER_HPP_
#define TOOLPILOT_TOKENIZER_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace toolpilot {

// Splits on Unicode whitespace, lowercases ASCII letters and strips ASCII
// punctuation from both ends of every token. Tokens left empty are dropped.
// Non-ASCII code points are kept byte-for-byte.
std::vector<std::string> Tokenize(std::string_view text);

// Multiset of hashed n-gram bucket ids.
struct TokenFeatures {
  std::vector<std::uint32_t> bucket_ids;
};

// Bucket of an n-gram: FNV-1a 64 of the tokens joined by a single space,
// reduced modulo num_buckets. Orders are visited ascending, positions
// left to right; repeated n-grams are kept.
std::uint32_t NgramBucket(std::span<const std::string> ngram,
                          std::uint32_t num_buckets);

TokenFeatures HashFeatures(std::span<const std::string> tokens,
                           std::span<const int> ngram_orders,
                           std::uint32_t num_buckets);

// Σ_n max(0, len - n + 1).
std::size_t ExpectedFeatureCount(std::size_t num_tokens,
                                 std::span<const int> ngram_orders);

}  // namespace toolpilot

#endif  // TOOLPILOT_TOKENIZER_HPP_
