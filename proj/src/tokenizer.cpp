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

#include "toolpilot/tokenizer.hpp"

#include <algorithm>
#include <cstring>

#include "toolpilot/hashing.hpp"

namespace toolpilot {
namespace {

bool IsUnicodeSpace(std::uint32_t cp) {
  if (cp >= 0x09 && cp <= 0x0D) return true;
  switch (cp) {
    case 0x20:
    case 0x85:
    case 0xA0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Decodes one UTF-8 sequence at text[pos]. Invalid bytes decode as
// themselves with length 1 so tokenization never fails.
std::uint32_t DecodeUtf8(std::string_view text, std::size_t pos,
                         std::size_t* length) {
  const auto b0 = static_cast<unsigned char>(text[pos]);
  auto cont = [&](std::size_t i) -> int {
    if (pos + i >= text.size()) return -1;
    const auto b = static_cast<unsigned char>(text[pos + i]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    *length = 1;
    return b0;
  }
  int need = 0;
  std::uint32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    need = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3;
    cp = b0 & 0x07;
  } else {
    *length = 1;
    return b0;
  }
  for (int i = 1; i <= need; ++i) {
    const int c = cont(static_cast<std::size_t>(i));
    if (c < 0) {
      *length = 1;
      return b0;
    }
    cp = (cp << 6) | static_cast<std::uint32_t>(c);
  }
  *length = static_cast<std::size_t>(need) + 1;
  return cp;
}

bool IsAsciiPunct(char c) {
  return c != '\0' && std::strchr("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~", c);
}

void EmitToken(std::string_view raw, std::vector<std::string>* out) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  while (begin < end && IsAsciiPunct(raw[begin])) ++begin;
  while (end > begin && IsAsciiPunct(raw[end - 1])) --end;
  if (begin == end) return;
  std::string token(raw.substr(begin, end - begin));
  for (char& c : token) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  out->push_back(std::move(token));
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t len = 1;
    const std::uint32_t cp = DecodeUtf8(text, pos, &len);
    if (IsUnicodeSpace(cp)) {
      if (pos > start) EmitToken(text.substr(start, pos - start), &tokens);
      start = pos + len;
    }
    pos += len;
  }
  if (pos > start) EmitToken(text.substr(start, pos - start), &tokens);
  return tokens;
}

std::uint32_t NgramBucket(std::span<const std::string> ngram,
                          std::uint32_t num_buckets) {
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < ngram.size(); ++i) {
    if (i > 0) h = Fnv1a64(" ", h);
    h = Fnv1a64(ngram[i], h);
  }
  return static_cast<std::uint32_t>(h % num_buckets);
}

TokenFeatures HashFeatures(std::span<const std::string> tokens,
                           std::span<const int> ngram_orders,
                           std::uint32_t num_buckets) {
  std::vector<int> orders(ngram_orders.begin(), ngram_orders.end());
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());

  TokenFeatures features;
  features.bucket_ids.reserve(ExpectedFeatureCount(tokens.size(), orders));
  for (int n : orders) {
    const auto width = static_cast<std::size_t>(n);
    if (n <= 0 || width > tokens.size()) continue;
    for (std::size_t i = 0; i + width <= tokens.size(); ++i) {
      features.bucket_ids.push_back(
          NgramBucket(tokens.subspan(i, width), num_buckets));
    }
  }
  return features;
}

std::size_t ExpectedFeatureCount(std::size_t num_tokens,
                                 std::span<const int> ngram_orders) {
  std::size_t total = 0;
  for (int n : ngram_orders) {
    if (n > 0 && static_cast<std::size_t>(n) <= num_tokens) {
      total += num_tokens - static_cast<std::size_t>(n) + 1;
    }
  }
  return total;
}

}  // namespace toolpilot
