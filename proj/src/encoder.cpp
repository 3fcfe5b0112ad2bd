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

#include "toolpilot/encoder.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <set>

#include "toolpilot/file_util.hpp"
#include "toolpilot/hashing.hpp"

namespace toolpilot {
namespace {

static_assert(std::endian::native == std::endian::little,
              "encoder serialization assumes a little-endian host");

constexpr std::string_view kMagic = "TPENCODR";

void PutU32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

template <typename Derived>
void PutDoubles(std::string& out, const Eigen::DenseBase<Derived>& m) {
  const auto bytes = static_cast<std::size_t>(m.size()) * sizeof(double);
  out.append(reinterpret_cast<const char*>(m.derived().data()), bytes);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view Take(std::size_t n) {
    if (n > bytes_.size() - pos_) {
      throw FormatError("encoder file truncated");
    }
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint32_t U32() {
    std::uint32_t v;
    std::memcpy(&v, Take(4).data(), 4);
    return v;
  }

  template <typename Derived>
  void Doubles(Eigen::DenseBase<Derived>& m) {
    const auto n = static_cast<std::size_t>(m.size()) * sizeof(double);
    std::memcpy(m.derived().data(), Take(n).data(), n);
  }

  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void EncoderConfig::Validate() const {
  if (dim <= 0) throw ConfigError("encoder dim must be positive");
  if (num_buckets <= 0) throw ConfigError("num_buckets must be positive");
  if (ngram_orders.empty()) throw ConfigError("ngram_orders must be nonempty");
  std::set<int> seen;
  for (int n : ngram_orders) {
    if (n <= 0) throw ConfigError("ngram orders must be positive");
    if (!seen.insert(n).second) throw ConfigError("duplicate ngram order");
  }
  if (!(init_range > 0.0)) throw ConfigError("init_range must be positive");
}

std::string SerializeEncoder(const EncoderParams& params) {
  std::string out;
  out.reserve(64 + params.tensors.size() * sizeof(double));
  out.append(kMagic);
  PutU32(out, kEncoderFormatVersion);
  PutU32(out, sizeof(double));
  PutU32(out, static_cast<std::uint32_t>(params.dim));
  PutU32(out, static_cast<std::uint32_t>(params.num_buckets));
  PutU32(out, static_cast<std::uint32_t>(params.ngram_orders.size()));
  for (int n : params.ngram_orders) PutU32(out, static_cast<std::uint32_t>(n));
  PutDoubles(out, params.tensors.table);
  PutDoubles(out, params.tensors.projection);
  PutDoubles(out, params.tensors.bias);
  return out;
}

EncoderParams DeserializeEncoder(std::string_view bytes) {
  Reader in(bytes);
  if (in.Take(kMagic.size()) != kMagic) {
    throw FormatError("not an encoder parameter file");
  }
  if (const auto v = in.U32(); v != kEncoderFormatVersion) {
    throw FormatError("unsupported encoder format version " +
                      std::to_string(v));
  }
  if (in.U32() != sizeof(double)) throw FormatError("unsupported scalar width");

  EncoderConfig config;
  config.dim = static_cast<int>(in.U32());
  config.num_buckets = static_cast<int>(in.U32());
  const std::uint32_t num_orders = in.U32();
  if (num_orders > 64) throw FormatError("implausible ngram order count");
  config.ngram_orders.clear();
  for (std::uint32_t i = 0; i < num_orders; ++i) {
    config.ngram_orders.push_back(static_cast<int>(in.U32()));
  }
  try {
    config.Validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("invalid encoder header: ") + e.what());
  }

  EncoderParams params;
  params.dim = config.dim;
  params.num_buckets = config.num_buckets;
  params.ngram_orders = config.ngram_orders;
  params.tensors =
      EncoderTensors<double>::Zero(config.num_buckets, config.dim);
  in.Doubles(params.tensors.table);
  in.Doubles(params.tensors.projection);
  in.Doubles(params.tensors.bias);
  if (!in.AtEnd()) throw FormatError("trailing bytes after encoder payload");
  if (!params.tensors.AllFinite()) {
    throw FormatError("encoder parameters contain non-finite values");
  }
  return params;
}

void SaveEncoder(const EncoderParams& params,
                 const std::filesystem::path& path) {
  WriteFileBytes(path, SerializeEncoder(params));
}

EncoderParams LoadEncoder(const std::filesystem::path& path) {
  return DeserializeEncoder(ReadFileBytes(path));
}

std::uint64_t EncoderFingerprint(const EncoderParams& params) {
  return Fnv1a64(SerializeEncoder(params));
}

}  // namespace toolpilot
