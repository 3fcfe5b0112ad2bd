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

#ifndef TOOLPILOT_ENCODER_HPP_
#define TOOLPILOT_ENCODER_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "toolpilot/errors.hpp"
#include "toolpilot/rng.hpp"
#include "toolpilot/tokenizer.hpp"

namespace toolpilot {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Unit-norm embedding produced by the encoder.
using EmbeddingVector = Vector<double>;

struct EncoderConfig {
  int dim = 64;
  int num_buckets = 4096;
  std::vector<int> ngram_orders = {1, 2};
  std::uint64_t seed = 0;
  double init_range = 0.05;

  // Throws ConfigError on non-positive sizes or invalid n-gram orders.
  void Validate() const;
};

// Trainable tensors of the encoder. Gradients share this layout.
template <typename Scalar>
struct EncoderTensors {
  RowMatrix<Scalar> table;       // num_buckets x dim
  RowMatrix<Scalar> projection;  // dim x dim
  Vector<Scalar> bias;           // dim

  static EncoderTensors Zero(int num_buckets, int dim) {
    return {RowMatrix<Scalar>::Zero(num_buckets, dim),
            RowMatrix<Scalar>::Zero(dim, dim), Vector<Scalar>::Zero(dim)};
  }

  std::size_t size() const {
    return static_cast<std::size_t>(table.size() + projection.size() +
                                    bias.size());
  }

  // Flat view used by the optimizer and finite-difference checks:
  // table (row-major), then projection (row-major), then bias.
  Scalar& at(std::size_t flat) {
    const auto t = static_cast<std::size_t>(table.size());
    const auto p = static_cast<std::size_t>(projection.size());
    if (flat < t) return table.data()[flat];
    if (flat < t + p) return projection.data()[flat - t];
    return bias.data()[flat - t - p];
  }
  Scalar at(std::size_t flat) const {
    return const_cast<EncoderTensors*>(this)->at(flat);
  }

  EncoderTensors& operator+=(const EncoderTensors& other) {
    table += other.table;
    projection += other.projection;
    bias += other.bias;
    return *this;
  }

  bool AllFinite() const {
    return table.allFinite() && projection.allFinite() && bias.allFinite();
  }

  friend bool operator==(const EncoderTensors& a, const EncoderTensors& b) {
    return a.table == b.table && a.projection == b.projection &&
           a.bias == b.bias;
  }
};

// Hashed n-gram bag -> mean pool -> affine projection -> L2 normalization.
template <typename Scalar>
struct BasicEncoderParams {
  int dim = 0;
  int num_buckets = 0;
  std::vector<int> ngram_orders;
  EncoderTensors<Scalar> tensors;

  friend bool operator==(const BasicEncoderParams& a,
                         const BasicEncoderParams& b) {
    return a.dim == b.dim && a.num_buckets == b.num_buckets &&
           a.ngram_orders == b.ngram_orders && a.tensors == b.tensors;
  }
};

using EncoderParams = BasicEncoderParams<double>;

// Entries drawn i.i.d. uniform in [-init_range, init_range], in flat order.
template <typename Scalar>
BasicEncoderParams<Scalar> InitEncoder(const EncoderConfig& config) {
  config.Validate();
  BasicEncoderParams<Scalar> params;
  params.dim = config.dim;
  params.num_buckets = config.num_buckets;
  params.ngram_orders = config.ngram_orders;
  params.tensors =
      EncoderTensors<Scalar>::Zero(config.num_buckets, config.dim);
  Rng rng(config.seed);
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    params.tensors.at(i) = static_cast<Scalar>(
        rng.Uniform(-config.init_range, config.init_range));
  }
  return params;
}

template <typename Scalar>
TokenFeatures Featurize(std::string_view text,
                        const BasicEncoderParams<Scalar>& params) {
  const auto tokens = Tokenize(text);
  return HashFeatures(tokens, params.ngram_orders,
                      static_cast<std::uint32_t>(params.num_buckets));
}

// Intermediate values kept for backpropagation.
template <typename Scalar>
struct EncoderForward {
  TokenFeatures features;
  Vector<Scalar> pooled;     // mean of table rows
  Vector<Scalar> hidden;     // projection * pooled + bias
  Scalar norm{};             // ||hidden||
  Vector<Scalar> embedding;  // hidden / norm
};

template <typename Scalar>
EncoderForward<Scalar> EncodeForward(std::string_view text,
                                     const BasicEncoderParams<Scalar>& params) {
  EncoderForward<Scalar> fwd;
  fwd.features = Featurize(text, params);
  if (fwd.features.bucket_ids.empty()) {
    throw EmptyText("text has no tokens: \"" + std::string(text) + "\"");
  }
  const auto& table = params.tensors.table;
  fwd.pooled = Vector<Scalar>::Zero(params.dim);
  for (std::uint32_t b : fwd.features.bucket_ids) {
    fwd.pooled += table.row(b).transpose();
  }
  fwd.pooled /= static_cast<Scalar>(fwd.features.bucket_ids.size());
  fwd.hidden = params.tensors.projection * fwd.pooled + params.tensors.bias;
  fwd.norm = fwd.hidden.norm();
  if (!(fwd.norm > Scalar(0)) || !std::isfinite(static_cast<double>(fwd.norm))) {
    throw DegenerateEmbedding("hidden vector has zero or non-finite norm");
  }
  fwd.embedding = fwd.hidden / fwd.norm;
  return fwd;
}

// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(embedding).
//
// With e = h / |h|, the normalization Jacobian is (I - e e^T) / |h|.
template <typename Scalar>
void EncodeBackward(const EncoderForward<Scalar>& fwd,
                    const Eigen::Ref<const Vector<Scalar>>& d_embedding,
                    const BasicEncoderParams<Scalar>& params,
                    EncoderTensors<Scalar>& grad) {
  const Vector<Scalar> d_hidden =
      (d_embedding - fwd.embedding * fwd.embedding.dot(d_embedding)) /
      fwd.norm;
  grad.projection.noalias() += d_hidden * fwd.pooled.transpose();
  grad.bias += d_hidden;
  const Vector<Scalar> d_pooled =
      (params.tensors.projection.transpose() * d_hidden) /
      static_cast<Scalar>(fwd.features.bucket_ids.size());
  for (std::uint32_t b : fwd.features.bucket_ids) {
    grad.table.row(b) += d_pooled.transpose();
  }
}

// Throws EmptyText when `text` has no tokens.
template <typename Scalar>
Vector<Scalar> Embed(std::string_view text,
                     const BasicEncoderParams<Scalar>& params) {
  return EncodeForward(text, params).embedding;
}

// Binary format, little-endian:
//   "TPENCODR" | u32 version | u32 scalar_bytes | u32 dim | u32 num_buckets
//   | u32 num_orders | u32 orders[num_orders]
//   | f64 table[num_buckets*dim] | f64 projection[dim*dim] | f64 bias[dim]
// Matrices are row-major. Round-trip is bit-exact.
inline constexpr std::uint32_t kEncoderFormatVersion = 1;

std::string SerializeEncoder(const EncoderParams& params);
EncoderParams DeserializeEncoder(std::string_view bytes);
void SaveEncoder(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams LoadEncoder(const std::filesystem::path& path);

// FNV-1a 64 of the serialized bytes.
std::uint64_t EncoderFingerprint(const EncoderParams& params);

}  // namespace toolpilot

#endif  // TOOLPILOT_ENCODER_HPP_
