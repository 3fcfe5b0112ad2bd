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

#ifndef TOOLPILOT_CONTRASTIVE_HPP_
#define TOOLPILOT_CONTRASTIVE_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "toolpilot/encoder.hpp"

namespace toolpilot {

// Cosine similarity of unit vectors: the plain dot product. The
// denominator |u||v| is 1 under the encoder's normalization invariant.
template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar CosineSim(const Eigen::MatrixBase<DerivedU>& u,
                                    const Eigen::MatrixBase<DerivedV>& v) {
  return u.dot(v);
}

// S(i, j) = scale * <instr_i, api_j>. Rows of both inputs are embeddings.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>
SimilarityMatrix(const Eigen::MatrixBase<DerivedA>& instr_embs,
                 const Eigen::MatrixBase<DerivedB>& api_embs,
                 typename DerivedA::Scalar scale) {
  eigen_assert(instr_embs.rows() == api_embs.rows());
  return scale * instr_embs * api_embs.transpose();
}

// Row-wise log-sum-exp with max subtraction.
template <typename Derived>
Vector<typename Derived::Scalar> RowLogSumExp(
    const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> out(s.rows());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const Scalar m = s.row(i).maxCoeff();
    out(i) = m + std::log((s.row(i).array() - m).exp().sum());
  }
  return out;
}

// Multiple negatives ranking loss over a K x K logit matrix whose diagonal
// holds the positive pairs:
//
//   L = -(1/K) sum_i log( exp(S_ii) / sum_j exp(S_ij) )
//
// Summing the positive plus every j != i negative equals the full-row sum,
// so the row log-sum-exp form is used directly.
template <typename Derived>
typename Derived::Scalar MnrLoss(const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  eigen_assert(s.rows() == s.cols());
  const Eigen::Index k = s.rows();
  if (k == 0) return Scalar(0);
  const Vector<Scalar> lse = RowLogSumExp(s);
  Scalar total(0);
  for (Eigen::Index i = 0; i < k; ++i) total += lse(i) - s(i, i);
  // Rounding can leave a tiny negative for a dominant diagonal.
  return std::max(Scalar(0), total / static_cast<Scalar>(k));
}

// dL/dS = (softmax(S) - I) / K, row-wise softmax.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
MnrLossLogitGrad(const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index k = s.rows();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> g(k, k);
  if (k == 0) return g;
  const Vector<Scalar> lse = RowLogSumExp(s);
  for (Eigen::Index i = 0; i < k; ++i) {
    g.row(i) = (s.row(i).array() - lse(i)).exp().matrix();
    g(i, i) -= Scalar(1);
  }
  g /= static_cast<Scalar>(k);
  return g;
}

template <typename Scalar>
struct LossAndGradient {
  Scalar loss{};
  EncoderTensors<Scalar> grad;
};

// Loss of a batch of (instruction, api text) pairs through the shared
// encoder. Both towers use the same parameters, so their contributions add.
template <typename Scalar>
Scalar MnrBatchLoss(std::span<const std::string> instructions,
                    std::span<const std::string> api_texts,
                    const BasicEncoderParams<Scalar>& params, Scalar scale) {
  const auto k = static_cast<Eigen::Index>(instructions.size());
  RowMatrix<Scalar> u(k, params.dim);
  RowMatrix<Scalar> v(k, params.dim);
  for (Eigen::Index i = 0; i < k; ++i) {
    u.row(i) = Embed(instructions[i], params).transpose();
    v.row(i) = Embed(api_texts[i], params).transpose();
  }
  return MnrLoss(SimilarityMatrix(u, v, scale));
}

// Exact gradient of MnrBatchLoss with respect to every encoder tensor:
// softmax -> scaled dot product -> L2 normalization -> projection -> mean
// pool. Per-example contributions are reduced in index order, instruction
// tower first.
template <typename Scalar>
LossAndGradient<Scalar> MnrLossGrad(std::span<const std::string> instructions,
                                    std::span<const std::string> api_texts,
                                    const BasicEncoderParams<Scalar>& params,
                                    Scalar scale) {
  eigen_assert(instructions.size() == api_texts.size());
  const auto k = static_cast<Eigen::Index>(instructions.size());
  std::vector<EncoderForward<Scalar>> fwd_u;
  std::vector<EncoderForward<Scalar>> fwd_v;
  fwd_u.reserve(instructions.size());
  fwd_v.reserve(api_texts.size());
  RowMatrix<Scalar> u(k, params.dim);
  RowMatrix<Scalar> v(k, params.dim);
  for (Eigen::Index i = 0; i < k; ++i) {
    fwd_u.push_back(EncodeForward(instructions[i], params));
    fwd_v.push_back(EncodeForward(api_texts[i], params));
    u.row(i) = fwd_u.back().embedding.transpose();
    v.row(i) = fwd_v.back().embedding.transpose();
  }

  const auto s = SimilarityMatrix(u, v, scale);
  LossAndGradient<Scalar> out{
      MnrLoss(s),
      EncoderTensors<Scalar>::Zero(params.num_buckets, params.dim)};
  const auto d_s = MnrLossLogitGrad(s);
  const RowMatrix<Scalar> d_u = scale * d_s * v;
  const RowMatrix<Scalar> d_v = scale * d_s.transpose() * u;
  for (Eigen::Index i = 0; i < k; ++i) {
    EncodeBackward<Scalar>(fwd_u[i], d_u.row(i).transpose(), params, out.grad);
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    EncodeBackward<Scalar>(fwd_v[i], d_v.row(i).transpose(), params, out.grad);
  }
  return out;
}

}  // namespace toolpilot

#endif  // TOOLPILOT_CONTRASTIVE_HPP_
