// Copyright 2026 The trajssl Authors
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

#ifndef TRAJSSL__SSL__HEADS_HPP_
#define TRAJSSL__SSL__HEADS_HPP_

#include "trajssl/nn/layers.hpp"
#include "trajssl/nn/param_store.hpp"

#include <string>

namespace trajssl::ssl
{
enum class NormKind { kBatch, kLayer };

/**
 * @brief fc1 -> norm -> ReLU -> fc2.
 *
 * Parameters: `<name>.fc1.*`, `<name>.norm.*`, `<name>.fc2.*`. With batch normalization the mode
 * selects batch or running statistics; layer normalization ignores it.
 */
template <typename S>
class MlpHead
{
public:
  MlpHead(
    nn::ParamStore<S> & store, const std::string & name, Eigen::Index in, Eigen::Index hidden, Eigen::Index out,
    NormKind norm)
  : kind_(norm), fc1_(store, name + ".fc1", in, hidden), fc2_(store, name + ".fc2", hidden, out)
  {
    if (norm == NormKind::kBatch) {
      bn_ = nn::BatchNorm<S>(store, name + ".norm", hidden);
    } else {
      ln_ = nn::LayerNorm<S>(store, name + ".norm", hidden);
    }
  }

  nn::Tensor<S> forward(const nn::Tensor<S> & x, nn::Mode mode = nn::Mode::kTrain)
  {
    nn::Tensor<S> h = fc1_.forward(x);
    h = kind_ == NormKind::kBatch ? bn_.forward(h, mode) : ln_.forward(h);
    return fc2_.forward(relu_.forward(h));
  }

  nn::Tensor<S> backward(const nn::Tensor<S> & dy)
  {
    nn::Tensor<S> dh = relu_.backward(fc2_.backward(dy));
    dh = kind_ == NormKind::kBatch ? bn_.backward(dh) : ln_.backward(dh);
    return fc1_.backward(dh);
  }

  Eigen::Index out_features() const { return fc2_.out_features(); }

private:
  NormKind kind_;
  nn::Linear<S> fc1_;
  nn::BatchNorm<S> bn_;
  nn::LayerNorm<S> ln_;
  nn::Relu<S> relu_;
  nn::Linear<S> fc2_;
};

/**
 * @brief Running sum over the steps of (x, y) sequences laid out as [block][step][xy] per row.
 *
 * Trajectory heads emit per-step displacements and this turns them into positions.
 */
template <typename S>
nn::Tensor<S> cumulate_steps(const nn::Tensor<S> & deltas, Eigen::Index steps)
{
  nn::Tensor<S> out = deltas;
  const Eigen::Index blocks = deltas.cols() / (2 * steps);
  for (Eigen::Index b = 0; b < blocks; ++b) {
    for (Eigen::Index s = 1; s < steps; ++s) {
      const Eigen::Index c = 2 * (b * steps + s);
      out.col(c) += out.col(c - 2);
      out.col(c + 1) += out.col(c - 1);
    }
  }
  return out;
}

/// Adjoint of cumulate_steps: suffix sums of the position gradient.
template <typename S>
nn::Tensor<S> cumulate_steps_backward(const nn::Tensor<S> & d_positions, Eigen::Index steps)
{
  nn::Tensor<S> out = d_positions;
  const Eigen::Index blocks = d_positions.cols() / (2 * steps);
  for (Eigen::Index b = 0; b < blocks; ++b) {
    for (Eigen::Index s = steps - 2; s >= 0; --s) {
      const Eigen::Index c = 2 * (b * steps + s);
      out.col(c) += out.col(c + 2);
      out.col(c + 1) += out.col(c + 3);
    }
  }
  return out;
}

/**
 * @brief MLP head whose output is read as a trajectory of `steps` (x, y) positions.
 */
template <typename S>
class TrajectoryDecoder
{
public:
  TrajectoryDecoder(
    nn::ParamStore<S> & store, const std::string & name, Eigen::Index in, Eigen::Index hidden, Eigen::Index steps)
  : steps_(steps), mlp_(store, name, in, hidden, 2 * steps, NormKind::kLayer)
  {
  }

  /// (N, steps * 2) positions.
  nn::Tensor<S> forward(const nn::Tensor<S> & x) { return cumulate_steps<S>(mlp_.forward(x), steps_); }

  nn::Tensor<S> backward(const nn::Tensor<S> & d_positions)
  {
    return mlp_.backward(cumulate_steps_backward<S>(d_positions, steps_));
  }

  Eigen::Index steps() const noexcept { return steps_; }

private:
  Eigen::Index steps_;
  MlpHead<S> mlp_;
};

}  // namespace trajssl::ssl

#endif  // TRAJSSL__SSL__HEADS_HPP_
