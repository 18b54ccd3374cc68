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

#ifndef TRAJSSL__NN__LAYERS_HPP_
#define TRAJSSL__NN__LAYERS_HPP_

#include "trajssl/errors.hpp"
#include "trajssl/nn/param_store.hpp"
#include "trajssl/nn/tensor.hpp"

#include <fmt/format.h>

#include <cmath>
#include <string>

// Layers cache what their backward pass needs during forward. A layer therefore supports one
// forward/backward pair at a time; call backward before the next forward.

namespace trajssl::nn
{
inline constexpr double kNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

/// Masked-out attention logits are set to this value before the softmax.
inline constexpr double kMaskedLogit = -1e9;

/// kBatchStats normalizes with batch statistics and leaves the running estimates untouched.
enum class Mode { kTrain, kEval, kBatchStats };

/**
 * @brief Affine map y = x W + b with W of shape (in, out).
 */
template <typename S>
class Linear
{
public:
  Linear() = default;
  Linear(ParamStore<S> & store, const std::string & name, Eigen::Index in, Eigen::Index out)
  : name_(name),
    weight_(&store.get_or_add(name + ".weight", in, out)),
    bias_(&store.get_or_add(name + ".bias", 1, out))
  {
  }

  Tensor<S> forward(const Tensor<S> & x)
  {
    if (x.cols() != weight_->value.rows()) {
      throw ShapeError(
        fmt::format("{}: input has {} columns, weight expects {}", name_, x.cols(), weight_->value.rows()));
    }
    input_ = x;
    Tensor<S> y = x * weight_->value;
    y.rowwise() += bias_->value.row(0);
    check_finite(y, name_);
    return y;
  }

  /// Accumulates dW and db; returns d(input).
  Tensor<S> backward(const Tensor<S> & dy)
  {
    weight_->grad.noalias() += input_.transpose() * dy;
    bias_->grad.row(0) += dy.colwise().sum();
    return dy * weight_->value.transpose();
  }

  Eigen::Index in_features() const { return weight_->value.rows(); }
  Eigen::Index out_features() const { return weight_->value.cols(); }

private:
  std::string name_;
  Parameter<S> * weight_{nullptr};
  Parameter<S> * bias_{nullptr};
  Tensor<S> input_;
};

template <typename S>
class Relu
{
public:
  Tensor<S> forward(const Tensor<S> & x)
  {
    mask_ = (x.array() > S(0)).template cast<S>();
    return (x.array() * mask_.array()).matrix();
  }

  Tensor<S> backward(const Tensor<S> & dy) const { return (dy.array() * mask_.array()).matrix(); }

private:
  Tensor<S> mask_;
};

/**
 * @brief Batch normalization over rows with learned scale and shift.
 *
 * Train mode uses biased batch statistics and folds the unbiased variance into the running
 * estimate with momentum 0.1. Eval mode uses the running statistics.
 */
template <typename S>
class BatchNorm
{
public:
  BatchNorm() = default;
  BatchNorm(ParamStore<S> & store, const std::string & name, Eigen::Index features)
  : name_(name),
    scale_(&store.get_or_add(name + ".scale", 1, features)),
    shift_(&store.get_or_add(name + ".shift", 1, features)),
    running_mean_(&store.get_or_add(name + ".running_mean", 1, features, false)),
    running_var_(&store.get_or_add(name + ".running_var", 1, features, false))
  {
  }

  Tensor<S> forward(const Tensor<S> & x, Mode mode)
  {
    if (x.cols() != scale_->value.cols()) {
      throw ShapeError(fmt::format("{}: expected {} features, got {}", name_, scale_->value.cols(), x.cols()));
    }
    mode_ = mode;
    const auto n = x.rows();
    RowVector<S> mean;
    RowVector<S> var;
    if (mode != Mode::kEval) {
      if (n < 2) {
        throw BatchTooSmall(fmt::format("{}: batch normalization needs >= 2 rows in train mode, got {}", name_, n));
      }
      mean = x.colwise().mean();
      var = (x.rowwise() - mean).array().square().colwise().mean().matrix();
      if (mode == Mode::kTrain) {
        const S m = static_cast<S>(kBatchNormMomentum);
        const S unbias = static_cast<S>(n) / static_cast<S>(n - 1);
        running_mean_->value = (S(1) - m) * running_mean_->value + m * mean;
        running_var_->value = (S(1) - m) * running_var_->value + (m * unbias) * var;
      }
    } else {
      mean = running_mean_->value;
      var = running_var_->value;
    }
    inv_std_ = (var.array() + static_cast<S>(kNormEpsilon)).rsqrt().matrix();
    normalized_ = ((x.rowwise() - mean).array().rowwise() * inv_std_.array()).matrix();
    Tensor<S> y = (normalized_.array().rowwise() * scale_->value.row(0).array()).matrix();
    y.rowwise() += shift_->value.row(0);
    check_finite(y, name_);
    return y;
  }

  Tensor<S> backward(const Tensor<S> & dy)
  {
    scale_->grad.row(0) += (dy.array() * normalized_.array()).colwise().sum().matrix();
    shift_->grad.row(0) += dy.colwise().sum();
    const Tensor<S> dxhat = (dy.array().rowwise() * scale_->value.row(0).array()).matrix();
    if (mode_ == Mode::kEval) {
      return (dxhat.array().rowwise() * inv_std_.array()).matrix();
    }
    const S n = static_cast<S>(dy.rows());
    const RowVector<S> sum_dxhat = dxhat.colwise().sum();
    const RowVector<S> sum_dxhat_xhat = (dxhat.array() * normalized_.array()).colwise().sum().matrix();
    Tensor<S> dx = ((dxhat * n).rowwise() - sum_dxhat).array() - normalized_.array().rowwise() * sum_dxhat_xhat.array();
    dx = (dx.array().rowwise() * (inv_std_.array() / n)).matrix();
    return dx;
  }

private:
  std::string name_;
  Parameter<S> * scale_{nullptr};
  Parameter<S> * shift_{nullptr};
  Parameter<S> * running_mean_{nullptr};
  Parameter<S> * running_var_{nullptr};
  Mode mode_{Mode::kTrain};
  RowVector<S> inv_std_;
  Tensor<S> normalized_;
};

/**
 * @brief Per-row normalization with learned scale and shift.
 */
template <typename S>
class LayerNorm
{
public:
  LayerNorm() = default;
  LayerNorm(ParamStore<S> & store, const std::string & name, Eigen::Index features)
  : name_(name),
    scale_(&store.get_or_add(name + ".scale", 1, features)),
    shift_(&store.get_or_add(name + ".shift", 1, features))
  {
  }

  Tensor<S> forward(const Tensor<S> & x)
  {
    if (x.cols() != scale_->value.cols()) {
      throw ShapeError(fmt::format("{}: expected {} features, got {}", name_, scale_->value.cols(), x.cols()));
    }
    const auto mean = x.rowwise().mean();
    const Tensor<S> centered = x.colwise() - mean;
    const auto var = centered.array().square().rowwise().mean();
    inv_std_ = (var + static_cast<S>(kNormEpsilon)).rsqrt().matrix();
    normalized_ = (centered.array().colwise() * inv_std_.array()).matrix();
    Tensor<S> y = (normalized_.array().rowwise() * scale_->value.row(0).array()).matrix();
    y.rowwise() += shift_->value.row(0);
    check_finite(y, name_);
    return y;
  }

  Tensor<S> backward(const Tensor<S> & dy)
  {
    scale_->grad.row(0) += (dy.array() * normalized_.array()).colwise().sum().matrix();
    shift_->grad.row(0) += dy.colwise().sum();
    const Tensor<S> dxhat = (dy.array().rowwise() * scale_->value.row(0).array()).matrix();
    const auto mean_dxhat = dxhat.rowwise().mean();
    const auto mean_dxhat_xhat = (dxhat.array() * normalized_.array()).rowwise().mean();
    Tensor<S> dx = (dxhat.colwise() - mean_dxhat).array() - normalized_.array().colwise() * mean_dxhat_xhat;
    return (dx.array().colwise() * inv_std_.array()).matrix();
  }

private:
  std::string name_;
  Parameter<S> * scale_{nullptr};
  Parameter<S> * shift_{nullptr};
  Eigen::Matrix<S, Eigen::Dynamic, 1> inv_std_;
  Tensor<S> normalized_;
};

/// Row-wise softmax with max subtraction.
template <typename S>
Tensor<S> softmax_rows(const Tensor<S> & logits)
{
  Tensor<S> out = logits.colwise() - logits.rowwise().maxCoeff();
  out = out.array().exp().matrix();
  out.array().colwise() /= out.array().rowwise().sum();
  return out;
}

using AttentionMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/**
 * @brief Scaled dot-product attention softmax(Q K^T / sqrt(d)) V.
 *
 * With a mask, disallowed logits are replaced by kMaskedLogit. A query row with no allowed key
 * produces a zero output row and receives zero gradient.
 */
template <typename S>
class Attention
{
public:
  struct Grads
  {
    Tensor<S> dq;
    Tensor<S> dk;
    Tensor<S> dv;
  };

  Tensor<S> forward(const Tensor<S> & q, const Tensor<S> & k, const Tensor<S> & v, const AttentionMask * mask = nullptr)
  {
    if (q.cols() == 0) {
      throw ShapeError("attention: key dimension is zero");
    }
    if (q.cols() != k.cols() || k.rows() != v.rows()) {
      throw ShapeError(fmt::format(
        "attention: incompatible shapes Q({}, {}) K({}, {}) V({}, {})", q.rows(), q.cols(), k.rows(), k.cols(),
        v.rows(), v.cols()));
    }
    if (mask && (mask->rows() != q.rows() || mask->cols() != k.rows())) {
      throw ShapeError("attention: mask shape does not match (queries, keys)");
    }
    q_ = q;
    k_ = k;
    v_ = v;
    scale_ = S(1) / std::sqrt(static_cast<S>(q.cols()));
    Tensor<S> logits = (q * k.transpose()) * scale_;
    if (mask) {
      logits = mask->select(logits, Tensor<S>::Constant(logits.rows(), logits.cols(), static_cast<S>(kMaskedLogit)));
    }
    probs_ = logits.rows() > 0 && logits.cols() > 0 ? softmax_rows(logits) : logits;
    if (mask) {
      for (Eigen::Index i = 0; i < mask->rows(); ++i) {
        if (!mask->row(i).any()) {
          probs_.row(i).setZero();
        }
      }
    }
    Tensor<S> out = probs_ * v;
    check_finite(out, "attention");
    return out;
  }

  Grads backward(const Tensor<S> & dout) const
  {
    Grads g;
    g.dv = probs_.transpose() * dout;
    const Tensor<S> dprobs = dout * v_.transpose();
    const auto row_dot = (dprobs.array() * probs_.array()).rowwise().sum();
    const Tensor<S> dlogits = (probs_.array() * (dprobs.array().colwise() - row_dot)).matrix() * scale_;
    g.dq = dlogits * k_;
    g.dk = dlogits.transpose() * q_;
    return g;
  }

  const Tensor<S> & probabilities() const noexcept { return probs_; }

private:
  Tensor<S> q_;
  Tensor<S> k_;
  Tensor<S> v_;
  Tensor<S> probs_;
  S scale_{1};
};

}  // namespace trajssl::nn

#endif  // TRAJSSL__NN__LAYERS_HPP_
