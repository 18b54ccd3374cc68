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

#ifndef TRAJSSL__ENCODER__REFERENCE_ENCODER_HPP_
#define TRAJSSL__ENCODER__REFERENCE_ENCODER_HPP_

#include "trajssl/encoder/features.hpp"
#include "trajssl/nn/layers.hpp"
#include "trajssl/nn/param_store.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <string>

namespace trajssl::encoder
{
/**
 * @brief Contract every trajectory encoder satisfies.
 *
 * `forward` maps a window batch to one embedding row per agent, in batch order, using only the
 * window's steps and the map. `backward` takes d(loss)/d(embeddings) for the most recent forward
 * and accumulates parameter gradients in the store the encoder was built on. Parameters are
 * named under the encoder's prefix.
 */
template <typename S>
class Encoder
{
public:
  virtual ~Encoder() = default;
  virtual nn::Tensor<S> forward(const WindowBatch & batch) = 0;
  virtual void backward(const nn::Tensor<S> & d_embeddings) = 0;
  virtual int embed_dim() const = 0;
};

/// Builds an encoder whose parameters live in `store` under `prefix`.
template <typename S>
using EncoderFactory = std::function<std::unique_ptr<Encoder<S>>(nn::ParamStore<S> & store, const std::string & prefix)>;

/**
 * @brief Per-step two-layer MLP, mean pooling over valid steps, one round of social attention.
 *
 * z_i = h_i + sum_j softmax_j(q_i . k_j / sqrt(D)) v_j, where j runs over the other agents of the
 * same window group whose anchors lie within the attention radius. An agent without neighbours
 * keeps its pooled embedding h_i.
 */
template <typename S>
class ReferenceEncoder final : public Encoder<S>
{
public:
  ReferenceEncoder(const EncoderConfig & cfg, nn::ParamStore<S> & store, const std::string & prefix = "encoder")
  : cfg_(cfg),
    step_in_(store, prefix + ".step_in", cfg.feature_dim(), cfg.hidden_dim),
    step_out_(store, prefix + ".step_out", cfg.hidden_dim, cfg.embed_dim),
    query_(store, prefix + ".query", cfg.embed_dim, cfg.embed_dim),
    key_(store, prefix + ".key", cfg.embed_dim, cfg.embed_dim),
    value_(store, prefix + ".value", cfg.embed_dim, cfg.embed_dim)
  {
    cfg.validate();
  }

  nn::Tensor<S> forward(const WindowBatch & batch) override
  {
    const int n = batch.num_agents();
    const int horizon = batch.horizon;
    if (batch.features.cols() != cfg_.feature_dim()) {
      throw ShapeError(fmt::format("encoder: features have {} columns, expected {}", batch.features.cols(), cfg_.feature_dim()));
    }
    horizon_ = horizon;
    pool_weight_.assign(static_cast<std::size_t>(n) * horizon, S(0));
    for (int a = 0; a < n; ++a) {
      int count = 0;
      for (int i = 0; i < horizon; ++i) {
        count += batch.step_valid[a * horizon + i];
      }
      if (count == 0) {
        throw ShapeError(fmt::format("encoder: agent {} has no valid step in its window", a));
      }
      for (int i = 0; i < horizon; ++i) {
        pool_weight_[a * horizon + i] = batch.step_valid[a * horizon + i] ? S(1) / static_cast<S>(count) : S(0);
      }
    }

    const nn::Tensor<S> x = batch.features.template cast<S>();
    const nn::Tensor<S> per_step = step_out_.forward(relu_.forward(step_in_.forward(x)));
    pooled_ = nn::Tensor<S>::Zero(n, cfg_.embed_dim);
    for (int a = 0; a < n; ++a) {
      for (int i = 0; i < horizon; ++i) {
        const S w = pool_weight_[a * horizon + i];
        if (w != S(0)) {
          pooled_.row(a) += w * per_step.row(a * horizon + i);
        }
      }
    }

    mask_.resize(n, n);
    const double r2 = cfg_.attention_radius * cfg_.attention_radius;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double dx = batch.anchor[i].x - batch.anchor[j].x;
        const double dy = batch.anchor[i].y - batch.anchor[j].y;
        mask_(i, j) = i != j && batch.group[i] == batch.group[j] && dx * dx + dy * dy <= r2;
      }
    }
    const nn::Tensor<S> social =
      attention_.forward(query_.forward(pooled_), key_.forward(pooled_), value_.forward(pooled_), &mask_);
    return pooled_ + social;
  }

  void backward(const nn::Tensor<S> & dz) override
  {
    const auto grads = attention_.backward(dz);
    nn::Tensor<S> dpooled = dz;
    dpooled += query_.backward(grads.dq);
    dpooled += key_.backward(grads.dk);
    dpooled += value_.backward(grads.dv);

    const int n = static_cast<int>(dz.rows());
    nn::Tensor<S> dper_step(static_cast<Eigen::Index>(n) * horizon_, cfg_.embed_dim);
    for (int a = 0; a < n; ++a) {
      for (int i = 0; i < horizon_; ++i) {
        dper_step.row(a * horizon_ + i) = pool_weight_[a * horizon_ + i] * dpooled.row(a);
      }
    }
    step_in_.backward(relu_.backward(step_out_.backward(dper_step)));
  }

  int embed_dim() const override { return cfg_.embed_dim; }
  const EncoderConfig & config() const noexcept { return cfg_; }

  /// Pooled temporal embeddings of the most recent forward, before attention.
  const nn::Tensor<S> & pooled() const noexcept { return pooled_; }

private:
  EncoderConfig cfg_;
  nn::Linear<S> step_in_;
  nn::Relu<S> relu_;
  nn::Linear<S> step_out_;
  nn::Linear<S> query_;
  nn::Linear<S> key_;
  nn::Linear<S> value_;
  nn::Attention<S> attention_;
  nn::AttentionMask mask_;
  nn::Tensor<S> pooled_;
  std::vector<S> pool_weight_;
  int horizon_{0};
};

template <typename S>
EncoderFactory<S> reference_encoder_factory(const EncoderConfig & cfg)
{
  return [cfg](nn::ParamStore<S> & store, const std::string & prefix) -> std::unique_ptr<Encoder<S>> {
    return std::make_unique<ReferenceEncoder<S>>(cfg, store, prefix);
  };
}

}  // namespace trajssl::encoder

#endif  // TRAJSSL__ENCODER__REFERENCE_ENCODER_HPP_
