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

#ifndef TRAJSSL__NN__OPTIM_HPP_
#define TRAJSSL__NN__OPTIM_HPP_

#include "trajssl/errors.hpp"
#include "trajssl/nn/param_store.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdint>
#include <numbers>

namespace trajssl::nn
{
struct AdamWConfig
{
  double lr{1e-3};
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
  double weight_decay{1e-4};
};

/**
 * @brief One AdamW step over every trainable parameter.
 *
 * Weight decay is decoupled and applied before the bias-corrected Adam update. Increments the
 * store's step counter and zeroes all gradients.
 */
template <typename S>
void adamw_step(ParamStore<S> & store, const AdamWConfig & cfg)
{
  const std::uint64_t t = store.step() + 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  const S decay = static_cast<S>(1.0 - cfg.lr * cfg.weight_decay);
  const S b1 = static_cast<S>(cfg.beta1);
  const S b2 = static_cast<S>(cfg.beta2);
  const S lr = static_cast<S>(cfg.lr);
  const S eps = static_cast<S>(cfg.eps);
  const S inv_bc1 = static_cast<S>(1.0 / bc1);
  const S inv_bc2 = static_cast<S>(1.0 / bc2);
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto & p = store[i];
    if (!p.trainable) {
      continue;
    }
    p.value *= decay;
    p.adam_m = b1 * p.adam_m + (S(1) - b1) * p.grad;
    p.adam_v = b2 * p.adam_v + (S(1) - b2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr * (p.adam_m.array() * inv_bc1) / ((p.adam_v.array() * inv_bc2).sqrt() + eps);
    check_finite(p.value, p.name);
  }
  store.set_step(t);
  store.zero_grad();
}

/**
 * @brief Momentum schedule m(k) = 1 - (1 - m0) (cos(pi k / K) + 1) / 2.
 *
 * Rises from m0 at k = 0 to 1 at k = K; steps past K return 1.
 */
struct EmaSchedule
{
  double base_momentum{0.996};
  std::uint64_t total_steps{1};
};

inline double momentum_at(const EmaSchedule & schedule, std::uint64_t k)
{
  if (schedule.total_steps == 0 || k >= schedule.total_steps) {
    return 1.0;
  }
  const double ratio = static_cast<double>(k) / static_cast<double>(schedule.total_steps);
  return 1.0 - (1.0 - schedule.base_momentum) * (std::cos(std::numbers::pi * ratio) + 1.0) / 2.0;
}

/**
 * @brief momentum <- m * momentum + (1 - m) * online for every trainable entry of `momentum`.
 *
 * Every entry of `momentum` must exist in `online` with the same shape, otherwise StoreMismatch.
 * Running statistics are left alone and gradients are not touched. m == 1 is an exact no-op.
 */
template <typename S>
void ema_update(const ParamStore<S> & online, ParamStore<S> & momentum, double m)
{
  for (std::size_t i = 0; i < momentum.size(); ++i) {
    const auto & target = momentum[i];
    const auto * source = online.find(target.name);
    if (!source) {
      throw StoreMismatch(fmt::format("ema: online store has no '{}'", target.name));
    }
    if (source->value.rows() != target.value.rows() || source->value.cols() != target.value.cols()) {
      throw StoreMismatch(fmt::format("ema: shape mismatch for '{}'", target.name));
    }
  }
  if (m == 1.0) {
    return;
  }
  const S keep = static_cast<S>(m);
  const S take = static_cast<S>(1.0 - m);
  for (std::size_t i = 0; i < momentum.size(); ++i) {
    auto & target = momentum[i];
    if (!target.trainable) {
      continue;
    }
    const auto & source = online.at(target.name);
    target.value = keep * target.value + take * source.value;
  }
}

}  // namespace trajssl::nn

#endif  // TRAJSSL__NN__OPTIM_HPP_
