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

#ifndef TRAJSSL__NN__PARAM_STORE_HPP_
#define TRAJSSL__NN__PARAM_STORE_HPP_

#include "trajssl/errors.hpp"
#include "trajssl/nn/tensor.hpp"
#include "trajssl/rng.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trajssl::nn
{
/**
 * @brief A named tensor with its gradient and AdamW moments.
 *
 * Non-trainable entries (normalization running statistics) are skipped by the optimizer and EMA
 * but still checkpointed.
 */
template <typename S>
struct Parameter
{
  std::string name;
  Tensor<S> value;
  Tensor<S> grad;
  Tensor<S> adam_m;
  Tensor<S> adam_v;
  bool trainable{true};
};

/**
 * @brief Ordered collection of uniquely named parameters.
 *
 * Entries are heap-allocated, so references handed out by `add` and `at` stay valid while the
 * store lives, including across moves. Copies are deep.
 */
template <typename S>
class ParamStore
{
public:
  ParamStore() = default;
  ParamStore(ParamStore &&) noexcept = default;
  ParamStore & operator=(ParamStore &&) noexcept = default;

  ParamStore(const ParamStore & other) : step_(other.step_)
  {
    for (const auto & p : other.params_) {
      insert(std::make_unique<Parameter<S>>(*p));
    }
  }

  ParamStore & operator=(const ParamStore & other)
  {
    if (this != &other) {
      ParamStore copy(other);
      *this = std::move(copy);
    }
    return *this;
  }

  /**
   * @brief Returns the parameter `name`, creating a zero tensor of the given shape if absent.
   *
   * Throws ShapeError if it exists with a different shape.
   */
  Parameter<S> & get_or_add(const std::string & name, Eigen::Index rows, Eigen::Index cols, bool trainable = true)
  {
    if (auto * p = find(name)) {
      if (p->value.rows() != rows || p->value.cols() != cols) {
        throw ShapeError(fmt::format(
          "parameter '{}' has shape ({}, {}), expected ({}, {})", name, p->value.rows(), p->value.cols(), rows, cols));
      }
      return *p;
    }
    auto p = std::make_unique<Parameter<S>>();
    p->name = name;
    p->value = Tensor<S>::Zero(rows, cols);
    p->grad = Tensor<S>::Zero(rows, cols);
    p->adam_m = Tensor<S>::Zero(rows, cols);
    p->adam_v = Tensor<S>::Zero(rows, cols);
    p->trainable = trainable;
    return insert(std::move(p));
  }

  Parameter<S> * find(std::string_view name)
  {
    const auto it = index_.find(std::string(name));
    return it == index_.end() ? nullptr : params_[it->second].get();
  }

  const Parameter<S> * find(std::string_view name) const
  {
    const auto it = index_.find(std::string(name));
    return it == index_.end() ? nullptr : params_[it->second].get();
  }

  Parameter<S> & at(std::string_view name)
  {
    if (auto * p = find(name)) {
      return *p;
    }
    throw StoreMismatch(fmt::format("no parameter named '{}'", name));
  }

  const Parameter<S> & at(std::string_view name) const
  {
    if (const auto * p = find(name)) {
      return *p;
    }
    throw StoreMismatch(fmt::format("no parameter named '{}'", name));
  }

  std::size_t size() const noexcept { return params_.size(); }
  Parameter<S> & operator[](std::size_t i) { return *params_[i]; }
  const Parameter<S> & operator[](std::size_t i) const { return *params_[i]; }

  std::uint64_t step() const noexcept { return step_; }
  void set_step(std::uint64_t step) noexcept { step_ = step; }

  void zero_grad()
  {
    for (auto & p : params_) {
      p->grad.setZero();
    }
  }

  void reset_optimizer()
  {
    for (auto & p : params_) {
      p->adam_m.setZero();
      p->adam_v.setZero();
    }
    step_ = 0;
  }

  /// Total number of scalar values across trainable parameters.
  std::size_t num_trainable() const
  {
    std::size_t n = 0;
    for (const auto & p : params_) {
      n += p->trainable ? static_cast<std::size_t>(p->value.size()) : 0;
    }
    return n;
  }

  /// Deep copy of the entries whose name starts with one of `prefixes`.
  ParamStore subset(const std::vector<std::string> & prefixes) const
  {
    ParamStore out;
    for (const auto & p : params_) {
      for (const auto & prefix : prefixes) {
        if (p->name.starts_with(prefix)) {
          out.insert(std::make_unique<Parameter<S>>(*p));
          break;
        }
      }
    }
    return out;
  }

private:
  Parameter<S> & insert(std::unique_ptr<Parameter<S>> p)
  {
    if (index_.contains(p->name)) {
      throw StoreMismatch(fmt::format("duplicate parameter '{}'", p->name));
    }
    index_.emplace(p->name, params_.size());
    params_.push_back(std::move(p));
    return *params_.back();
  }

  std::vector<std::unique_ptr<Parameter<S>>> params_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t step_{0};
};

/**
 * @brief Seeded initialization by naming convention.
 *
 * `*.weight` (shape fan_in x fan_out): uniform in +/- sqrt(6 / fan_in). `*.bias`, `*.shift`,
 * `*.running_mean`: zeros. `*.scale`, `*.running_var`: ones. Entries are visited in store order.
 */
template <typename S>
void initialize(ParamStore<S> & store, std::uint64_t seed, std::string_view prefix = {})
{
  Rng rng = Rng::derive(seed, 0x696e6974ULL);
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto & p = store[i];
    if (!p.name.starts_with(prefix)) {
      continue;
    }
    if (p.name.ends_with(".weight")) {
      const double bound = std::sqrt(6.0 / static_cast<double>(p.value.rows()));
      for (Eigen::Index k = 0; k < p.value.size(); ++k) {
        p.value.data()[k] = static_cast<S>(rng.uniform(-bound, bound));
      }
    } else if (p.name.ends_with(".scale") || p.name.ends_with(".running_var")) {
      p.value.setOnes();
    } else {
      p.value.setZero();
    }
    p.grad.setZero();
    p.adam_m.setZero();
    p.adam_v.setZero();
  }
}

}  // namespace trajssl::nn

#endif  // TRAJSSL__NN__PARAM_STORE_HPP_
