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

#ifndef TRAJSSL__NN__GRADCHECK_HPP_
#define TRAJSSL__NN__GRADCHECK_HPP_

#include "trajssl/nn/param_store.hpp"
#include "trajssl/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace trajssl::nn
{
/**
 * @brief Central-difference gradient (L(w + h) - L(w - h)) / (2h) for every trainable entry.
 *
 * `loss_fn` must be deterministic. When `names` is non-empty only those parameters are probed.
 * Values are restored after probing.
 */
template <typename S>
std::map<std::string, Tensor<S>> finite_diff_grad(
  const std::function<double()> & loss_fn, ParamStore<S> & store, double h,
  const std::vector<std::string> & names = {})
{
  std::map<std::string, Tensor<S>> out;
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto & p = store[i];
    if (!p.trainable) {
      continue;
    }
    if (!names.empty() && std::find(names.begin(), names.end(), p.name) == names.end()) {
      continue;
    }
    Tensor<S> g(p.value.rows(), p.value.cols());
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      S & w = p.value.data()[k];
      const S saved = w;
      w = static_cast<S>(saved + h);
      const double plus = loss_fn();
      w = static_cast<S>(saved - h);
      const double minus = loss_fn();
      w = saved;
      g.data()[k] = static_cast<S>((plus - minus) / (2.0 * h));
    }
    out.emplace(p.name, std::move(g));
  }
  return out;
}

/// Floor on the denominator of the relative error, so entries that are zero up to finite-difference
/// noise are compared in absolute terms.
inline constexpr double kGradCheckFloor = 1e-4;

/// |a - n| / max(|a|, |n|, kGradCheckFloor).
inline double relative_error(double analytic, double numeric)
{
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  return std::abs(analytic - numeric) / scale;
}

/// Largest elementwise relative error between a tensor pair.
template <typename S>
double max_relative_error(const Tensor<S> & analytic, const Tensor<S> & numeric)
{
  check_same_shape(analytic, numeric, "max_relative_error");
  double worst = 0.0;
  for (Eigen::Index k = 0; k < analytic.size(); ++k) {
    worst = std::max(worst, relative_error(analytic.data()[k], numeric.data()[k]));
  }
  return worst;
}

/// Largest relative error between the store's gradients and a finite-difference estimate.
template <typename S>
double max_relative_error(const ParamStore<S> & store, const std::map<std::string, Tensor<S>> & numeric)
{
  double worst = 0.0;
  for (const auto & [name, g] : numeric) {
    worst = std::max(worst, max_relative_error<S>(store.at(name).grad, g));
  }
  return worst;
}

}  // namespace trajssl::nn

#endif  // TRAJSSL__NN__GRADCHECK_HPP_
