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

#ifndef TRAJSSL__SSL__LOSSES_HPP_
#define TRAJSSL__SSL__LOSSES_HPP_

#include "trajssl/errors.hpp"
#include "trajssl/nn/tensor.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdint>
#include <vector>

namespace trajssl::ssl
{
template <typename S>
struct LossGrad
{
  double loss{0.0};
  /// d(loss)/d(input) for the differentiable input.
  nn::Tensor<S> grad;
};

namespace detail
{
inline nn::Tensor<double> unit_rows(const nn::Tensor<double> & z, Eigen::VectorXd & norms, const char * what)
{
  norms = z.rowwise().norm();
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (!(norms(i) > 0.0) || !std::isfinite(norms(i))) {
      throw DegenerateEmbedding(fmt::format("tcl: {} embedding {} has norm {}", what, i, norms(i)));
    }
  }
  return (z.array().colwise() / norms.array()).matrix();
}
}  // namespace detail

/**
 * @brief Trajectory contrastive loss with cosine similarity and temperature `tau`.
 *
 * Row i of `z_online` and `z_momentum` is the same agent seen in two windows. For each i the
 * positive is (z_i, z'_i); the candidates are every other online row z_j (j != i) and every
 * momentum row z'_j. The loss is the mean over i of -log(softmax over candidates of the positive).
 * The gradient flows into `z_online` only.
 */
template <typename S>
LossGrad<S> tcl_loss(const nn::Tensor<S> & z_online, const nn::Tensor<S> & z_momentum, double tau)
{
  if (!(tau > 0.0)) {
    throw ShapeError(fmt::format("tcl: temperature must be > 0, got {}", tau));
  }
  if (z_online.rows() != z_momentum.rows() || z_online.cols() != z_momentum.cols() || z_online.rows() == 0) {
    throw ShapeError(fmt::format(
      "tcl: embedding sets ({}, {}) and ({}, {}) must match and be non-empty", z_online.rows(), z_online.cols(),
      z_momentum.rows(), z_momentum.cols()));
  }
  const Eigen::Index n = z_online.rows();
  Eigen::VectorXd norms;
  Eigen::VectorXd norms_m;
  const nn::Tensor<double> u = detail::unit_rows(z_online.template cast<double>(), norms, "online");
  const nn::Tensor<double> um = detail::unit_rows(z_momentum.template cast<double>(), norms_m, "momentum");
  const nn::Tensor<double> intra = (u * u.transpose()) / tau;
  const nn::Tensor<double> cross = (u * um.transpose()) / tau;

  nn::Tensor<double> p_intra = nn::Tensor<double>::Zero(n, n);
  nn::Tensor<double> p_cross(n, n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double peak = cross.row(i).maxCoeff();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) {
        peak = std::max(peak, intra(i, j));
      }
    }
    double denom = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) {
        p_intra(i, j) = std::exp(intra(i, j) - peak);
        denom += p_intra(i, j);
      }
      p_cross(i, j) = std::exp(cross(i, j) - peak);
      denom += p_cross(i, j);
    }
    total += peak + std::log(denom) - cross(i, i);
    p_intra.row(i) /= denom;
    p_cross.row(i) /= denom;
  }

  LossGrad<S> out;
  out.loss = total / static_cast<double>(n);
  nn::Tensor<double> g_cross = p_cross;
  g_cross.diagonal().array() -= 1.0;
  const double inv = 1.0 / (static_cast<double>(n) * tau);
  const nn::Tensor<double> du = ((p_intra + p_intra.transpose()) * u + g_cross * um) * inv;
  const Eigen::VectorXd radial = (u.array() * du.array()).rowwise().sum();
  const nn::Tensor<double> dz = ((du - (u.array().colwise() * radial.array()).matrix()).array().colwise() / norms.array()).matrix();
  out.grad = dz.template cast<S>();
  return out;
}

/**
 * @brief Mean per-step L1 distance |dx| + |dy| over the valid entries.
 *
 * `decoded` and `target` are (N, steps * 2); `valid` holds N * steps flags, row-major. Invalid
 * entries are never read, so their contents cannot affect the result. Throws EmptyTarget when
 * nothing is valid.
 */
template <typename S>
LossGrad<S> trl_loss(const nn::Tensor<S> & decoded, const nn::Tensor<S> & target, const std::vector<std::uint8_t> & valid)
{
  if (decoded.rows() != target.rows() || decoded.cols() != target.cols() || decoded.cols() % 2 != 0) {
    throw ShapeError(fmt::format(
      "trl: decoded ({}, {}) and target ({}, {}) must match with an even width", decoded.rows(), decoded.cols(),
      target.rows(), target.cols()));
  }
  const Eigen::Index steps = decoded.cols() / 2;
  if (static_cast<Eigen::Index>(valid.size()) != decoded.rows() * steps) {
    throw ShapeError(fmt::format("trl: {} validity flags for {} entries", valid.size(), decoded.rows() * steps));
  }
  std::size_t count = 0;
  for (const auto v : valid) {
    count += v ? 1 : 0;
  }
  if (count == 0) {
    throw EmptyTarget("trl: no valid target step");
  }
  LossGrad<S> out;
  out.grad = nn::Tensor<S>::Zero(decoded.rows(), decoded.cols());
  const S g = static_cast<S>(1.0 / static_cast<double>(count));
  double total = 0.0;
  for (Eigen::Index i = 0; i < decoded.rows(); ++i) {
    for (Eigen::Index s = 0; s < steps; ++s) {
      if (!valid[i * steps + s]) {
        continue;
      }
      for (Eigen::Index d = 0; d < 2; ++d) {
        const double diff = static_cast<double>(decoded(i, 2 * s + d)) - static_cast<double>(target(i, 2 * s + d));
        total += std::abs(diff);
        out.grad(i, 2 * s + d) = diff > 0.0 ? g : (diff < 0.0 ? -g : S(0));
      }
    }
  }
  out.loss = total / static_cast<double>(count);
  return out;
}

/// L = L_c + lambda * L_r.
inline double combined_loss(double l_c, double l_r, double lambda) noexcept { return l_c + lambda * l_r; }

}  // namespace trajssl::ssl

#endif  // TRAJSSL__SSL__LOSSES_HPP_
