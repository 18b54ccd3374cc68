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

#ifndef TRAJSSL__NN__TENSOR_HPP_
#define TRAJSSL__NN__TENSOR_HPP_

#include "trajssl/errors.hpp"

#include <Eigen/Core>
#include <fmt/format.h>

#include <string_view>

namespace trajssl::nn
{
/// Dense row-major matrix; rows index samples, columns index features.
template <typename S>
using Tensor = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
using RowVector = Eigen::Matrix<S, 1, Eigen::Dynamic>;

/// Throws NumericFault if any element is NaN or infinite.
template <typename Derived>
void check_finite(const Eigen::MatrixBase<Derived> & t, std::string_view where)
{
  if (!t.allFinite()) {
    throw NumericFault(fmt::format("non-finite value produced by {}", where));
  }
}

template <typename A, typename B>
void check_same_shape(const Eigen::MatrixBase<A> & a, const Eigen::MatrixBase<B> & b, std::string_view where)
{
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(fmt::format(
      "{}: shape ({}, {}) does not match ({}, {})", where, a.rows(), a.cols(), b.rows(), b.cols()));
  }
}

}  // namespace trajssl::nn

#endif  // TRAJSSL__NN__TENSOR_HPP_
