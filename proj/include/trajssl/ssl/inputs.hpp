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

#ifndef TRAJSSL__SSL__INPUTS_HPP_
#define TRAJSSL__SSL__INPUTS_HPP_

#include "trajssl/encoder/features.hpp"
#include "trajssl/sampler/pair_sampler.hpp"
#include "trajssl/ssl/recon_target.hpp"

#include <cstdint>
#include <vector>

namespace trajssl::ssl
{
/**
 * @brief Encoder input for one window per pair plus the rows of the batch's agents.
 *
 * Every agent with a valid step in the window takes part as context; `rows[k]` is the batch row
 * of flattened agent k.
 */
struct EncodedView
{
  encoder::WindowBatch batch;
  std::vector<int> rows;
};

struct PretrainInputs
{
  /// window_a of every pair, online branch.
  EncodedView online;
  /// window_b of every pair, momentum branch.
  EncodedView momentum;
  /// (N, steps * 2) reconstruction ground truth; zeros where invalid.
  nn::Tensor<double> target;
  std::vector<std::uint8_t> target_valid;

  int num_agents() const noexcept { return static_cast<int>(online.rows.size()); }
};

PretrainInputs prepare_pretrain_inputs(
  const sampler::Batch & batch, encoder::MapCache & maps, int k_map, ReconTarget target);

}  // namespace trajssl::ssl

#endif  // TRAJSSL__SSL__INPUTS_HPP_
