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

#include "trajssl/ssl/inputs.hpp"

#include "trajssl/errors.hpp"

#include <fmt/format.h>

namespace trajssl::ssl
{
namespace
{
EncodedView encode_view(
  const sampler::Batch & batch, encoder::MapCache & maps, int k_map, bool second)
{
  std::vector<encoder::AgentWindow> windows;
  std::vector<std::vector<int>> track_rows;
  for (std::size_t p = 0; p < batch.pairs.size(); ++p) {
    const auto & w = second ? batch.pairs[p].window_b : batch.pairs[p].window_a;
    track_rows.push_back(
      encoder::append_scene_windows(*w.scenario, maps.get(*w.scenario), w.start, w.horizon, static_cast<int>(p), windows));
  }
  EncodedView view;
  view.batch = encoder::build_window_batch(windows, k_map);
  for (const auto & ref : batch.agents) {
    const int row = track_rows.at(ref.pair).at(ref.track);
    if (row < 0) {
      throw ShapeError(fmt::format("batch agent (pair {}, track {}) is not valid in its window", ref.pair, ref.track));
    }
    view.rows.push_back(row);
  }
  return view;
}
}  // namespace

PretrainInputs prepare_pretrain_inputs(
  const sampler::Batch & batch, encoder::MapCache & maps, int k_map, ReconTarget target)
{
  PretrainInputs in;
  in.online = encode_view(batch, maps, k_map, false);
  in.momentum = encode_view(batch, maps, k_map, true);
  if (batch.pairs.empty()) {
    return in;
  }
  const auto & first = batch.pairs.front();
  const int steps = recon_length(target, first.scenario().T, first.window_a.horizon);
  in.target = nn::Tensor<double>::Zero(batch.num_agents(), 2 * steps);
  in.target_valid.assign(static_cast<std::size_t>(batch.num_agents()) * steps, 0);
  for (int k = 0; k < batch.num_agents(); ++k) {
    const auto & ref = batch.agents[k];
    const ReconSample sample = select_recon_target(batch.pairs.at(ref.pair), ref.track, target);
    if (static_cast<int>(sample.points.size()) != steps) {
      throw ShapeError("reconstruction targets differ in length within a batch");
    }
    for (int s = 0; s < steps; ++s) {
      in.target(k, 2 * s) = sample.points[s].x;
      in.target(k, 2 * s + 1) = sample.points[s].y;
      in.target_valid[static_cast<std::size_t>(k) * steps + s] = sample.valid[s];
    }
  }
  return in;
}

}  // namespace trajssl::ssl
