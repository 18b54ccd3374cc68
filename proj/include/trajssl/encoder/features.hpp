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

#ifndef TRAJSSL__ENCODER__FEATURES_HPP_
#define TRAJSSL__ENCODER__FEATURES_HPP_

#include "trajssl/nn/tensor.hpp"
#include "trajssl/scenario/standardize.hpp"
#include "trajssl/scenario/types.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace trajssl::encoder
{
struct EncoderConfig
{
  int embed_dim{64};
  int hidden_dim{64};
  int k_map{4};
  double attention_radius{50.0};

  /// (dx, dy, valid) plus (dx, dy) per nearest map point.
  int feature_dim() const noexcept { return 3 + 2 * k_map; }

  /// Throws ShapeError on a broken invariant.
  void validate() const;
};

/**
 * @brief Frame of window [start, start + horizon) of `agent`, anchored at its last valid step.
 *
 * Heading comes from the displacement into the anchor when both steps lie in the window and are
 * valid; otherwise the frame only translates. A window without valid steps gives the identity.
 */
scenario::Frame window_frame(const scenario::AgentTrack & agent, int start, int horizon);

/**
 * @brief Uniform-grid index over all map points of a scenario.
 */
class MapIndex
{
public:
  explicit MapIndex(const std::vector<scenario::Polyline> & map, double cell_size = 8.0);

  /// Up to `k` points nearest to `query`, ordered by (distance, insertion order).
  void nearest(const scenario::TrajPoint & query, int k, std::vector<scenario::TrajPoint> & out) const;

  std::size_t size() const noexcept { return points_.size(); }

private:
  static std::int64_t key(std::int64_t cx, std::int64_t cy) noexcept { return (cx << 32) ^ (cy & 0xffffffff); }

  double cell_;
  std::vector<scenario::TrajPoint> points_;
  std::unordered_map<std::int64_t, std::vector<int>> cells_;
  std::int64_t min_cx_{0};
  std::int64_t max_cx_{-1};
  std::int64_t min_cy_{0};
  std::int64_t max_cy_{-1};
};

/**
 * @brief Per-step feature rows of one agent over window [start, start + horizon).
 *
 * Everything is expressed in the window frame of the agent (see window_frame). Row layout:
 * displacement from the previous step (zero at the first step), valid flag, then offsets from the
 * agent to its `k_map` nearest map points (zero rows when the map has fewer points). Only steps
 * inside the window are read. Writes horizon x feature_dim values to `out`.
 */
void featurize_window(
  const scenario::Scenario & s, const MapIndex & map, int track, int start, int horizon, int k_map, double * out);

std::vector<double> featurize_window(
  const scenario::Scenario & s, const MapIndex & map, int track, int start, int horizon, int k_map);

/// One agent in one window; `group` identifies the window for social attention.
struct AgentWindow
{
  const scenario::Scenario * scenario{nullptr};
  const MapIndex * map{nullptr};
  int track{0};
  int start{0};
  int horizon{0};
  int group{0};
};

/**
 * @brief Encoder input for N agent windows of a common horizon.
 */
struct WindowBatch
{
  int horizon{0};
  /// (N * horizon, feature_dim), agent-major.
  nn::Tensor<double> features;
  /// N * horizon flags.
  std::vector<std::uint8_t> step_valid;
  std::vector<int> group;
  /// Global window-frame origin of each agent, used for the attention radius.
  std::vector<scenario::TrajPoint> anchor;

  int num_agents() const noexcept { return static_cast<int>(group.size()); }
};

WindowBatch build_window_batch(const std::vector<AgentWindow> & agents, int k_map);

/**
 * @brief Appends one window per track of `s` with at least one valid step in the window.
 *
 * Returns, per track, its row among `agents` after the call, or -1 when the track was skipped.
 */
std::vector<int> append_scene_windows(
  const scenario::Scenario & s, const MapIndex & map, int start, int horizon, int group,
  std::vector<AgentWindow> & agents);

/**
 * @brief Lazily built map index per scenario, keyed by address.
 *
 * Scenarios must outlive the cache and stay in place. Not thread-safe.
 */
class MapCache
{
public:
  const MapIndex & get(const scenario::Scenario & s);
  std::size_t size() const noexcept { return cache_.size(); }

private:
  std::unordered_map<const scenario::Scenario *, MapIndex> cache_;
};

}  // namespace trajssl::encoder

#endif  // TRAJSSL__ENCODER__FEATURES_HPP_
