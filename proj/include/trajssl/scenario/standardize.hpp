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

#ifndef TRAJSSL__SCENARIO__STANDARDIZE_HPP_
#define TRAJSSL__SCENARIO__STANDARDIZE_HPP_

#include "trajssl/scenario/types.hpp"

#include <string_view>

namespace trajssl::scenario
{
/**
 * @brief Resamples a polyline so consecutive points sit `delta` apart along the path.
 *
 * Walks the input path and emits the first point at straight-line distance `delta` from the
 * previous emitted point, so the output lies on the input segments and a second pass is the
 * identity. The final input vertex is always kept. A trailing stride shorter than delta/2 is
 * merged into the previous one, so interior strides are exactly delta and the last one lies in
 * [delta/2, 3*delta/2) whenever the path is longer than delta.
 *
 * Throws DegeneratePolyline if the input has fewer than two distinct points.
 */
Polyline resample_polyline(const Polyline & line, double delta);

/// Appends (0, 0)/invalid steps so every track has length `T_target`. Throws HorizonOverflow.
Scenario pad_scenario(const Scenario & s, int T_target);

/// Keeps the earliest `T_target` steps.
Scenario truncate_scenario(const Scenario & s, int T_target);

/**
 * @brief Integer-stride temporal subsampling to `target_rate_hz`.
 *
 * Throws RateMismatch when the native rate is not an integer multiple of the target rate.
 */
Scenario subsample_rate(const Scenario & s, double target_rate_hz);

/**
 * @brief Drops every track that is invalid at some step below the native (pre-padding) horizon.
 *
 * Throws ScenarioRejected when the target agent itself is incomplete.
 */
Scenario filter_complete_tracks(const Scenario & s);

/**
 * @brief Rigid 2D transform into an agent-centric frame.
 *
 * The anchor position maps to the origin and the anchor heading to +x.
 */
struct Frame
{
  TrajPoint origin;
  double cos_heading{1.0};
  double sin_heading{0.0};

  TrajPoint to_local(const TrajPoint & p) const noexcept
  {
    const double dx = p.x - origin.x;
    const double dy = p.y - origin.y;
    return {cos_heading * dx + sin_heading * dy, -sin_heading * dx + cos_heading * dy};
  }

  /// Rotates a displacement without translating it.
  TrajPoint rotate(const TrajPoint & d) const noexcept
  {
    return {cos_heading * d.x + sin_heading * d.y, -sin_heading * d.x + cos_heading * d.y};
  }
};

/**
 * @brief Frame anchored at `track` step `anchor_step`.
 *
 * Heading is the displacement from `anchor_step - 1`; a zero displacement, or an anchor at step 0,
 * yields the identity rotation.
 */
Frame agent_frame(const AgentTrack & track, int anchor_step);

/// Applies `agent_frame(anchor, anchor_step)` to every track and map point.
Scenario normalize_frame(const Scenario & s, std::string_view anchor, int anchor_step);

}  // namespace trajssl::scenario

#endif  // TRAJSSL__SCENARIO__STANDARDIZE_HPP_
