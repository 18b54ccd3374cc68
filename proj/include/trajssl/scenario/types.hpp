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

#ifndef TRAJSSL__SCENARIO__TYPES_HPP_
#define TRAJSSL__SCENARIO__TYPES_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace trajssl::scenario
{
struct TrajPoint
{
  double x{0.0};
  double y{0.0};

  friend bool operator==(const TrajPoint &, const TrajPoint &) = default;
};

enum class AgentType : std::uint8_t { kVehicle, kPedestrian, kCyclist, kUnknown };

enum class PolylineTag : std::uint8_t { kLane, kBoundary, kOther };

std::string_view to_string(AgentType type);
std::string_view to_string(PolylineTag tag);
AgentType agent_type_from_string(std::string_view text);
PolylineTag polyline_tag_from_string(std::string_view text);

/**
 * @brief One agent's states over the scenario horizon.
 *
 * `points` and `valid` both have length T. Invalid steps carry (0, 0).
 */
struct AgentTrack
{
  std::string id;
  AgentType type{AgentType::kVehicle};
  std::vector<TrajPoint> points;
  std::vector<bool> valid;

  int size() const noexcept { return static_cast<int>(points.size()); }

  /// True when every step in [begin, end) is valid.
  bool valid_over(int begin, int end) const;
};

struct Polyline
{
  PolylineTag tag{PolylineTag::kLane};
  std::vector<TrajPoint> points;
};

/**
 * @brief A single traffic scene.
 *
 * `native_T` is the horizon before zero-padding; it equals `T` for scenarios that were never
 * padded.
 */
struct Scenario
{
  std::string id;
  std::string source;
  double sample_rate_hz{10.0};
  int T{0};
  int T_h{0};
  int T_f{0};
  int native_T{0};
  std::string target_agent;
  std::vector<AgentTrack> tracks;
  std::vector<Polyline> map;

  /// Index of the track with the given id, or -1.
  int track_index(std::string_view agent_id) const;
  int target_index() const;

  /// Throws InvalidScenario if any structural invariant is broken.
  void validate() const;
};

/**
 * @brief Configuration every scenario in a data bank is aligned to.
 */
struct StandardProfile
{
  double sample_rate_hz{10.0};
  int T_h{20};
  int T_f{30};
  double map_resolution{2.0};

  int T() const noexcept { return T_h + T_f; }

  /// Throws InvalidScenario on a broken invariant.
  void validate() const;
};

}  // namespace trajssl::scenario

#endif  // TRAJSSL__SCENARIO__TYPES_HPP_
