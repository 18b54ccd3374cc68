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

#include "trajssl/scenario/types.hpp"

#include "trajssl/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <unordered_set>

namespace trajssl::scenario
{
std::string_view to_string(AgentType type)
{
  switch (type) {
    case AgentType::kVehicle:
      return "vehicle";
    case AgentType::kPedestrian:
      return "pedestrian";
    case AgentType::kCyclist:
      return "cyclist";
    case AgentType::kUnknown:
      break;
  }
  return "unknown";
}

std::string_view to_string(PolylineTag tag)
{
  switch (tag) {
    case PolylineTag::kLane:
      return "lane";
    case PolylineTag::kBoundary:
      return "boundary";
    case PolylineTag::kOther:
      break;
  }
  return "other";
}

AgentType agent_type_from_string(std::string_view text)
{
  if (text == "vehicle") return AgentType::kVehicle;
  if (text == "pedestrian") return AgentType::kPedestrian;
  if (text == "cyclist") return AgentType::kCyclist;
  if (text == "unknown") return AgentType::kUnknown;
  throw ParseError(fmt::format("unknown agent type '{}'", text));
}

PolylineTag polyline_tag_from_string(std::string_view text)
{
  if (text == "lane") return PolylineTag::kLane;
  if (text == "boundary") return PolylineTag::kBoundary;
  if (text == "other") return PolylineTag::kOther;
  throw ParseError(fmt::format("unknown polyline tag '{}'", text));
}

bool AgentTrack::valid_over(int begin, int end) const
{
  if (begin < 0 || end > static_cast<int>(valid.size()) || begin > end) {
    return false;
  }
  for (int i = begin; i < end; ++i) {
    if (!valid[i]) {
      return false;
    }
  }
  return true;
}

int Scenario::track_index(std::string_view agent_id) const
{
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (tracks[i].id == agent_id) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

int Scenario::target_index() const
{
  const int idx = track_index(target_agent);
  if (idx < 0) {
    throw InvalidScenario(fmt::format("scenario '{}': target agent '{}' missing", id, target_agent));
  }
  return idx;
}

void Scenario::validate() const
{
  if (T != T_h + T_f) {
    throw InvalidScenario(fmt::format("scenario '{}': T={} != T_h+T_f={}", id, T, T_h + T_f));
  }
  if (T_h < 1 || T_f < 0) {
    throw InvalidScenario(fmt::format("scenario '{}': bad horizons T_h={} T_f={}", id, T_h, T_f));
  }
  if (native_T < 1 || native_T > T) {
    throw InvalidScenario(fmt::format("scenario '{}': native horizon {} outside [1,{}]", id, native_T, T));
  }
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw InvalidScenario(fmt::format("scenario '{}': bad sample rate", id));
  }
  std::unordered_set<std::string> seen;
  for (const auto & track : tracks) {
    if (!seen.insert(track.id).second) {
      throw InvalidScenario(fmt::format("scenario '{}': duplicate agent id '{}'", id, track.id));
    }
    if (track.size() != T || static_cast<int>(track.valid.size()) != T) {
      throw InvalidScenario(
        fmt::format("scenario '{}': agent '{}' has horizon {} != T={}", id, track.id, track.size(), T));
    }
    for (const auto & p : track.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw InvalidScenario(fmt::format("scenario '{}': agent '{}' has non-finite point", id, track.id));
      }
    }
  }
  if (track_index(target_agent) < 0) {
    throw InvalidScenario(fmt::format("scenario '{}': target agent '{}' missing", id, target_agent));
  }
  for (const auto & line : map) {
    if (line.points.size() < 2) {
      throw InvalidScenario(fmt::format("scenario '{}': polyline with fewer than 2 points", id));
    }
    for (const auto & p : line.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw InvalidScenario(fmt::format("scenario '{}': non-finite map point", id));
      }
    }
  }
}

void StandardProfile::validate() const
{
  if (T_h < 2) throw InvalidScenario("standard profile: T_h must be >= 2");
  if (T_f < 1) throw InvalidScenario("standard profile: T_f must be >= 1");
  if (T_f < T_h) throw InvalidScenario("standard profile: T_f must be >= T_h for non-overlapping windows");
  if (!(map_resolution > 0.0)) throw InvalidScenario("standard profile: map resolution must be > 0");
  if (!(sample_rate_hz > 0.0)) throw InvalidScenario("standard profile: sample rate must be > 0");
}

}  // namespace trajssl::scenario
