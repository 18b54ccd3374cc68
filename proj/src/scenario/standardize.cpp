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

#include "trajssl/scenario/standardize.hpp"

#include "trajssl/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace trajssl::scenario
{
namespace
{
double distance(const TrajPoint & a, const TrajPoint & b)
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

Polyline resample_polyline(const Polyline & line, double delta)
{
  if (!(delta > 0.0)) {
    throw DegeneratePolyline("resolution must be positive");
  }
  std::vector<TrajPoint> pts;
  pts.reserve(line.points.size());
  for (const auto & p : line.points) {
    if (pts.empty() || distance(pts.back(), p) > 0.0) {
      pts.push_back(p);
    }
  }
  if (pts.size() < 2) {
    throw DegeneratePolyline("polyline has fewer than 2 distinct points");
  }

  // Points closer than this to the target stride count as hitting it.
  const double tol = 1e-12 * delta;
  Polyline out{line.tag, {pts.front()}};
  TrajPoint current = pts.front();
  std::size_t seg = 0;
  double u_start = 0.0;
  while (seg + 1 < pts.size()) {
    const TrajPoint & b = pts[seg + 1];
    if (distance(b, current) < delta - tol) {
      ++seg;
      u_start = 0.0;
      continue;
    }
    // Exit point of the segment from the disc of radius delta around `current`.
    const TrajPoint & a = pts[seg];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double fx = a.x - current.x;
    const double fy = a.y - current.y;
    const double qa = dx * dx + dy * dy;
    const double qb = fx * dx + fy * dy;
    const double qc = fx * fx + fy * fy - delta * delta;
    const double disc = std::max(0.0, qb * qb - qa * qc);
    const double u = std::clamp((-qb + std::sqrt(disc)) / qa, u_start, 1.0);
    current = (u == 1.0) ? b : TrajPoint{a.x + u * dx, a.y + u * dy};
    out.points.push_back(current);
    u_start = u;
  }

  const TrajPoint & last = pts.back();
  const double remainder = distance(out.points.back(), last);
  if (remainder <= 1e-9 * delta) {
    if (out.points.size() > 1) {
      out.points.back() = last;
    } else {
      out.points.push_back(last);
    }
  } else if (remainder < 0.5 * delta && out.points.size() > 1) {
    out.points.back() = last;
  } else {
    out.points.push_back(last);
  }
  return out;
}

Scenario pad_scenario(const Scenario & s, int T_target)
{
  if (s.T > T_target) {
    throw HorizonOverflow(fmt::format("scenario '{}': horizon {} exceeds target {}", s.id, s.T, T_target));
  }
  Scenario out = s;
  for (auto & track : out.tracks) {
    track.points.resize(T_target, TrajPoint{});
    track.valid.resize(T_target, false);
  }
  out.T = T_target;
  out.T_f = T_target - out.T_h;
  return out;
}

Scenario truncate_scenario(const Scenario & s, int T_target)
{
  if (s.T <= T_target) {
    return s;
  }
  Scenario out = s;
  for (auto & track : out.tracks) {
    track.points.resize(T_target);
    track.valid.resize(T_target);
  }
  out.T = T_target;
  out.T_h = std::min(out.T_h, T_target);
  out.T_f = T_target - out.T_h;
  out.native_T = std::min(out.native_T, T_target);
  return out;
}

Scenario subsample_rate(const Scenario & s, double target_rate_hz)
{
  const double ratio = s.sample_rate_hz / target_rate_hz;
  const double stride_f = std::round(ratio);
  if (stride_f < 1.0 || std::abs(ratio - stride_f) > 1e-9) {
    throw RateMismatch(fmt::format(
      "scenario '{}': rate {} Hz is not an integer multiple of {} Hz", s.id, s.sample_rate_hz,
      target_rate_hz));
  }
  const int stride = static_cast<int>(stride_f);
  if (stride == 1) {
    return s;
  }
  const auto ceil_div = [stride](int n) { return (n + stride - 1) / stride; };
  Scenario out = s;
  out.sample_rate_hz = target_rate_hz;
  out.T = ceil_div(s.T);
  out.T_h = ceil_div(s.T_h);
  out.T_f = out.T - out.T_h;
  out.native_T = ceil_div(s.native_T);
  for (std::size_t a = 0; a < s.tracks.size(); ++a) {
    auto & track = out.tracks[a];
    track.points.clear();
    track.valid.clear();
    for (int i = 0; i < s.T; i += stride) {
      track.points.push_back(s.tracks[a].points[i]);
      track.valid.push_back(s.tracks[a].valid[i]);
    }
  }
  return out;
}

Scenario filter_complete_tracks(const Scenario & s)
{
  Scenario out = s;
  out.tracks.clear();
  bool target_kept = false;
  for (const auto & track : s.tracks) {
    if (track.valid_over(0, s.native_T)) {
      target_kept = target_kept || track.id == s.target_agent;
      out.tracks.push_back(track);
    }
  }
  if (!target_kept) {
    throw ScenarioRejected(fmt::format("scenario '{}': target agent '{}' is incomplete", s.id, s.target_agent));
  }
  return out;
}

Frame agent_frame(const AgentTrack & track, int anchor_step)
{
  Frame frame;
  frame.origin = track.points.at(anchor_step);
  if (anchor_step >= 1 && track.valid[anchor_step - 1]) {
    const TrajPoint & prev = track.points[anchor_step - 1];
    const double dx = frame.origin.x - prev.x;
    const double dy = frame.origin.y - prev.y;
    const double norm = std::hypot(dx, dy);
    if (norm > 0.0) {
      frame.cos_heading = dx / norm;
      frame.sin_heading = dy / norm;
    }
  }
  return frame;
}

Scenario normalize_frame(const Scenario & s, std::string_view anchor, int anchor_step)
{
  const int idx = s.track_index(anchor);
  if (idx < 0) {
    throw InvalidScenario(fmt::format("scenario '{}': anchor '{}' missing", s.id, anchor));
  }
  const AgentTrack & anchor_track = s.tracks[idx];
  if (anchor_step < 0 || anchor_step >= anchor_track.size() || !anchor_track.valid[anchor_step]) {
    throw InvalidScenario(
      fmt::format("scenario '{}': anchor '{}' invalid at step {}", s.id, anchor, anchor_step));
  }
  const Frame frame = agent_frame(anchor_track, anchor_step);
  Scenario out = s;
  for (auto & track : out.tracks) {
    for (std::size_t i = 0; i < track.points.size(); ++i) {
      track.points[i] = track.valid[i] ? frame.to_local(track.points[i]) : TrajPoint{};
    }
  }
  for (auto & line : out.map) {
    for (auto & p : line.points) {
      p = frame.to_local(p);
    }
  }
  return out;
}

}  // namespace trajssl::scenario
