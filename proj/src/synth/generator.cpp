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

#include "trajssl/synth/generator.hpp"

#include "trajssl/errors.hpp"
#include "trajssl/rng.hpp"
#include "trajssl/scenario/interchange.hpp"
#include "trajssl/scenario/standardize.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <thread>

namespace trajssl::synth
{
namespace
{
using scenario::AgentTrack;
using scenario::AgentType;
using scenario::Polyline;
using scenario::PolylineTag;
using scenario::Scenario;
using scenario::TrajPoint;

constexpr double kLaneWidth = 3.5;
constexpr double kDenseStep = 0.25;
constexpr double kMaxLaneLength = 420.0;
constexpr double kMaxCenterOffset = 10.0;

/// Dense centerline with cumulative arc length.
struct Lane
{
  std::vector<TrajPoint> points;
  std::vector<double> s;

  double length() const { return s.back(); }

  TrajPoint at(double arc) const
  {
    arc = std::clamp(arc, 0.0, length());
    const auto it = std::upper_bound(s.begin(), s.end(), arc);
    const std::size_t hi = std::min<std::size_t>(std::distance(s.begin(), it), s.size() - 1);
    const std::size_t lo = hi == 0 ? 0 : hi - 1;
    const double span = s[hi] - s[lo];
    const double u = span > 0.0 ? (arc - s[lo]) / span : 0.0;
    return {points[lo].x + u * (points[hi].x - points[lo].x), points[lo].y + u * (points[hi].y - points[lo].y)};
  }

  /// Arc length of the closest dense vertex.
  double project(const TrajPoint & p) const
  {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d = std::hypot(points[i].x - p.x, points[i].y - p.y);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return s[best];
  }
};

Lane make_lane(std::vector<TrajPoint> points)
{
  Lane lane;
  lane.points = std::move(points);
  lane.s.resize(lane.points.size());
  lane.s[0] = 0.0;
  for (std::size_t i = 1; i < lane.points.size(); ++i) {
    const auto & a = lane.points[i - 1];
    const auto & b = lane.points[i];
    lane.s[i] = lane.s[i - 1] + std::hypot(b.x - a.x, b.y - a.y);
  }
  return lane;
}

/// Offsets a dense polyline along its left normal.
std::vector<TrajPoint> offset_left(const std::vector<TrajPoint> & pts, double offset)
{
  std::vector<TrajPoint> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto & a = pts[i == 0 ? 0 : i - 1];
    const auto & b = pts[i + 1 < pts.size() ? i + 1 : i];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double n = std::hypot(dx, dy);
    out[i] = {pts[i].x - offset * dy / n, pts[i].y + offset * dx / n};
  }
  return out;
}

struct RoadLayout
{
  std::vector<Lane> lanes;
  std::vector<std::vector<TrajPoint>> boundaries;
};

/// Centerlines in a local frame: the road runs along +x with its midpoint at the origin.
RoadLayout make_road(LaneLayout layout, double length, Rng & rng)
{
  const int n = static_cast<int>(rng.uniform_int(2, 3));
  const int steps = static_cast<int>(std::ceil(length / kDenseStep));
  RoadLayout road;
  std::vector<std::vector<TrajPoint>> centers;
  switch (layout) {
    case LaneLayout::kStraight: {
      for (int k = 0; k < n; ++k) {
        const double lateral = (k - 0.5 * (n - 1)) * kLaneWidth;
        std::vector<TrajPoint> pts;
        for (int i = 0; i <= steps; ++i) {
          pts.push_back({-0.5 * length + i * length / steps, lateral});
        }
        centers.push_back(std::move(pts));
      }
      break;
    }
    case LaneLayout::kArc: {
      const double radius = rng.uniform(100.0, 220.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
      for (int k = 0; k < n; ++k) {
        const double lateral = (k - 0.5 * (n - 1)) * kLaneWidth;
        // Circle centered at (0, radius); the lane passes through (0, lateral) heading +x.
        const double r = radius - lateral;
        std::vector<TrajPoint> pts;
        for (int i = 0; i <= steps; ++i) {
          const double arc = -0.5 * length + i * length / steps;
          const double phi = arc / radius;
          pts.push_back({r * std::sin(phi), radius - r * std::cos(phi)});
        }
        centers.push_back(std::move(pts));
      }
      break;
    }
    case LaneLayout::kMerge: {
      const double right = -0.5 * (n - 1) * kLaneWidth;
      for (int k = 0; k < n; ++k) {
        std::vector<TrajPoint> pts;
        for (int i = 0; i <= steps; ++i) {
          pts.push_back({-0.5 * length + i * length / steps, right + k * kLaneWidth});
        }
        centers.push_back(std::move(pts));
      }
      // On-ramp: a cosine taper from a lateral gap onto the rightmost lane, then shared with it.
      const double gap = rng.uniform(6.0, 12.0);
      const double taper_end = rng.uniform(-0.2, 0.1) * length;
      std::vector<TrajPoint> ramp;
      for (int i = 0; i <= steps; ++i) {
        const double x = -0.5 * length + i * length / steps;
        const double u = std::clamp((x + 0.5 * length) / (taper_end + 0.5 * length), 0.0, 1.0);
        const double w = 0.5 * (1.0 + std::cos(std::numbers::pi * u));
        ramp.push_back({x, right - gap * w});
      }
      centers.insert(centers.begin(), std::move(ramp));
      break;
    }
  }
  road.boundaries.push_back(offset_left(centers.back(), 0.5 * kLaneWidth));
  road.boundaries.push_back(offset_left(centers.front(), -0.5 * kLaneWidth));
  for (auto & c : centers) {
    road.lanes.push_back(make_lane(std::move(c)));
  }
  return road;
}

double wrap_angle(double a)
{
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a < -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

AgentType sample_type(Rng & rng)
{
  const double u = rng.uniform();
  if (u < 0.85) return AgentType::kVehicle;
  if (u < 0.95) return AgentType::kCyclist;
  return AgentType::kUnknown;
}

double travel_bound(const DatasetProfile & p)
{
  return (1.0 + kSpeedNoiseClip) * p.max_speed * (p.T() - 1) / p.sample_rate_hz;
}

}  // namespace

void DatasetProfile::validate() const
{
  if (name.empty()) throw InvalidProfile("profile name is empty");
  if (!(sample_rate_hz > 0.0)) throw InvalidProfile(fmt::format("{}: sample rate must be > 0", name));
  if (T_h < 2 || T_f < 1) throw InvalidProfile(fmt::format("{}: need T_h >= 2 and T_f >= 1", name));
  if (!(map_resolution > 0.0)) throw InvalidProfile(fmt::format("{}: map resolution must be > 0", name));
  if (min_agents < 1 || max_agents < min_agents) {
    throw InvalidProfile(fmt::format("{}: agent count range is empty", name));
  }
  if (!(min_speed >= 0.0) || max_speed < min_speed) {
    throw InvalidProfile(fmt::format("{}: speed range is empty", name));
  }
  if (!(dropout_prob >= 0.0 && dropout_prob < 1.0)) {
    throw InvalidProfile(fmt::format("{}: dropout_prob must be in [0, 1)", name));
  }
  if (!(lane_change_prob >= 0.0 && lane_change_prob <= 1.0)) {
    throw InvalidProfile(fmt::format("{}: lane_change_prob must be in [0, 1]", name));
  }
  if (lane_layouts.empty()) throw InvalidProfile(fmt::format("{}: no lane layouts", name));
  if (travel_bound(*this) + 80.0 > kMaxLaneLength) {
    throw InvalidProfile(fmt::format("{}: speed/horizon would leave the {} m box", name, 2 * kBoxHalfWidth));
  }
}

std::optional<DatasetProfile> stock_profile(std::string_view name)
{
  DatasetProfile p;
  p.name = std::string(name);
  p.sample_rate_hz = 10.0;
  if (name == "argo-like") {
    p.T_h = 20;
    p.T_f = 30;
    p.map_resolution = 1.0;
    p.min_agents = 4;
    p.max_agents = 8;
    p.min_speed = 4.0;
    p.max_speed = 14.0;
    p.dropout_prob = 0.2;
  } else if (name == "argo2-like") {
    p.T_h = 50;
    p.T_f = 60;
    p.map_resolution = 0.5;
    p.min_agents = 3;
    p.max_agents = 7;
    p.min_speed = 3.0;
    p.max_speed = 12.0;
    p.dropout_prob = 0.3;
  } else if (name == "womd-like") {
    p.T_h = 10;
    p.T_f = 80;
    p.map_resolution = 2.5;
    p.min_agents = 4;
    p.max_agents = 9;
    p.min_speed = 5.0;
    p.max_speed = 15.0;
    p.dropout_prob = 0.25;
  } else {
    return std::nullopt;
  }
  return p;
}

std::vector<std::string> stock_profile_names()
{
  return {"argo-like", "argo2-like", "womd-like"};
}

std::uint64_t scenario_seed(std::uint64_t bank_seed, std::uint64_t index) noexcept
{
  return Rng::derive(bank_seed, index).key();
}

Scenario gen_scenario(const DatasetProfile & profile, std::uint64_t seed)
{
  profile.validate();
  Rng rng(seed);
  const double dt = 1.0 / profile.sample_rate_hz;
  const int T = profile.T();
  const double travel = travel_bound(profile);
  const double length = std::min(kMaxLaneLength, travel + 80.0);

  const auto layout = profile.lane_layouts[rng.uniform_int(0, static_cast<std::int64_t>(profile.lane_layouts.size()) - 1)];
  RoadLayout road = make_road(layout, length, rng);

  // Place the local road frame at a random pose near the origin.
  const double theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
  const TrajPoint offset{rng.uniform(-kMaxCenterOffset, kMaxCenterOffset), rng.uniform(-kMaxCenterOffset, kMaxCenterOffset)};
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const auto place = [&](const TrajPoint & p) {
    return TrajPoint{offset.x + c * p.x - s * p.y, offset.y + s * p.x + c * p.y};
  };
  for (auto & lane : road.lanes) {
    for (auto & p : lane.points) p = place(p);
  }
  for (auto & b : road.boundaries) {
    for (auto & p : b) p = place(p);
  }

  Scenario out;
  out.id = fmt::format("{}-{:016x}", profile.name, seed);
  out.source = profile.name;
  out.sample_rate_hz = profile.sample_rate_hz;
  out.T = T;
  out.T_h = profile.T_h;
  out.T_f = profile.T_f;
  out.native_T = T;

  for (const auto & lane : road.lanes) {
    out.map.push_back(scenario::resample_polyline({PolylineTag::kLane, lane.points}, profile.map_resolution));
  }
  for (const auto & b : road.boundaries) {
    out.map.push_back(scenario::resample_polyline({PolylineTag::kBoundary, b}, profile.map_resolution));
  }

  const int n_agents = static_cast<int>(rng.uniform_int(profile.min_agents, profile.max_agents));
  const int target = static_cast<int>(rng.uniform_int(0, n_agents - 1));
  const int n_lanes = static_cast<int>(road.lanes.size());
  for (int a = 0; a < n_agents; ++a) {
    AgentTrack track;
    track.id = fmt::format("a{}", a);
    track.type = sample_type(rng);
    track.points.resize(T);
    track.valid.assign(T, true);

    int lane_idx = static_cast<int>(rng.uniform_int(0, n_lanes - 1));
    const double nominal = rng.uniform(profile.min_speed, profile.max_speed);
    const double own_travel = (1.0 + kSpeedNoiseClip) * nominal * (T - 1) * dt;
    const double s_max = std::max(5.0, road.lanes[lane_idx].length() - own_travel - 40.0);
    double arc = rng.uniform(5.0, s_max);
    const int change_step = rng.bernoulli(profile.lane_change_prob) ? static_cast<int>(rng.uniform_int(1, T - 1)) : -1;

    TrajPoint pos = road.lanes[lane_idx].at(arc);
    const TrajPoint ahead = road.lanes[lane_idx].at(arc + 1.0);
    double heading = std::atan2(ahead.y - pos.y, ahead.x - pos.x);
    for (int k = 0; k < T; ++k) {
      if (k == change_step && n_lanes > 1) {
        lane_idx = lane_idx == 0 ? 1 : (lane_idx == n_lanes - 1 ? lane_idx - 1 : lane_idx + (rng.bernoulli(0.5) ? 1 : -1));
        arc = road.lanes[lane_idx].project(pos);
      }
      track.points[k] = pos;
      const double noise = std::clamp(kSpeedNoiseSigma * rng.normal(), -kSpeedNoiseClip, kSpeedNoiseClip);
      const double ds = nominal * (1.0 + noise) * dt;
      const Lane & lane = road.lanes[lane_idx];
      const double lookahead = std::max(6.0, 1.5 * nominal);
      const TrajPoint goal = lane.at(arc + lookahead);
      const double alpha = wrap_angle(std::atan2(goal.y - pos.y, goal.x - pos.x) - heading);
      heading = wrap_angle(heading + 2.0 * std::sin(alpha) / lookahead * ds);
      pos = {pos.x + ds * std::cos(heading), pos.y + ds * std::sin(heading)};
      arc += ds;
    }

    if (a != target && rng.bernoulli(profile.dropout_prob)) {
      const int begin = static_cast<int>(rng.uniform_int(0, T - 1));
      const int span = static_cast<int>(rng.uniform_int(1, std::max(1, T / 3)));
      for (int k = begin; k < std::min(T, begin + span); ++k) {
        track.valid[k] = false;
        track.points[k] = {};
      }
    }
    out.tracks.push_back(std::move(track));
  }
  out.target_agent = out.tracks[target].id;
  return out;
}

std::size_t gen_bank(
  const std::vector<DatasetProfile> & profiles, const std::vector<std::size_t> & counts,
  std::uint64_t seed, const std::filesystem::path & out, int threads)
{
  if (profiles.size() != counts.size()) {
    throw InvalidProfile("profiles and counts differ in length");
  }
  for (const auto & p : profiles) {
    p.validate();
  }
  struct Job
  {
    const DatasetProfile * profile;
    std::uint64_t index;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < profiles.size(); ++p) {
    for (std::size_t i = 0; i < counts[p]; ++i) {
      jobs.push_back({&profiles[p], jobs.size()});
    }
  }

  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw IoError(fmt::format("cannot open '{}' for writing", out.string()));
  }

  // Records are produced in chunks and written in index order.
  const std::size_t workers = static_cast<std::size_t>(std::max(1, threads));
  const std::size_t chunk = 256;
  std::vector<std::string> records;
  for (std::size_t begin = 0; begin < jobs.size(); begin += chunk) {
    const std::size_t end = std::min(jobs.size(), begin + chunk);
    records.assign(end - begin, {});
    const auto work = [&](std::size_t w) {
      for (std::size_t j = begin + w; j < end; j += workers) {
        Scenario s = gen_scenario(*jobs[j].profile, scenario_seed(seed, jobs[j].index));
        s.id = fmt::format("{}-{:06d}", jobs[j].profile->name, jobs[j].index);
        records[j - begin] = scenario::to_record(s);
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back(work, w);
      }
    }
    for (const auto & r : records) {
      file << r << '\n';
    }
  }
  if (!file) {
    throw IoError(fmt::format("write to '{}' failed", out.string()));
  }
  return jobs.size();
}

}  // namespace trajssl::synth
