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

#include "trajssl/encoder/features.hpp"

#include "trajssl/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace trajssl::encoder
{
using scenario::TrajPoint;

void EncoderConfig::validate() const
{
  if (embed_dim < 8 || hidden_dim < 8) {
    throw ShapeError(fmt::format("encoder: embed_dim and hidden_dim must be >= 8 (got {}, {})", embed_dim, hidden_dim));
  }
  if (k_map < 0) {
    throw ShapeError("encoder: k_map must be >= 0");
  }
  if (!(attention_radius >= 0.0)) {
    throw ShapeError("encoder: attention radius must be >= 0");
  }
}

MapIndex::MapIndex(const std::vector<scenario::Polyline> & map, double cell_size) : cell_(cell_size)
{
  for (const auto & line : map) {
    points_.insert(points_.end(), line.points.begin(), line.points.end());
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto cx = static_cast<std::int64_t>(std::floor(points_[i].x / cell_));
    const auto cy = static_cast<std::int64_t>(std::floor(points_[i].y / cell_));
    if (i == 0) {
      min_cx_ = max_cx_ = cx;
      min_cy_ = max_cy_ = cy;
    }
    min_cx_ = std::min(min_cx_, cx);
    max_cx_ = std::max(max_cx_, cx);
    min_cy_ = std::min(min_cy_, cy);
    max_cy_ = std::max(max_cy_, cy);
    cells_[key(cx, cy)].push_back(static_cast<int>(i));
  }
}

void MapIndex::nearest(const TrajPoint & query, int k, std::vector<TrajPoint> & out) const
{
  out.clear();
  if (k <= 0 || points_.empty()) {
    return;
  }
  const auto qx = static_cast<std::int64_t>(std::floor(query.x / cell_));
  const auto qy = static_cast<std::int64_t>(std::floor(query.y / cell_));
  const std::int64_t max_ring = std::max({std::abs(qx - min_cx_), std::abs(qx - max_cx_), std::abs(qy - min_cy_), std::abs(qy - max_cy_)});

  struct Candidate
  {
    double d2;
    int idx;
    bool operator<(const Candidate & o) const { return d2 < o.d2 || (d2 == o.d2 && idx < o.idx); }
  };
  std::vector<Candidate> best;
  best.reserve(static_cast<std::size_t>(k) + 1);
  const auto consider = [&](std::int64_t cx, std::int64_t cy) {
    const auto it = cells_.find(key(cx, cy));
    if (it == cells_.end()) {
      return;
    }
    for (const int idx : it->second) {
      const double dx = points_[idx].x - query.x;
      const double dy = points_[idx].y - query.y;
      const Candidate c{dx * dx + dy * dy, idx};
      if (static_cast<int>(best.size()) < k) {
        best.insert(std::upper_bound(best.begin(), best.end(), c), c);
      } else if (c < best.back()) {
        best.pop_back();
        best.insert(std::upper_bound(best.begin(), best.end(), c), c);
      }
    }
  };

  for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
    if (ring == 0) {
      consider(qx, qy);
    } else {
      for (std::int64_t d = -ring; d <= ring; ++d) {
        consider(qx + d, qy - ring);
        consider(qx + d, qy + ring);
      }
      for (std::int64_t d = -ring + 1; d <= ring - 1; ++d) {
        consider(qx - ring, qy + d);
        consider(qx + ring, qy + d);
      }
    }
    // Every point in ring r + 1 is at least r cells away from the query.
    if (static_cast<int>(best.size()) == k) {
      const double reach = static_cast<double>(ring) * cell_;
      if (best.back().d2 <= reach * reach) {
        break;
      }
    }
  }
  for (const auto & c : best) {
    out.push_back(points_[c.idx]);
  }
}

scenario::Frame window_frame(const scenario::AgentTrack & agent, int start, int horizon)
{
  int anchor = start + horizon - 1;
  while (anchor > start && !agent.valid.at(anchor)) {
    --anchor;
  }
  if (!agent.valid.at(anchor)) {
    return {};
  }
  return anchor > start ? scenario::agent_frame(agent, anchor) : scenario::Frame{agent.points[anchor], 1.0, 0.0};
}

void featurize_window(
  const scenario::Scenario & s, const MapIndex & map, int track, int start, int horizon, int k_map, double * out)
{
  const auto & agent = s.tracks.at(track);
  const scenario::Frame frame = window_frame(agent, start, horizon);
  const int width = 3 + 2 * k_map;
  std::vector<TrajPoint> nearest;
  TrajPoint prev_local{};
  for (int i = 0; i < horizon; ++i) {
    const int step = start + i;
    double * row = out + static_cast<std::ptrdiff_t>(i) * width;
    std::fill(row, row + width, 0.0);
    const bool valid = agent.valid[step];
    if (!valid) {
      continue;
    }
    const TrajPoint & p = agent.points[step];
    const TrajPoint local = frame.to_local(p);
    if (i > 0 && agent.valid[step - 1]) {
      row[0] = local.x - prev_local.x;
      row[1] = local.y - prev_local.y;
    }
    prev_local = local;
    row[2] = 1.0;
    map.nearest(p, k_map, nearest);
    for (std::size_t j = 0; j < nearest.size(); ++j) {
      const TrajPoint off = frame.rotate({nearest[j].x - p.x, nearest[j].y - p.y});
      row[3 + 2 * j] = off.x;
      row[4 + 2 * j] = off.y;
    }
  }
}

std::vector<double> featurize_window(
  const scenario::Scenario & s, const MapIndex & map, int track, int start, int horizon, int k_map)
{
  std::vector<double> out(static_cast<std::size_t>(horizon) * (3 + 2 * k_map));
  featurize_window(s, map, track, start, horizon, k_map, out.data());
  return out;
}

WindowBatch build_window_batch(const std::vector<AgentWindow> & agents, int k_map)
{
  WindowBatch batch;
  const int width = 3 + 2 * k_map;
  if (agents.empty()) {
    batch.features.resize(0, width);
    return batch;
  }
  batch.horizon = agents.front().horizon;
  const auto n = static_cast<Eigen::Index>(agents.size());
  batch.features.resize(n * batch.horizon, width);
  batch.step_valid.resize(static_cast<std::size_t>(n * batch.horizon));
  for (Eigen::Index a = 0; a < n; ++a) {
    const AgentWindow & w = agents[a];
    if (w.horizon != batch.horizon) {
      throw ShapeError("window batch mixes horizons");
    }
    featurize_window(*w.scenario, *w.map, w.track, w.start, w.horizon, k_map, batch.features.row(a * batch.horizon).data());
    const auto & track = w.scenario->tracks[w.track];
    for (int i = 0; i < w.horizon; ++i) {
      batch.step_valid[a * batch.horizon + i] = track.valid[w.start + i] ? 1 : 0;
    }
    batch.group.push_back(w.group);
    batch.anchor.push_back(window_frame(track, w.start, w.horizon).origin);
  }
  return batch;
}

std::vector<int> append_scene_windows(
  const scenario::Scenario & s, const MapIndex & map, int start, int horizon, int group,
  std::vector<AgentWindow> & agents)
{
  std::vector<int> rows(s.tracks.size(), -1);
  for (std::size_t k = 0; k < s.tracks.size(); ++k) {
    const auto & valid = s.tracks[k].valid;
    if (std::find(valid.begin() + start, valid.begin() + start + horizon, true) != valid.begin() + start + horizon) {
      rows[k] = static_cast<int>(agents.size());
      agents.push_back({&s, &map, static_cast<int>(k), start, horizon, group});
    }
  }
  return rows;
}

const MapIndex & MapCache::get(const scenario::Scenario & s)
{
  auto it = cache_.find(&s);
  if (it == cache_.end()) {
    it = cache_.emplace(&s, MapIndex(s.map)).first;
  }
  return it->second;
}

}  // namespace trajssl::encoder
