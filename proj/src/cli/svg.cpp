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

#include "trajssl/cli/commands.hpp"
#include "trajssl/encoder/features.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>

namespace trajssl::cli
{
namespace
{
constexpr const char * kMapColor = "#9e9e9e";
constexpr const char * kHistoryColor = "#000000";
constexpr const char * kFutureColor = "#ff69b4";
constexpr const char * kPredictionColor = "#1e64ff";

struct Canvas
{
  double min_x{std::numeric_limits<double>::max()};
  double min_y{std::numeric_limits<double>::max()};
  double max_x{std::numeric_limits<double>::lowest()};
  double max_y{std::numeric_limits<double>::lowest()};
  std::string body;

  void extend(const scenario::TrajPoint & p)
  {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }

  // y is flipped so the drawing keeps a right-handed orientation.
  void polyline(const std::vector<scenario::TrajPoint> & pts, const char * color, double width)
  {
    if (pts.size() < 2) {
      return;
    }
    std::string coords;
    for (const auto & p : pts) {
      coords += fmt::format("{:.2f},{:.2f} ", p.x, -p.y);
    }
    coords.pop_back();
    body += fmt::format(
      R"(<polyline points="{}" fill="none" stroke="{}" stroke-width="{}" stroke-linecap="round"/>)"
      "\n",
      coords, color, width);
  }
};

std::vector<scenario::TrajPoint> valid_span(const scenario::AgentTrack & t, int begin, int end)
{
  std::vector<scenario::TrajPoint> out;
  for (int s = begin; s < end && s < t.size(); ++s) {
    if (t.valid[s]) {
      out.push_back(t.points[s]);
    }
  }
  return out;
}
}  // namespace

std::string render_svg(const scenario::Scenario & s, const finetune::PredictionSet * prediction)
{
  Canvas c;
  for (const auto & line : s.map) {
    for (const auto & p : line.points) {
      c.extend(p);
    }
    c.polyline(line.points, kMapColor, 0.4);
  }
  const int target = s.target_index();
  for (int k = 0; k < static_cast<int>(s.tracks.size()); ++k) {
    const auto history = valid_span(s.tracks[k], 0, s.T_h);
    for (const auto & p : history) {
      c.extend(p);
    }
    c.polyline(history, kHistoryColor, k == target ? 0.9 : 0.5);
  }
  if (target >= 0) {
    const auto & track = s.tracks[target];
    auto future = valid_span(track, s.T_h - 1, s.T);
    c.polyline(future, kFutureColor, 0.9);
    const scenario::Frame frame = encoder::window_frame(track, 0, s.T_h);
    if (prediction) {
      for (std::size_t k = 0; k < prediction->modes.size(); ++k) {
        std::vector<scenario::TrajPoint> global{frame.origin};
        for (const auto & p : prediction->modes[k]) {
          global.push_back(
            {frame.origin.x + frame.cos_heading * p.x - frame.sin_heading * p.y,
             frame.origin.y + frame.sin_heading * p.x + frame.cos_heading * p.y});
          c.extend(global.back());
        }
        c.polyline(global, kPredictionColor, 0.6);
        c.body += fmt::format(
          R"(<text x="{:.2f}" y="{:.2f}" font-size="2.5" fill="{}">{:.2f}</text>)"
          "\n",
          global.back().x + 0.8, -global.back().y, kPredictionColor, prediction->probs[k]);
      }
    }
  }
  if (c.min_x > c.max_x) {
    c.min_x = c.min_y = 0.0;
    c.max_x = c.max_y = 1.0;
  }
  constexpr double kMargin = 5.0;
  const double w = c.max_x - c.min_x + 2 * kMargin;
  const double h = c.max_y - c.min_y + 2 * kMargin;
  return fmt::format(
    R"(<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.2f} {:.2f} {:.2f} {:.2f}" width="{:.0f}" height="{:.0f}">)"
    "\n<title>{}</title>\n{}</svg>\n",
    c.min_x - kMargin, -c.max_y - kMargin, w, h, std::min(1600.0, 8 * w), std::min(1600.0, 8 * w) * h / w, s.id, c.body);
}

}  // namespace trajssl::cli
