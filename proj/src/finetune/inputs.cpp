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

#include "trajssl/finetune/inputs.hpp"

#include "trajssl/errors.hpp"

#include <fmt/format.h>

namespace trajssl::finetune
{
SceneInput prepare_scene(const scenario::Scenario & s, int k_map)
{
  const int target = s.target_index();
  if (target < 0) {
    throw InvalidScenario(fmt::format("scenario '{}': target agent missing", s.id));
  }
  const auto & track = s.tracks[target];
  if (!track.valid.at(s.T_h - 1)) {
    throw InvalidScenario(fmt::format("scenario '{}': target unobserved at the last history step", s.id));
  }
  SceneInput in;
  in.scenario = &s;
  const encoder::MapIndex map(s.map);
  std::vector<encoder::AgentWindow> agents;
  const std::vector<int> rows = encoder::append_scene_windows(s, map, 0, s.T_h, 0, agents);
  in.window = encoder::build_window_batch(agents, k_map);
  in.target_row = rows[target];
  in.frame = encoder::window_frame(track, 0, s.T_h);
  for (int step = s.T_h; step < s.T && track.valid[step]; ++step) {
    in.future.push_back(in.frame.to_local(track.points[step]));
  }
  if (in.future.empty()) {
    throw InvalidScenario(fmt::format("scenario '{}': target has no valid future step", s.id));
  }
  return in;
}

std::vector<SceneInput> prepare_scenes(const std::vector<scenario::Scenario> & scenarios, int k_map)
{
  std::vector<SceneInput> out;
  out.reserve(scenarios.size());
  for (const auto & s : scenarios) {
    out.push_back(prepare_scene(s, k_map));
  }
  return out;
}

encoder::WindowBatch stack_scenes(const std::vector<const SceneInput *> & scenes, std::vector<int> & target_rows)
{
  encoder::WindowBatch out;
  target_rows.clear();
  if (scenes.empty()) {
    return out;
  }
  out.horizon = scenes.front()->window.horizon;
  Eigen::Index rows = 0;
  for (const auto * s : scenes) {
    if (s->window.horizon != out.horizon) {
      throw ShapeError("stack_scenes: scenes differ in observed horizon");
    }
    rows += s->window.features.rows();
  }
  out.features.resize(rows, scenes.front()->window.features.cols());
  Eigen::Index cursor = 0;
  for (std::size_t g = 0; g < scenes.size(); ++g) {
    const auto & w = scenes[g]->window;
    target_rows.push_back(out.num_agents() + scenes[g]->target_row);
    out.features.middleRows(cursor, w.features.rows()) = w.features;
    cursor += w.features.rows();
    out.step_valid.insert(out.step_valid.end(), w.step_valid.begin(), w.step_valid.end());
    out.anchor.insert(out.anchor.end(), w.anchor.begin(), w.anchor.end());
    out.group.insert(out.group.end(), w.group.size(), static_cast<int>(g));
  }
  return out;
}

}  // namespace trajssl::finetune
