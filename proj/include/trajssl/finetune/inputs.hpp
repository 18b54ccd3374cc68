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

#ifndef TRAJSSL__FINETUNE__INPUTS_HPP_
#define TRAJSSL__FINETUNE__INPUTS_HPP_

#include "trajssl/encoder/features.hpp"
#include "trajssl/finetune/metrics.hpp"
#include "trajssl/scenario/types.hpp"

#include <vector>

namespace trajssl::finetune
{
/**
 * @brief Observed window [0, T_h) of every agent plus the target's future, ready for the model.
 */
struct SceneInput
{
  const scenario::Scenario * scenario{nullptr};
  /// All agents with a valid observed step; group 0.
  encoder::WindowBatch window;
  int target_row{0};
  /// Frame of the target at step T_h - 1; predictions live in it.
  scenario::Frame frame;
  /// Valid prefix of the target's future [T_h, T) in `frame`; never empty.
  Trajectory future;
};

/// Throws InvalidScenario when the target is not observed at T_h - 1 or has no valid future step.
SceneInput prepare_scene(const scenario::Scenario & s, int k_map);

/// Scenarios must stay in place while the inputs are used.
std::vector<SceneInput> prepare_scenes(const std::vector<scenario::Scenario> & scenarios, int k_map);

/// Stacks scenes into one window batch, one attention group per scene.
encoder::WindowBatch stack_scenes(const std::vector<const SceneInput *> & scenes, std::vector<int> & target_rows);

}  // namespace trajssl::finetune

#endif  // TRAJSSL__FINETUNE__INPUTS_HPP_
