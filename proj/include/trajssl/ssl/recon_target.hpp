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

#ifndef TRAJSSL__SSL__RECON_TARGET_HPP_
#define TRAJSSL__SSL__RECON_TARGET_HPP_

#include "trajssl/sampler/pair_sampler.hpp"
#include "trajssl/scenario/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace trajssl::ssl
{
enum class ReconTarget { kInputWindow, kEntireScenario, kComplementOfInput, kOtherWindow };

std::string_view to_string(ReconTarget target) noexcept;
/// "input_window", "entire_scenario", "complement_of_input" or "other_window"; throws ParseError.
ReconTarget recon_target_from_string(std::string_view name);

/// Step indices reconstructed for a pair with starts (t, t') in a scenario of horizon T.
std::vector<int> recon_steps(ReconTarget target, int T, int t, int t_prime, int T_h);

/// Number of reconstructed steps, which is the same for every pair of a bank.
int recon_length(ReconTarget target, int T, int T_h);

struct ReconSample
{
  /// Positions in the window_a frame of the agent; (0, 0) at invalid steps.
  std::vector<scenario::TrajPoint> points;
  std::vector<std::uint8_t> valid;
};

/// Ground truth for `track` of `pair`, expressed in the same frame as its window_a features.
ReconSample select_recon_target(const sampler::SubScenarioPair & pair, int track, ReconTarget target);

}  // namespace trajssl::ssl

#endif  // TRAJSSL__SSL__RECON_TARGET_HPP_
