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

#include "trajssl/ssl/recon_target.hpp"

#include "trajssl/encoder/features.hpp"
#include "trajssl/errors.hpp"

#include <fmt/format.h>

namespace trajssl::ssl
{
std::string_view to_string(ReconTarget target) noexcept
{
  switch (target) {
    case ReconTarget::kInputWindow:
      return "input_window";
    case ReconTarget::kEntireScenario:
      return "entire_scenario";
    case ReconTarget::kComplementOfInput:
      return "complement_of_input";
    case ReconTarget::kOtherWindow:
      return "other_window";
  }
  return "other_window";
}

ReconTarget recon_target_from_string(std::string_view name)
{
  for (const auto t : {ReconTarget::kInputWindow, ReconTarget::kEntireScenario, ReconTarget::kComplementOfInput,
                       ReconTarget::kOtherWindow}) {
    if (to_string(t) == name) {
      return t;
    }
  }
  throw ParseError(fmt::format("unknown reconstruction target '{}'", name));
}

std::vector<int> recon_steps(ReconTarget target, int T, int t, int t_prime, int T_h)
{
  std::vector<int> steps;
  switch (target) {
    case ReconTarget::kInputWindow:
      for (int s = t; s < t + T_h; ++s) {
        steps.push_back(s);
      }
      break;
    case ReconTarget::kEntireScenario:
      for (int s = 0; s < T; ++s) {
        steps.push_back(s);
      }
      break;
    case ReconTarget::kComplementOfInput:
      for (int s = 0; s < T; ++s) {
        if (s < t || s >= t + T_h) {
          steps.push_back(s);
        }
      }
      break;
    case ReconTarget::kOtherWindow:
      for (int s = t_prime; s < t_prime + T_h; ++s) {
        steps.push_back(s);
      }
      break;
  }
  return steps;
}

int recon_length(ReconTarget target, int T, int T_h)
{
  switch (target) {
    case ReconTarget::kEntireScenario:
      return T;
    case ReconTarget::kComplementOfInput:
      return T - T_h;
    default:
      return T_h;
  }
}

ReconSample select_recon_target(const sampler::SubScenarioPair & pair, int track, ReconTarget target)
{
  const scenario::Scenario & s = pair.scenario();
  const auto & agent = s.tracks.at(track);
  const scenario::Frame frame = encoder::window_frame(agent, pair.window_a.start, pair.window_a.horizon);
  ReconSample out;
  for (const int step : recon_steps(target, s.T, pair.window_a.start, pair.window_b.start, pair.window_a.horizon)) {
    const bool valid = agent.valid[step];
    out.points.push_back(valid ? frame.to_local(agent.points[step]) : scenario::TrajPoint{});
    out.valid.push_back(valid ? 1 : 0);
  }
  return out;
}

}  // namespace trajssl::ssl
