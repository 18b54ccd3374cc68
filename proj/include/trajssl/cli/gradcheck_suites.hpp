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

#ifndef TRAJSSL__CLI__GRADCHECK_SUITES_HPP_
#define TRAJSSL__CLI__GRADCHECK_SUITES_HPP_

#include "trajssl/scenario/types.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace trajssl::cli
{
struct SuiteResult
{
  std::string name;
  /// Largest relative error over parameter and input gradients.
  double max_rel_error{0.0};
  /// Number of scalar entries compared.
  std::size_t probes{0};
  bool passed{false};
};

/// Finite-difference step used by every suite.
inline constexpr double kGradCheckStep = 1e-5;

/**
 * @brief Central-difference checks in 64-bit of every differentiable component.
 *
 * Covers linear, batch norm (train and eval), layer norm, masked attention, the reference
 * encoder, projector, predictor and trajectory decoder heads, the contrastive and reconstruction
 * losses, the combined pre-training objective on a 3-agent batch and the fine-tuning objective on
 * a 2-scenario batch.
 */
std::vector<SuiteResult> run_gradcheck_suites(double tolerance = 1e-5);

/**
 * @brief Small deterministic scenario: straight parallel lanes, `agents` tracks all valid.
 *
 * Used by the composite suites and tests.
 */
scenario::Scenario toy_scenario(std::uint64_t seed, int agents, int T_h, int T_f);

}  // namespace trajssl::cli

#endif  // TRAJSSL__CLI__GRADCHECK_SUITES_HPP_
