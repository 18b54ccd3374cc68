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

#ifndef TRAJSSL__FINETUNE__METRICS_HPP_
#define TRAJSSL__FINETUNE__METRICS_HPP_

#include "trajssl/scenario/types.hpp"

#include <cstddef>
#include <vector>

namespace trajssl::finetune
{
using Trajectory = std::vector<scenario::TrajPoint>;

/// K candidate futures and their probabilities, in the target agent's frame.
struct PredictionSet
{
  std::vector<Trajectory> modes;
  std::vector<double> probs;
};

struct MetricsConfig
{
  /// Endpoint error above this counts as a miss (meters).
  double miss_threshold{2.0};
  /// Take minADE from the mode with the lowest ADE instead of the minFDE winner.
  bool min_ade_from_best_ade{false};
};

struct CaseMetrics
{
  double ade{0.0};
  double fde{0.0};
  bool miss{false};
  /// Mode with the smallest endpoint error; ties go to the lower index.
  int winner{0};
};

/**
 * @brief Displacement errors of the best of `modes` against `truth`.
 *
 * Only the first truth.size() steps of each mode are compared. Throws ShapeError for an empty mode
 * list, empty truth or a mode shorter than the truth.
 */
CaseMetrics case_metrics(const std::vector<Trajectory> & modes, const Trajectory & truth, const MetricsConfig & cfg = {});

struct MetricsReport
{
  double min_ade{0.0};
  double min_fde{0.0};
  double miss_rate{0.0};
  std::size_t count{0};
};

/// Arithmetic means over cases. Throws EmptyEvaluation.
MetricsReport aggregate(const std::vector<CaseMetrics> & cases);

}  // namespace trajssl::finetune

#endif  // TRAJSSL__FINETUNE__METRICS_HPP_
