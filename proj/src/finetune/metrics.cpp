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

#include "trajssl/finetune/metrics.hpp"

#include "trajssl/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace trajssl::finetune
{
namespace
{
double distance(const scenario::TrajPoint & a, const scenario::TrajPoint & b)
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

double mean_distance(const Trajectory & mode, const Trajectory & truth)
{
  double total = 0.0;
  for (std::size_t s = 0; s < truth.size(); ++s) {
    total += distance(mode[s], truth[s]);
  }
  return total / static_cast<double>(truth.size());
}
}  // namespace

CaseMetrics case_metrics(const std::vector<Trajectory> & modes, const Trajectory & truth, const MetricsConfig & cfg)
{
  if (modes.empty() || truth.empty()) {
    throw ShapeError("metrics: need at least one mode and one ground-truth step");
  }
  for (const auto & m : modes) {
    if (m.size() < truth.size()) {
      throw ShapeError(fmt::format("metrics: mode has {} steps, ground truth {}", m.size(), truth.size()));
    }
  }
  const std::size_t end = truth.size() - 1;
  CaseMetrics out;
  out.fde = distance(modes[0][end], truth[end]);
  for (std::size_t k = 1; k < modes.size(); ++k) {
    const double fde = distance(modes[k][end], truth[end]);
    if (fde < out.fde) {
      out.fde = fde;
      out.winner = static_cast<int>(k);
    }
  }
  if (cfg.min_ade_from_best_ade) {
    out.ade = mean_distance(modes[0], truth);
    for (std::size_t k = 1; k < modes.size(); ++k) {
      out.ade = std::min(out.ade, mean_distance(modes[k], truth));
    }
  } else {
    out.ade = mean_distance(modes[out.winner], truth);
  }
  out.miss = out.fde > cfg.miss_threshold;
  return out;
}

MetricsReport aggregate(const std::vector<CaseMetrics> & cases)
{
  if (cases.empty()) {
    throw EmptyEvaluation("metrics: no evaluation cases");
  }
  MetricsReport r;
  double misses = 0.0;
  for (const auto & c : cases) {
    r.min_ade += c.ade;
    r.min_fde += c.fde;
    misses += c.miss ? 1.0 : 0.0;
  }
  const auto n = static_cast<double>(cases.size());
  r.min_ade /= n;
  r.min_fde /= n;
  r.miss_rate = misses / n;
  r.count = cases.size();
  return r;
}

}  // namespace trajssl::finetune
