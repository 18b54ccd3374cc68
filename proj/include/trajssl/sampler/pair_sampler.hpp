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

#ifndef TRAJSSL__SAMPLER__PAIR_SAMPLER_HPP_
#define TRAJSSL__SAMPLER__PAIR_SAMPLER_HPP_

#include "trajssl/rng.hpp"
#include "trajssl/sampler/bank.hpp"
#include "trajssl/scenario/types.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace trajssl::sampler
{
/// A contiguous window [start, start + horizon) of one scenario.
struct SubScenario
{
  const scenario::Scenario * scenario{nullptr};
  int start{0};
  int horizon{0};

  int end() const noexcept { return start + horizon; }
  int last() const noexcept { return start + horizon - 1; }
};

/**
 * @brief Two non-overlapping windows of one scenario.
 *
 * `window_a` (start t) feeds the online branch and the reconstruction input; `window_b` (start
 * t') feeds the momentum branch. `eligible` holds track indices valid at every step of both.
 */
struct SubScenarioPair
{
  SubScenario window_a;
  SubScenario window_b;
  std::vector<int> eligible;

  const scenario::Scenario & scenario() const noexcept { return *window_a.scenario; }
};

/// Track indices valid over both [t, t+T_h) and [t', t'+T_h).
std::vector<int> eligible_agents(const scenario::Scenario & s, int t, int t_prime, int T_h);

/**
 * @brief Draws (t, t') with |t - t'| >= T_h inside [0, T - T_h].
 *
 * t is uniform over the starts whose feasible set is non-empty (rejection on t), t' uniform over
 * its feasible set. Draws without any eligible agent are retried a few times, after which the
 * draw falls back to a uniform choice among the feasible pairs that have eligible agents.
 *
 * Throws InfeasibleHorizon when T < 2 T_h and PairRejected when no feasible pair has an eligible
 * agent.
 */
SubScenarioPair sample_pair(const scenario::Scenario & s, int T_h, Rng & rng);

/**
 * @brief Flattened agent ordering of a batch.
 *
 * Row k of every embedding matrix corresponds to `agents[k]`.
 */
struct AgentRef
{
  int pair{0};
  int track{0};
};

struct Batch
{
  std::vector<SubScenarioPair> pairs;
  std::vector<AgentRef> agents;

  int num_agents() const noexcept { return static_cast<int>(agents.size()); }
};

/// Samples one pair per listed scenario, skipping those that raise PairRejected.
Batch make_batch(
  const DataBank & bank, const std::vector<std::size_t> & indices, Rng & rng,
  std::size_t * rejected = nullptr);

/**
 * @brief Per-epoch permutation of [0, n) served in consecutive chunks.
 */
class EpochOrder
{
public:
  EpochOrder(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) {}

  /// Reshuffles with a stream derived from (seed, epoch).
  void start_epoch(std::uint64_t epoch);

  /// Next chunk of at most `size` indices; nullopt once the epoch is exhausted.
  std::optional<std::vector<std::size_t>> next(std::size_t size);

  std::size_t batches_per_epoch(std::size_t size) const noexcept { return size == 0 ? 0 : (n_ + size - 1) / size; }

private:
  std::size_t n_;
  std::uint64_t seed_;
  std::vector<std::size_t> order_;
  std::size_t cursor_{0};
};

/**
 * @brief Epoch-wise batch stream over a bank.
 */
class BatchSampler
{
public:
  BatchSampler(const DataBank & bank, std::size_t batch_size, std::uint64_t seed);

  void start_epoch(std::uint64_t epoch);

  /// Next batch, or nullopt at the end of the epoch. The last batch may be short.
  std::optional<Batch> next();

  std::size_t batches_per_epoch() const noexcept { return order_.batches_per_epoch(batch_size_); }
  std::size_t rejected_pairs() const noexcept { return rejected_; }

private:
  const DataBank & bank_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  EpochOrder order_;
  Rng rng_;
  std::size_t rejected_{0};
};

}  // namespace trajssl::sampler

#endif  // TRAJSSL__SAMPLER__PAIR_SAMPLER_HPP_
