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

#include "trajssl/sampler/pair_sampler.hpp"

#include "trajssl/errors.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cstdlib>

namespace trajssl::sampler
{
using scenario::Scenario;

namespace
{
constexpr int kEligibilityRetries = 8;

/// Number of t' with |t' - t| >= T_h in [0, max_start].
int feasible_count(int t, int T_h, int max_start)
{
  const int below = t - T_h >= 0 ? t - T_h + 1 : 0;
  const int above = t + T_h <= max_start ? max_start - (t + T_h) + 1 : 0;
  return below + above;
}

/// The k-th feasible t' for start t, in increasing order.
int kth_feasible(int t, int T_h, int k)
{
  const int below = t - T_h >= 0 ? t - T_h + 1 : 0;
  return k < below ? k : t + T_h + (k - below);
}

}  // namespace

std::vector<int> eligible_agents(const Scenario & s, int t, int t_prime, int T_h)
{
  std::vector<int> out;
  for (std::size_t i = 0; i < s.tracks.size(); ++i) {
    const auto & track = s.tracks[i];
    if (track.valid_over(t, t + T_h) && track.valid_over(t_prime, t_prime + T_h)) {
      out.push_back(static_cast<int>(i));
    }
  }
  return out;
}

SubScenarioPair sample_pair(const Scenario & s, int T_h, Rng & rng)
{
  if (T_h < 1 || s.T < 2 * T_h) {
    throw InfeasibleHorizon(fmt::format("scenario '{}': T={} < 2*T_h={}", s.id, s.T, 2 * T_h));
  }
  const int max_start = s.T - T_h;
  const auto make = [&](int t, int t_prime, std::vector<int> eligible) {
    return SubScenarioPair{{&s, t, T_h}, {&s, t_prime, T_h}, std::move(eligible)};
  };

  for (int attempt = 0; attempt < kEligibilityRetries; ++attempt) {
    int t = 0;
    int count = 0;
    do {
      t = static_cast<int>(rng.uniform_int(0, max_start));
      count = feasible_count(t, T_h, max_start);
    } while (count == 0);
    const int t_prime = kth_feasible(t, T_h, static_cast<int>(rng.uniform_int(0, count - 1)));
    auto eligible = eligible_agents(s, t, t_prime, T_h);
    if (!eligible.empty()) {
      return make(t, t_prime, std::move(eligible));
    }
  }

  std::vector<std::pair<int, int>> usable;
  for (int t = 0; t <= max_start; ++t) {
    for (int tp = 0; tp <= max_start; ++tp) {
      if (std::abs(t - tp) >= T_h && !eligible_agents(s, t, tp, T_h).empty()) {
        usable.emplace_back(t, tp);
      }
    }
  }
  if (usable.empty()) {
    throw PairRejected(fmt::format("scenario '{}': no feasible window pair has an eligible agent", s.id));
  }
  const auto [t, tp] = usable[rng.uniform_int(0, static_cast<std::int64_t>(usable.size()) - 1)];
  return make(t, tp, eligible_agents(s, t, tp, T_h));
}

Batch make_batch(const DataBank & bank, const std::vector<std::size_t> & indices, Rng & rng, std::size_t * rejected)
{
  Batch batch;
  for (const std::size_t idx : indices) {
    const Scenario & s = bank.scenarios.at(idx);
    try {
      batch.pairs.push_back(sample_pair(s, bank.standard.T_h, rng));
    } catch (const PairRejected & e) {
      spdlog::debug("skipped: {}", e.what());
      if (rejected) {
        ++*rejected;
      }
    }
  }
  for (std::size_t p = 0; p < batch.pairs.size(); ++p) {
    for (const int track : batch.pairs[p].eligible) {
      batch.agents.push_back({static_cast<int>(p), track});
    }
  }
  return batch;
}

void EpochOrder::start_epoch(std::uint64_t epoch)
{
  order_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    order_[i] = i;
  }
  Rng rng = Rng::derive(seed_, epoch);
  rng.shuffle(order_);
  cursor_ = 0;
}

std::optional<std::vector<std::size_t>> EpochOrder::next(std::size_t size)
{
  if (cursor_ >= order_.size() || size == 0) {
    return std::nullopt;
  }
  const std::size_t end = std::min(order_.size(), cursor_ + size);
  std::vector<std::size_t> chunk(order_.begin() + static_cast<std::ptrdiff_t>(cursor_), order_.begin() + static_cast<std::ptrdiff_t>(end));
  cursor_ = end;
  return chunk;
}

BatchSampler::BatchSampler(const DataBank & bank, std::size_t batch_size, std::uint64_t seed)
: bank_(bank), batch_size_(batch_size), seed_(seed), order_(bank.size(), seed), rng_(Rng::derive(seed, 0x70616972ULL))
{
  if (batch_size == 0) {
    throw InvalidScenario("batch size must be >= 1");
  }
}

void BatchSampler::start_epoch(std::uint64_t epoch)
{
  order_.start_epoch(epoch);
  rng_ = Rng::derive(seed_ ^ 0x70616972ULL, epoch);
}

std::optional<Batch> BatchSampler::next()
{
  while (auto chunk = order_.next(batch_size_)) {
    Batch batch = make_batch(bank_, *chunk, rng_, &rejected_);
    if (!batch.pairs.empty()) {
      return batch;
    }
  }
  return std::nullopt;
}

}  // namespace trajssl::sampler
