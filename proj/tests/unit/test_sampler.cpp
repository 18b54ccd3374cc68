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

#include "test_util.hpp"

#include "trajssl/errors.hpp"
#include "trajssl/sampler/bank.hpp"
#include "trajssl/sampler/pair_sampler.hpp"
#include "trajssl/scenario/interchange.hpp"
#include "trajssl/scenario/standardize.hpp"
#include "trajssl/synth/generator.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>
#include <set>

namespace trajssl::sampler
{
namespace
{
using scenario::Scenario;

std::vector<Scenario> argo_like(std::size_t n, std::uint64_t seed)
{
  const auto p = *synth::stock_profile("argo-like");
  std::vector<Scenario> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(synth::gen_scenario(p, synth::scenario_seed(seed, i)));
  }
  return out;
}

std::set<std::pair<int, int>> enumerate_feasible(int T, int T_h)
{
  std::set<std::pair<int, int>> out;
  for (int t = 0; t <= T - T_h; ++t) {
    for (int tp = 0; tp <= T - T_h; ++tp) {
      if (std::abs(t - tp) >= T_h) {
        out.insert({t, tp});
      }
    }
  }
  return out;
}

TEST(BuildBank, MixesFilesWithoutBalancing)
{
  const auto dir = std::filesystem::temp_directory_path();
  std::vector<std::filesystem::path> files;
  const std::vector<std::size_t> sizes{100, 60, 40};
  for (std::size_t f = 0; f < sizes.size(); ++f) {
    auto scenarios = argo_like(sizes[f], 50 + f);
    for (auto & s : scenarios) {
      s.source = fmt::format("file{}", f);
    }
    files.push_back(dir / fmt::format("trajssl_bank_{}.jsonl", f));
    scenario::write_records(files.back(), scenarios);
  }
  const DataBank bank = build_bank(files, {}, 3);
  EXPECT_EQ(bank.size(), 200u);
  EXPECT_EQ(bank.stats.accepted_per_source.at("file0"), 100u);
  EXPECT_EQ(bank.stats.accepted_per_source.at("file1"), 60u);
  EXPECT_EQ(bank.stats.accepted_per_source.at("file2"), 40u);
  for (const auto & s : bank.scenarios) {
    EXPECT_EQ(s.T, bank.standard.T());
  }
  const DataBank again = build_bank(files, {}, 3);
  for (std::size_t i = 0; i < bank.size(); ++i) {
    EXPECT_EQ(bank.scenarios[i].id, again.scenarios[i].id);
  }
  for (const auto & f : files) {
    std::filesystem::remove(f);
  }
}

TEST(BuildBank, RejectsIncompleteTarget)
{
  auto raw = argo_like(10, 1);
  raw[3].tracks[raw[3].target_index()].valid[5] = false;
  const DataBank bank = build_bank(raw, {}, 0);
  EXPECT_EQ(bank.size(), 9u);
  EXPECT_EQ(bank.stats.rejected_incomplete_target, 1u);
  EXPECT_EQ(bank.stats.read, 10u);
}

TEST(BuildBank, EmptyBankThrows)
{
  auto raw = argo_like(2, 1);
  for (auto & s : raw) {
    s.tracks[s.target_index()].valid[0] = false;
  }
  EXPECT_THROW(build_bank(raw, {}, 0), EmptyBank);
}

TEST(BuildBank, PadsTruncatesAndResamples)
{
  std::vector<Scenario> raw;
  for (const auto & name : synth::stock_profile_names()) {
    raw.push_back(synth::gen_scenario(*synth::stock_profile(name), 12));
  }
  const DataBank bank = build_bank(raw, {}, 0);
  ASSERT_EQ(bank.size(), 3u);
  EXPECT_EQ(bank.stats.truncated, 2u);
  for (const auto & s : bank.scenarios) {
    EXPECT_EQ(s.T, 50);
    EXPECT_EQ(s.T_h, 20);
    for (const auto & line : s.map) {
      for (std::size_t k = 0; k + 1 < line.points.size(); ++k) {
        const double d = testing::dist(line.points[k], line.points[k + 1]);
        EXPECT_GE(d, 0.5 * bank.standard.map_resolution - 1e-9);
        EXPECT_LE(d, 1.5 * bank.standard.map_resolution + 1e-9);
      }
    }
  }
  scenario::StandardProfile longer;
  longer.T_h = 50;
  longer.T_f = 60;
  const DataBank padded = build_bank(raw, longer, 0);
  EXPECT_EQ(padded.stats.padded, 2u);
  for (const auto & s : padded.scenarios) {
    EXPECT_EQ(s.T, 110);
  }
}

TEST(SamplePair, ForcedPairsForMinimalHorizon)
{
  const Scenario s = testing::random_scenario(1, 3, 20, 20, 0.0);
  std::set<std::pair<int, int>> seen;
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const SubScenarioPair p = sample_pair(s, 20, rng);
    seen.insert({p.window_a.start, p.window_b.start});
  }
  EXPECT_EQ(seen, (std::set<std::pair<int, int>>{{0, 20}, {20, 0}}));
}

TEST(SamplePair, FeasiblePairCountByEnumeration)
{
  const auto feasible = enumerate_feasible(50, 20);
  EXPECT_EQ(feasible.size(), 132u);
  const Scenario s = testing::random_scenario(2, 3, 20, 30, 0.0);
  std::set<std::pair<int, int>> seen;
  std::set<int> starts;
  Rng rng(6);
  for (int i = 0; i < 10000; ++i) {
    const SubScenarioPair p = sample_pair(s, 20, rng);
    seen.insert({p.window_a.start, p.window_b.start});
    starts.insert(p.window_a.start);
  }
  EXPECT_EQ(seen, feasible);
  std::set<int> expected_starts;
  for (int t = 0; t <= 10; ++t) {
    expected_starts.insert(t);
  }
  for (int t = 20; t <= 30; ++t) {
    expected_starts.insert(t);
  }
  EXPECT_EQ(starts, expected_starts);
}

TEST(SamplePair, InfeasibleHorizonAndRejection)
{
  Rng rng(1);
  EXPECT_THROW(sample_pair(testing::random_scenario(3, 2, 20, 10), 20, rng), InfeasibleHorizon);
  Scenario s = testing::random_scenario(4, 2, 20, 30, 0.0);
  for (auto & t : s.tracks) {
    for (int k = 0; k < s.T; k += 9) {
      t.valid[k] = false;
    }
  }
  EXPECT_THROW(sample_pair(s, 20, rng), PairRejected);
}

TEST(SamplePair, EligibleAgentsValidOverBothWindows)
{
  Rng rng(7);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Scenario s = testing::random_scenario(seed, 6, 20, 30, 0.6);
    const SubScenarioPair p = sample_pair(s, 20, rng);
    ASSERT_FALSE(p.eligible.empty());
    for (const int a : p.eligible) {
      EXPECT_TRUE(s.tracks[a].valid_over(p.window_a.start, p.window_a.end()));
      EXPECT_TRUE(s.tracks[a].valid_over(p.window_b.start, p.window_b.end()));
    }
    const auto expected = eligible_agents(s, p.window_a.start, p.window_b.start, 20);
    EXPECT_EQ(p.eligible, expected);
  }
}

TEST(SamplePair, FallbackFindsRareFeasiblePairs)
{
  Scenario s = testing::random_scenario(8, 2, 20, 30, 0.0);
  for (auto & t : s.tracks) {
    for (int k = 40; k < 50; ++k) {
      t.valid[k] = false;
      t.points[k] = {};
    }
  }
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    const SubScenarioPair p = sample_pair(s, 20, rng);
    EXPECT_LE(std::max(p.window_a.end(), p.window_b.end()), 40);
    EXPECT_FALSE(p.eligible.empty());
  }
}

TEST(MakeBatch, DistinctScenariosAndFlattenedAgents)
{
  const DataBank bank = build_bank(argo_like(10, 2), {}, 0);
  Rng rng(3);
  const Batch b = make_batch(bank, {0, 3, 5, 7}, rng);
  ASSERT_EQ(b.pairs.size(), 4u);
  std::set<const Scenario *> distinct;
  std::size_t total = 0;
  for (const auto & p : b.pairs) {
    distinct.insert(p.window_a.scenario);
    total += p.eligible.size();
  }
  EXPECT_EQ(distinct.size(), 4u);
  EXPECT_EQ(static_cast<std::size_t>(b.num_agents()), total);
  EXPECT_GE(b.num_agents(), 4);
  int k = 0;
  for (std::size_t pi = 0; pi < b.pairs.size(); ++pi) {
    for (const int track : b.pairs[pi].eligible) {
      EXPECT_EQ(b.agents[k].pair, static_cast<int>(pi));
      EXPECT_EQ(b.agents[k].track, track);
      ++k;
    }
  }
}

TEST(BatchSampler, EpochWithoutReplacementAndDeterminism)
{
  const DataBank bank = build_bank(argo_like(23, 4), {}, 0);
  auto run = [&] {
    BatchSampler sampler(bank, 5, 77);
    std::vector<std::vector<std::pair<std::string, int>>> epochs;
    for (int e = 0; e < 3; ++e) {
      sampler.start_epoch(static_cast<std::uint64_t>(e));
      std::vector<std::pair<std::string, int>> seen;
      std::size_t batches = 0;
      while (auto batch = sampler.next()) {
        EXPECT_FALSE(batch->pairs.empty());
        EXPECT_LE(batch->pairs.size(), 5u);
        ++batches;
        for (const auto & p : batch->pairs) {
          seen.push_back({p.scenario().id, p.window_a.start});
        }
      }
      EXPECT_EQ(batches, sampler.batches_per_epoch());
      std::set<std::string> ids;
      for (const auto & s : seen) {
        EXPECT_TRUE(ids.insert(s.first).second) << "scenario repeated within an epoch";
      }
      epochs.push_back(seen);
    }
    return epochs;
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a, b);
  EXPECT_NE(a[0], a[1]);
}

TEST(EpochOrder, ChunksCoverPermutation)
{
  EpochOrder order(10, 1);
  order.start_epoch(0);
  std::vector<std::size_t> all;
  while (auto chunk = order.next(4)) {
    all.insert(all.end(), chunk->begin(), chunk->end());
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(10);
  std::iota(expected.begin(), expected.end(), 0);
  EXPECT_EQ(all, expected);
  EXPECT_EQ(order.batches_per_epoch(4), 3u);
}

}  // namespace
}  // namespace trajssl::sampler
