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

#include "trajssl/sampler/bank.hpp"

#include "trajssl/errors.hpp"
#include "trajssl/rng.hpp"
#include "trajssl/scenario/interchange.hpp"
#include "trajssl/scenario/standardize.hpp"

#include <spdlog/spdlog.h>

namespace trajssl::sampler
{
using scenario::Scenario;
using scenario::StandardProfile;

Scenario standardize(const Scenario & raw, const StandardProfile & standard, BankStats * stats)
{
  BankStats local;
  BankStats & st = stats ? *stats : local;

  Scenario s = scenario::subsample_rate(raw, standard.sample_rate_hz);
  if (s.T != raw.T) {
    ++st.subsampled;
  }
  if (s.T > standard.T()) {
    s = scenario::truncate_scenario(s, standard.T());
    ++st.truncated;
  }
  const std::size_t before = s.tracks.size();
  s = scenario::filter_complete_tracks(s);
  st.dropped_tracks += before - s.tracks.size();
  if (s.T < standard.T()) {
    s = scenario::pad_scenario(s, standard.T());
    ++st.padded;
  }
  s.T_h = standard.T_h;
  s.T_f = standard.T_f;

  std::vector<scenario::Polyline> map;
  map.reserve(s.map.size());
  for (const auto & line : s.map) {
    try {
      map.push_back(scenario::resample_polyline(line, standard.map_resolution));
    } catch (const DegeneratePolyline &) {
      ++st.dropped_polylines;
    }
  }
  s.map = std::move(map);
  return s;
}

DataBank build_bank(std::vector<Scenario> raw, const StandardProfile & standard, std::uint64_t seed)
{
  standard.validate();
  DataBank bank;
  bank.standard = standard;
  for (auto & s : raw) {
    ++bank.stats.read;
    try {
      Scenario std_s = standardize(s, standard, &bank.stats);
      ++bank.stats.accepted_per_source[std_s.source];
      bank.scenarios.push_back(std::move(std_s));
    } catch (const ScenarioRejected & e) {
      ++bank.stats.rejected_incomplete_target;
      spdlog::debug("rejected: {}", e.what());
    } catch (const RateMismatch & e) {
      ++bank.stats.rejected_rate;
      spdlog::debug("rejected: {}", e.what());
    } catch (const InvalidScenario & e) {
      ++bank.stats.rejected_other;
      spdlog::debug("rejected: {}", e.what());
    }
  }
  bank.stats.accepted = bank.scenarios.size();
  if (bank.scenarios.empty()) {
    throw EmptyBank("no scenario survived standardization");
  }
  Rng rng = Rng::derive(seed, 0x62616e6bULL);
  rng.shuffle(bank.scenarios);
  spdlog::info(
    "bank: read={} accepted={} rejected={} (incomplete_target={} rate={} other={}) truncated={} "
    "padded={} dropped_tracks={}",
    bank.stats.read, bank.stats.accepted, bank.stats.rejected(), bank.stats.rejected_incomplete_target,
    bank.stats.rejected_rate, bank.stats.rejected_other, bank.stats.truncated, bank.stats.padded,
    bank.stats.dropped_tracks);
  return bank;
}

DataBank build_bank(
  const std::vector<std::filesystem::path> & inputs, const StandardProfile & standard, std::uint64_t seed)
{
  std::vector<Scenario> raw;
  for (const auto & path : inputs) {
    auto part = scenario::read_records(path);
    raw.insert(raw.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return build_bank(std::move(raw), standard, seed);
}

}  // namespace trajssl::sampler
