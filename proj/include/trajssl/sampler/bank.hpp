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

#ifndef TRAJSSL__SAMPLER__BANK_HPP_
#define TRAJSSL__SAMPLER__BANK_HPP_

#include "trajssl/scenario/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace trajssl::sampler
{
struct BankStats
{
  std::size_t read{0};
  std::size_t accepted{0};
  std::size_t rejected_incomplete_target{0};
  std::size_t rejected_rate{0};
  std::size_t rejected_other{0};
  std::size_t truncated{0};
  std::size_t padded{0};
  std::size_t subsampled{0};
  std::size_t dropped_tracks{0};
  std::size_t dropped_polylines{0};
  std::map<std::string, std::size_t> accepted_per_source;

  std::size_t rejected() const noexcept
  {
    return rejected_incomplete_target + rejected_rate + rejected_other;
  }
};

/**
 * @brief Mixed pool of standardized scenarios.
 *
 * Sources are concatenated as-is; no per-source balancing.
 */
struct DataBank
{
  std::vector<scenario::Scenario> scenarios;
  scenario::StandardProfile standard;
  BankStats stats;

  std::size_t size() const noexcept { return scenarios.size(); }
};

/**
 * @brief Aligns one scenario to `standard`.
 *
 * Order: integer-stride rate subsampling, front truncation of longer horizons, completeness
 * filtering, zero-padding of shorter horizons, map resampling. Degenerate polylines are dropped.
 * Throws RateMismatch or ScenarioRejected; `stats` (optional) receives the per-rule counters.
 */
scenario::Scenario standardize(
  const scenario::Scenario & s, const scenario::StandardProfile & standard, BankStats * stats = nullptr);

/// Standardizes `raw` in order, then shuffles once with `seed`. Throws EmptyBank.
DataBank build_bank(
  std::vector<scenario::Scenario> raw, const scenario::StandardProfile & standard, std::uint64_t seed);

/// Reads interchange files in order and builds the bank from their concatenation.
DataBank build_bank(
  const std::vector<std::filesystem::path> & inputs, const scenario::StandardProfile & standard,
  std::uint64_t seed);

}  // namespace trajssl::sampler

#endif  // TRAJSSL__SAMPLER__BANK_HPP_
