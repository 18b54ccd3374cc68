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

#ifndef TRAJSSL__SYNTH__GENERATOR_HPP_
#define TRAJSSL__SYNTH__GENERATOR_HPP_

#include "trajssl/scenario/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trajssl::synth
{
enum class LaneLayout : std::uint8_t { kStraight, kArc, kMerge };

/**
 * @brief Configuration of one synthetic source dataset.
 */
struct DatasetProfile
{
  std::string name;
  double sample_rate_hz{10.0};
  int T_h{20};
  int T_f{30};
  double map_resolution{1.0};
  int min_agents{4};
  int max_agents{8};
  double min_speed{4.0};
  double max_speed{15.0};
  /// Probability that a non-target agent gets one contiguous invalid span.
  double dropout_prob{0.2};
  /// Probability that an agent performs one lane change.
  double lane_change_prob{0.3};
  std::vector<LaneLayout> lane_layouts{LaneLayout::kStraight, LaneLayout::kArc, LaneLayout::kMerge};

  int T() const noexcept { return T_h + T_f; }

  /// Throws InvalidProfile.
  void validate() const;
};

/// "argo-like", "argo2-like" or "womd-like"; nullopt for any other name.
std::optional<DatasetProfile> stock_profile(std::string_view name);
std::vector<std::string> stock_profile_names();

/// Relative speed noise is Gaussian with this deviation, clipped to +/- kSpeedNoiseClip.
inline constexpr double kSpeedNoiseSigma = 0.1;
inline constexpr double kSpeedNoiseClip = 0.2;
/// Every generated coordinate satisfies |x|, |y| <= kBoxHalfWidth.
inline constexpr double kBoxHalfWidth = 250.0;

/**
 * @brief Generates one scenario; a pure function of (profile, seed).
 *
 * Agents follow lane centerlines with a pure-pursuit controller. The target agent is always
 * complete.
 */
scenario::Scenario gen_scenario(const DatasetProfile & profile, std::uint64_t seed);

/// Seed of scenario `index` in a bank generated with `bank_seed`.
std::uint64_t scenario_seed(std::uint64_t bank_seed, std::uint64_t index) noexcept;

/**
 * @brief Generates `counts[i]` scenarios of `profiles[i]` in sequence and writes them to `out`.
 *
 * Scenario k of the bank (counted across profiles) uses `scenario_seed(seed, k)`, so the output
 * does not depend on `threads`. Returns the number of records written. Throws IoError.
 */
std::size_t gen_bank(
  const std::vector<DatasetProfile> & profiles, const std::vector<std::size_t> & counts,
  std::uint64_t seed, const std::filesystem::path & out, int threads = 1);

}  // namespace trajssl::synth

#endif  // TRAJSSL__SYNTH__GENERATOR_HPP_
