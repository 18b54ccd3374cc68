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

#ifndef TRAJSSL__RNG_HPP_
#define TRAJSSL__RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

namespace trajssl
{
/**
 * @brief Counter-based random stream.
 *
 * The i-th draw is `splitmix64(key + i * 0x9E3779B97F4A7C15)`, i.e. the SplitMix64 finalizer
 * applied to a Weyl sequence. Every derived quantity (uniforms, integers, normals) is computed
 * here rather than through <random> distributions, whose outputs differ across standard
 * libraries.
 */
class Rng
{
public:
  explicit Rng(std::uint64_t key = 0) noexcept : key_(key) {}

  /// Independent stream for sub-task `index` of the stream keyed by `seed`.
  static Rng derive(std::uint64_t seed, std::uint64_t index) noexcept
  {
    return Rng(mix(seed ^ mix(index + 0xD1B54A32D192ED03ULL)));
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept
  {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() noexcept
  {
    const std::uint64_t z = key_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    return mix(z);
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], unbiased by rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept
  {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1ULL;
    if (span == 0) {
      return static_cast<std::int64_t>(next_u64());
    }
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t r = next_u64();
    while (r >= limit) {
      r = next_u64();
    }
    return lo + static_cast<std::int64_t>(r % span);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Standard normal via Box-Muller; consumes two draws.
  double normal() noexcept
  {
    double u1 = uniform();
    while (u1 <= 0.0) {
      u1 = uniform();
    }
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::vector<T> & items) noexcept
  {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_{0};
};

}  // namespace trajssl

#endif  // TRAJSSL__RNG_HPP_
