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

#ifndef TRAJSSL__CLI__CONFIG_HPP_
#define TRAJSSL__CLI__CONFIG_HPP_

#include "trajssl/encoder/features.hpp"
#include "trajssl/finetune/metrics.hpp"
#include "trajssl/finetune/model.hpp"
#include "trajssl/nn/optim.hpp"
#include "trajssl/scenario/types.hpp"
#include "trajssl/ssl/config.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace trajssl::cli
{
enum class Precision { kF32, kF64 };

std::string_view to_string(Precision p) noexcept;

struct DataConfig
{
  std::vector<std::string> pretrain_banks;
  std::vector<std::string> finetune_banks;
  std::vector<std::string> eval_banks;
};

struct EvalConfig
{
  finetune::MetricsConfig metrics;
  std::size_t batch_size{64};
};

/**
 * @brief Every knob of a run. Sections mirror the JSON file:
 *
 *     seed, precision, standard, data, encoder, ssl, optim, pretrain, finetune, eval
 *
 * `optim` is shared by pre-training and fine-tuning.
 */
struct RunConfig
{
  std::uint64_t seed{0};
  Precision precision{Precision::kF32};
  scenario::StandardProfile standard;
  DataConfig data;
  encoder::EncoderConfig encoder;
  ssl::SslConfig ssl;
  nn::AdamWConfig optim;
  ssl::PretrainConfig pretrain;
  finetune::FinetuneConfig finetune;
  EvalConfig eval;
};

/// Effective config as JSON, every field present.
nlohmann::json to_json(const RunConfig & cfg);

/**
 * @brief Overlays `overrides` on the defaults.
 *
 * Unknown keys, wrong types and invalid values raise ConfigError naming the field path.
 */
RunConfig config_from_json(const nlohmann::json & overrides);

/// Reads a JSON config file; an empty path yields the defaults. Throws ConfigError or IoError.
RunConfig load_config(const std::filesystem::path & path);

/// Throws ConfigError on any broken invariant.
void validate(const RunConfig & cfg);

/// Sorted-key compact JSON of the effective config.
std::string canonical_json(const RunConfig & cfg);

/// FNV-1a 64 of canonical_json, as 16 hex digits.
std::string config_hash(const RunConfig & cfg);

}  // namespace trajssl::cli

#endif  // TRAJSSL__CLI__CONFIG_HPP_
