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

#ifndef TRAJSSL__CLI__COMMANDS_HPP_
#define TRAJSSL__CLI__COMMANDS_HPP_

#include "trajssl/cli/config.hpp"
#include "trajssl/cli/gradcheck_suites.hpp"
#include "trajssl/finetune/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace trajssl::cli
{
struct SynthArgs
{
  std::vector<std::string> profiles;
  std::vector<std::size_t> counts;
  std::uint64_t seed{0};
  std::filesystem::path out;
  int threads{1};
};

/// Writes the bank and `<out>.config.json`; returns the number of scenarios.
std::size_t cmd_synth(const SynthArgs & args);

enum class Pretext { kSmartPretrain, kPrediction };

struct PretrainArgs
{
  Pretext pretext{Pretext::kSmartPretrain};
  std::filesystem::path out;
  /// Defaults to `<out>.loss.csv`.
  std::filesystem::path loss_log;
};

/// Pre-trains on `data.pretrain_banks`; writes the checkpoint, its sidecar config and the loss log.
void cmd_pretrain(const RunConfig & cfg, const PretrainArgs & args);

struct FinetuneArgs
{
  /// Pre-trained checkpoint; empty with `scratch` set.
  std::filesystem::path init;
  bool scratch{false};
  std::filesystem::path out;
  std::filesystem::path loss_log;
};

/// Fine-tunes on `data.finetune_banks`.
void cmd_finetune(const RunConfig & cfg, const FinetuneArgs & args);

struct EvalArgs
{
  std::filesystem::path checkpoint;
  /// "train" evaluates `data.finetune_banks`, "val" `data.eval_banks`.
  std::string split{"val"};
  std::filesystem::path out;
};

/// Writes a metrics file: a provenance comment, then a header and one row.
finetune::MetricsReport cmd_eval(const RunConfig & cfg, const EvalArgs & args);

/// Prints one line per suite; true when all pass.
bool cmd_gradcheck(std::ostream & report, double tolerance = 1e-5);

struct SvgArgs
{
  std::filesystem::path scenarios;
  std::size_t index{0};
  std::filesystem::path out;
  std::filesystem::path checkpoint;
};

void cmd_export_svg(const RunConfig & cfg, const SvgArgs & args);

/**
 * @brief SVG of one scenario: map gray, observed history black, ground-truth future pink, and
 * predicted modes blue labelled with their probabilities.
 */
std::string render_svg(const scenario::Scenario & s, const finetune::PredictionSet * prediction);

/// First line of every text artifact, without the comment marker.
std::string provenance_line(const RunConfig & cfg);

}  // namespace trajssl::cli

#endif  // TRAJSSL__CLI__COMMANDS_HPP_
