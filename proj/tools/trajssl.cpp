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

#include "trajssl/cli/commands.hpp"
#include "trajssl/cli/config.hpp"
#include "trajssl/errors.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace
{
void setup_logging()
{
  auto logger = spdlog::stderr_color_mt("trajssl");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char * level = std::getenv("TRAJSSL_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

std::string one_line(std::string text)
{
  for (auto & ch : text) {
    if (ch == '\n' || ch == '\r') {
      ch = ' ';
    }
  }
  return text;
}
}  // namespace

int main(int argc, char ** argv)
{
  using namespace trajssl;
  setup_logging();

  CLI::App app{"Self-supervised pre-training for trajectory prediction"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::optional<std::string> precision;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Seed for all randomness (overrides the config)");
  app.add_option("--threads", threads, "Worker threads for generation")->check(CLI::PositiveNumber);
  app.add_option("--precision", precision, "Arithmetic precision")->check(CLI::IsMember({"f32", "f64"}));

  cli::SynthArgs synth;
  auto * synth_cmd = app.add_subcommand("synth", "Generate a synthetic scenario bank");
  synth_cmd->add_option("--profiles", synth.profiles, "Comma-separated stock profiles")->required()->delimiter(',');
  synth_cmd->add_option("--counts", synth.counts, "Comma-separated scenario counts")->required()->delimiter(',');
  synth_cmd->add_option("--out", synth.out, "Output bank file")->required();

  cli::PretrainArgs pretrain;
  std::string pretext = "smartpretrain";
  auto * pretrain_cmd = app.add_subcommand("pretrain", "Pre-train the encoder on the pre-training banks");
  pretrain_cmd->add_option("--pretext", pretext, "Pretext objective")->check(CLI::IsMember({"smartpretrain", "prediction"}));
  pretrain_cmd->add_option("--out", pretrain.out, "Output checkpoint")->required();
  pretrain_cmd->add_option("--loss-log", pretrain.loss_log, "Loss log (default <out>.loss.csv)");

  cli::FinetuneArgs finetune;
  auto * finetune_cmd = app.add_subcommand("finetune", "Fine-tune on the fine-tuning banks");
  auto * init_opt = finetune_cmd->add_option("--init", finetune.init, "Pre-trained checkpoint");
  auto * scratch_opt = finetune_cmd->add_flag("--scratch", finetune.scratch, "Start from random weights");
  init_opt->excludes(scratch_opt);
  finetune_cmd->add_option("--out", finetune.out, "Output checkpoint")->required();
  finetune_cmd->add_option("--loss-log", finetune.loss_log, "Loss log (default <out>.loss.csv)");

  cli::EvalArgs eval;
  auto * eval_cmd = app.add_subcommand("eval", "Evaluate a fine-tuned checkpoint");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Fine-tuned checkpoint")->required();
  eval_cmd->add_option("--split", eval.split, "train or val")->check(CLI::IsMember({"train", "val"}));
  eval_cmd->add_option("--out", eval.out, "Metrics file")->required();

  auto * gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient suites in 64-bit");

  cli::SvgArgs svg;
  auto * svg_cmd = app.add_subcommand("export-svg", "Render one scenario, optionally with predictions");
  svg_cmd->add_option("--scenarios", svg.scenarios, "Scenario file")->required()->check(CLI::ExistingFile);
  svg_cmd->add_option("--index", svg.index, "Scenario index in the file");
  svg_cmd->add_option("--checkpoint", svg.checkpoint, "Fine-tuned checkpoint for predictions");
  svg_cmd->add_option("--out", svg.out, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    return app.exit(e);
  }

  try {
    cli::RunConfig cfg = cli::load_config(config_path);
    if (seed) {
      cfg.seed = *seed;
    }
    if (precision) {
      cfg.precision = *precision == "f64" ? cli::Precision::kF64 : cli::Precision::kF32;
    }
    if (*synth_cmd) {
      synth.seed = cfg.seed;
      synth.threads = threads;
      cli::cmd_synth(synth);
    } else if (*pretrain_cmd) {
      pretrain.pretext = pretext == "prediction" ? cli::Pretext::kPrediction : cli::Pretext::kSmartPretrain;
      cli::cmd_pretrain(cfg, pretrain);
    } else if (*finetune_cmd) {
      cli::cmd_finetune(cfg, finetune);
    } else if (*eval_cmd) {
      cli::cmd_eval(cfg, eval);
    } else if (*gradcheck_cmd) {
      return cli::cmd_gradcheck(std::cout) ? 0 : 1;
    } else if (*svg_cmd) {
      cli::cmd_export_svg(cfg, svg);
    }
  } catch (const Error & e) {
    std::cerr << fmt::format("error kind={} message=\"{}\"\n", e.kind(), one_line(e.what()));
    return dynamic_cast<const ConfigError *>(&e) ? 2 : 1;
  } catch (const std::exception & e) {
    std::cerr << fmt::format("error kind=Internal message=\"{}\"\n", one_line(e.what()));
    return 1;
  }
  return 0;
}
