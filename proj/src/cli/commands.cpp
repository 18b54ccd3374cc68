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

#include "trajssl/errors.hpp"
#include "trajssl/finetune/inputs.hpp"
#include "trajssl/finetune/model.hpp"
#include "trajssl/nn/checkpoint.hpp"
#include "trajssl/sampler/bank.hpp"
#include "trajssl/scenario/interchange.hpp"
#include "trajssl/ssl/pretrainer.hpp"
#include "trajssl/synth/generator.hpp"

#include <fmt/format.h>
#include <fmt/os.h>
#include <spdlog/spdlog.h>

#include <fstream>

namespace trajssl::cli
{
using nlohmann::json;
namespace fs = std::filesystem;

namespace
{
constexpr std::uint64_t kModelInitStream = 1;
constexpr std::uint64_t kFinetuneInitStream = 2;

void write_text(const fs::path & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    throw IoError(fmt::format("cannot write '{}'", path.string()));
  }
}

fs::path sidecar_path(const fs::path & artifact) { return fs::path(artifact.string() + ".config.json"); }

void write_sidecar(const fs::path & artifact, const RunConfig & cfg, json extra)
{
  extra["config_hash"] = config_hash(cfg);
  extra["config"] = to_json(cfg);
  write_text(sidecar_path(artifact), extra.dump(2) + "\n");
}

std::vector<fs::path> bank_paths(const std::vector<std::string> & files, const char * field)
{
  if (files.empty()) {
    throw ConfigError(fmt::format("data.{}: no bank files listed", field));
  }
  std::vector<fs::path> out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!fs::exists(files[i])) {
      throw ConfigError(fmt::format("data.{}[{}]: file '{}' does not exist", field, i, files[i]));
    }
    out.emplace_back(files[i]);
  }
  return out;
}

void require_output(const fs::path & out, const char * flag)
{
  if (out.empty()) {
    throw ConfigError(fmt::format("{}: output path required", flag));
  }
}

std::uint64_t stream_seed(const RunConfig & cfg, std::uint64_t stream) { return Rng::derive(cfg.seed, stream).key(); }

template <typename S>
finetune::MotionModel<S> make_motion_model(const RunConfig & cfg)
{
  return finetune::MotionModel<S>(
    cfg.encoder, cfg.finetune.modes, cfg.standard.T_f, cfg.finetune.head_hidden, stream_seed(cfg, kFinetuneInitStream));
}

template <typename S>
void pretrain_impl(const RunConfig & cfg, const PretrainArgs & args, const fs::path & log)
{
  const sampler::DataBank bank = sampler::build_bank(bank_paths(cfg.data.pretrain_banks, "pretrain_banks"), cfg.standard, cfg.seed);
  if (args.pretext == Pretext::kSmartPretrain) {
    ssl::SslModel<S> model(cfg.encoder, cfg.ssl, cfg.standard.T(), cfg.standard.T_h, stream_seed(cfg, kModelInitStream));
    const auto summary =
      ssl::pretrain_loop(bank, model, cfg.pretrain, cfg.encoder.k_map, cfg.seed, {args.out, log, provenance_line(cfg)});
    spdlog::info("pretrain: {} steps, {} skipped batches, {} rejected pairs", summary.steps, summary.skipped_batches,
      summary.rejected_pairs);
    return;
  }
  const auto scenes = finetune::prepare_scenes(bank.scenarios, cfg.encoder.k_map);
  auto model = finetune::MotionModel<S>(
    cfg.encoder, cfg.finetune.modes, cfg.standard.T_f, cfg.finetune.head_hidden, stream_seed(cfg, kModelInitStream));
  finetune::FinetuneConfig fc = cfg.finetune;
  fc.epochs = cfg.pretrain.epochs;
  fc.batch_size = cfg.pretrain.batch_size;
  finetune::finetune_loop(scenes, model, fc, cfg.seed, {args.out, log, provenance_line(cfg)});
}

template <typename S>
void finetune_impl(const RunConfig & cfg, const FinetuneArgs & args, const fs::path & log)
{
  const sampler::DataBank bank =
    sampler::build_bank(bank_paths(cfg.data.finetune_banks, "finetune_banks"), cfg.standard, cfg.seed);
  const auto scenes = finetune::prepare_scenes(bank.scenarios, cfg.encoder.k_map);
  auto model = make_motion_model<S>(cfg);
  if (!args.scratch) {
    model.init_from_pretrained(nn::read_checkpoint(args.init));
  }
  finetune::finetune_loop(scenes, model, cfg.finetune, cfg.seed, {args.out, log, provenance_line(cfg)});
}

template <typename S>
finetune::MetricsReport eval_impl(const RunConfig & cfg, const EvalArgs & args)
{
  const bool train = args.split == "train";
  const sampler::DataBank bank = sampler::build_bank(
    bank_paths(train ? cfg.data.finetune_banks : cfg.data.eval_banks, train ? "finetune_banks" : "eval_banks"),
    cfg.standard, cfg.seed);
  const auto scenes = finetune::prepare_scenes(bank.scenarios, cfg.encoder.k_map);
  auto model = make_motion_model<S>(cfg);
  model.load_checkpoint(nn::read_checkpoint(args.checkpoint));
  return finetune::aggregate(finetune::evaluate_cases(model, scenes, cfg.eval.metrics, cfg.eval.batch_size));
}

template <typename S>
finetune::PredictionSet predict_one(const RunConfig & cfg, const fs::path & checkpoint, const scenario::Scenario & s)
{
  auto model = make_motion_model<S>(cfg);
  model.load_checkpoint(nn::read_checkpoint(checkpoint));
  const finetune::SceneInput in = finetune::prepare_scene(s, cfg.encoder.k_map);
  return model.predict({&in}).front();
}
}  // namespace

std::string provenance_line(const RunConfig & cfg)
{
  return fmt::format("config_hash={} config={}", config_hash(cfg), canonical_json(cfg));
}

std::size_t cmd_synth(const SynthArgs & args)
{
  require_output(args.out, "--out");
  if (args.profiles.empty() || args.profiles.size() != args.counts.size()) {
    throw ConfigError("--profiles/--counts: need one count per profile");
  }
  std::vector<synth::DatasetProfile> profiles;
  for (const auto & name : args.profiles) {
    auto p = synth::stock_profile(name);
    if (!p) {
      throw ConfigError(fmt::format("--profiles: unknown profile '{}'", name));
    }
    profiles.push_back(*p);
  }
  const std::size_t n = synth::gen_bank(profiles, args.counts, args.seed, args.out, std::max(1, args.threads));
  json meta;
  meta["command"] = "synth";
  meta["profiles"] = args.profiles;
  meta["counts"] = args.counts;
  meta["seed"] = args.seed;
  meta["scenarios"] = n;
  write_text(sidecar_path(args.out), meta.dump(2) + "\n");
  spdlog::info("synth: wrote {} scenarios to {}", n, args.out.string());
  return n;
}

void cmd_pretrain(const RunConfig & cfg, const PretrainArgs & args)
{
  require_output(args.out, "--out");
  const fs::path log = args.loss_log.empty() ? fs::path(args.out.string() + ".loss.csv") : args.loss_log;
  if (cfg.precision == Precision::kF64) {
    pretrain_impl<double>(cfg, args, log);
  } else {
    pretrain_impl<float>(cfg, args, log);
  }
  write_sidecar(
    args.out, cfg,
    {{"command", "pretrain"}, {"pretext", args.pretext == Pretext::kPrediction ? "prediction" : "smartpretrain"}});
}

void cmd_finetune(const RunConfig & cfg, const FinetuneArgs & args)
{
  require_output(args.out, "--out");
  if (args.scratch == !args.init.empty()) {
    throw ConfigError("--init/--scratch: exactly one is required");
  }
  if (!args.scratch && !fs::exists(args.init)) {
    throw ConfigError(fmt::format("--init: checkpoint '{}' does not exist", args.init.string()));
  }
  const fs::path log = args.loss_log.empty() ? fs::path(args.out.string() + ".loss.csv") : args.loss_log;
  if (cfg.precision == Precision::kF64) {
    finetune_impl<double>(cfg, args, log);
  } else {
    finetune_impl<float>(cfg, args, log);
  }
  write_sidecar(
    args.out, cfg, {{"command", "finetune"}, {"init", args.scratch ? std::string("scratch") : nn::file_digest(args.init)}});
}

finetune::MetricsReport cmd_eval(const RunConfig & cfg, const EvalArgs & args)
{
  require_output(args.out, "--out");
  if (args.split != "train" && args.split != "val") {
    throw ConfigError(fmt::format("--split: expected train or val, got '{}'", args.split));
  }
  if (!fs::exists(args.checkpoint)) {
    throw ConfigError(fmt::format("--checkpoint: '{}' does not exist", args.checkpoint.string()));
  }
  const auto report = cfg.precision == Precision::kF64 ? eval_impl<double>(cfg, args) : eval_impl<float>(cfg, args);
  write_text(
    args.out, fmt::format(
                "# {}\nminADE,minFDE,MR,count,config_hash,checkpoint_id\n{:.9g},{:.9g},{:.9g},{},{},{}\n",
                provenance_line(cfg), report.min_ade, report.min_fde, report.miss_rate, report.count, config_hash(cfg),
                nn::file_digest(args.checkpoint)));
  spdlog::info(
    "eval: minADE {:.4f} minFDE {:.4f} MR {:.4f} over {} scenarios", report.min_ade, report.min_fde, report.miss_rate,
    report.count);
  return report;
}

bool cmd_gradcheck(std::ostream & report, double tolerance)
{
  bool ok = true;
  for (const auto & r : run_gradcheck_suites(tolerance)) {
    report << fmt::format("{} {} max_rel_error={:.3e} probes={}\n", r.passed ? "PASS" : "FAIL", r.name, r.max_rel_error, r.probes);
    ok = ok && r.passed;
  }
  return ok;
}

void cmd_export_svg(const RunConfig & cfg, const SvgArgs & args)
{
  require_output(args.out, "--out");
  const auto records = scenario::read_records(args.scenarios);
  if (args.index >= records.size()) {
    throw ConfigError(fmt::format("--index: {} out of range for {} scenarios", args.index, records.size()));
  }
  const scenario::Scenario s = sampler::standardize(records[args.index], cfg.standard);
  std::optional<finetune::PredictionSet> prediction;
  if (!args.checkpoint.empty()) {
    prediction = cfg.precision == Precision::kF64 ? predict_one<double>(cfg, args.checkpoint, s)
                                                  : predict_one<float>(cfg, args.checkpoint, s);
  }
  write_text(args.out, render_svg(s, prediction ? &*prediction : nullptr));
}

}  // namespace trajssl::cli
