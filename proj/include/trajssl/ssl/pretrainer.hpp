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

#ifndef TRAJSSL__SSL__PRETRAINER_HPP_
#define TRAJSSL__SSL__PRETRAINER_HPP_

#include "trajssl/encoder/reference_encoder.hpp"
#include "trajssl/nn/checkpoint.hpp"
#include "trajssl/nn/fpenv.hpp"
#include "trajssl/nn/optim.hpp"
#include "trajssl/rng.hpp"
#include "trajssl/sampler/pair_sampler.hpp"
#include "trajssl/ssl/config.hpp"
#include "trajssl/ssl/heads.hpp"
#include "trajssl/ssl/inputs.hpp"
#include "trajssl/ssl/losses.hpp"

#include <fmt/format.h>
#include <fmt/os.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace trajssl::ssl
{
struct LossReport
{
  double l_c{0.0};
  double l_r{0.0};
  double loss{0.0};
  int agents{0};
};

/// Checkpoint names of momentum-branch tensors carry this prefix.
inline constexpr std::string_view kMomentumPrefix = "momentum.";

/**
 * @brief Online branch (encoder, projector, predictor, decoder) and momentum branch (encoder,
 * projector) with separate parameter stores.
 *
 * The momentum store starts as an exact copy of the online encoder and projector. Not copyable:
 * layers point into the stores.
 */
template <typename S>
class SslModel
{
public:
  SslModel(
    const encoder::EncoderConfig & enc, const SslConfig & cfg, int T, int T_h, std::uint64_t seed,
    encoder::EncoderFactory<S> factory = {})
  : cfg_(cfg), recon_steps_(recon_length(cfg.recon_target, T, T_h))
  {
    cfg.validate();
    if (!factory) {
      factory = encoder::reference_encoder_factory<S>(enc);
    }
    encoder_ = factory(online_, "encoder");
    const int d = encoder_->embed_dim();
    const int h = cfg.head_hidden;
    projector_.emplace(online_, "projector", d, h, d, NormKind::kBatch);
    predictor_.emplace(online_, "predictor", d, h, d, NormKind::kBatch);
    decoder_.emplace(online_, "decoder", d, h, recon_steps_);
    nn::initialize(online_, seed);
    momentum_ = online_.subset({"encoder.", "projector."});
    momentum_encoder_ = factory(momentum_, "encoder");
    momentum_projector_.emplace(momentum_, "projector", d, h, d, NormKind::kBatch);
  }

  SslModel(const SslModel &) = delete;
  SslModel & operator=(const SslModel &) = delete;

  /**
   * @brief Evaluates L = L_c + lambda L_r on `in`; with `backward` accumulates online gradients.
   *
   * Normalization in the heads runs in train mode on both branches. The momentum branch is never
   * differentiated. Throws BatchTooSmall for fewer than two agents.
   */
  LossReport forward_backward(const PretrainInputs & in, bool backward)
  {
    const int n = in.num_agents();
    if (n < 2) {
      throw BatchTooSmall(fmt::format("pretraining needs >= 2 agents per batch, got {}", n));
    }
    LossReport report;
    report.agents = n;
    const nn::Tensor<S> h_online = encoder_->forward(in.online.batch);
    const nn::Tensor<S> z = gather(h_online, in.online.rows);
    const bool need_projection = cfg_.use_tcl || (cfg_.use_trl && cfg_.trl_source == TrlSource::kProjector);

    nn::Tensor<S> projected;
    nn::Tensor<S> d_projected;
    if (need_projection) {
      projected = projector_->forward(z, nn::Mode::kTrain);
      d_projected = nn::Tensor<S>::Zero(projected.rows(), projected.cols());
    }
    if (cfg_.use_tcl) {
      const nn::Tensor<S> q = predictor_->forward(projected, nn::Mode::kTrain);
      const nn::Tensor<S> target = momentum_targets(in);
      const LossGrad<S> tcl = tcl_loss<S>(q, target, cfg_.tau);
      report.l_c = tcl.loss;
      if (backward) {
        d_projected += predictor_->backward(tcl.grad);
      }
    }
    nn::Tensor<S> dz = nn::Tensor<S>::Zero(z.rows(), z.cols());
    if (cfg_.use_trl) {
      const bool from_projector = cfg_.trl_source == TrlSource::kProjector;
      const nn::Tensor<S> decoded = decoder_->forward(from_projector ? projected : z);
      const LossGrad<S> trl = trl_loss<S>(decoded, in.target.template cast<S>(), in.target_valid);
      report.l_r = trl.loss;
      if (backward) {
        const nn::Tensor<S> d_source = decoder_->backward(trl.grad * static_cast<S>(cfg_.lambda));
        (from_projector ? d_projected : dz) += d_source;
      }
    }
    report.loss = combined_loss(report.l_c, cfg_.use_trl ? report.l_r : 0.0, cfg_.lambda);
    if (backward) {
      if (need_projection) {
        dz += projector_->backward(d_projected);
      }
      encoder_->backward(scatter(dz, in.online.rows, h_online.rows()));
    }
    return report;
  }

  /// Momentum-branch embeddings of window_b, (N, D).
  nn::Tensor<S> momentum_targets(const PretrainInputs & in)
  {
    const nn::Tensor<S> h = momentum_encoder_->forward(in.momentum.batch);
    return momentum_projector_->forward(gather(h, in.momentum.rows), nn::Mode::kBatchStats);
  }

  /// Online tensors under their own names, momentum tensors under kMomentumPrefix.
  nn::Checkpoint to_checkpoint() const
  {
    nn::Checkpoint ckpt;
    ckpt.has_moments = true;
    nn::append_store(ckpt, online_);
    nn::append_store(ckpt, momentum_, std::string(kMomentumPrefix));
    ckpt.step = online_.step();
    return ckpt;
  }

  void load_checkpoint(const nn::Checkpoint & ckpt)
  {
    nn::load_store(ckpt, online_, {}, {}, true);
    nn::load_store(ckpt, momentum_, {}, std::string(kMomentumPrefix), false);
  }

  nn::ParamStore<S> & online() noexcept { return online_; }
  const nn::ParamStore<S> & online() const noexcept { return online_; }
  nn::ParamStore<S> & momentum() noexcept { return momentum_; }
  const nn::ParamStore<S> & momentum() const noexcept { return momentum_; }
  const SslConfig & config() const noexcept { return cfg_; }
  int recon_steps() const noexcept { return recon_steps_; }

private:
  static nn::Tensor<S> gather(const nn::Tensor<S> & h, const std::vector<int> & rows)
  {
    nn::Tensor<S> out(static_cast<Eigen::Index>(rows.size()), h.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out.row(static_cast<Eigen::Index>(k)) = h.row(rows[k]);
    }
    return out;
  }

  static nn::Tensor<S> scatter(const nn::Tensor<S> & dz, const std::vector<int> & rows, Eigen::Index total)
  {
    nn::Tensor<S> out = nn::Tensor<S>::Zero(total, dz.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out.row(rows[k]) += dz.row(static_cast<Eigen::Index>(k));
    }
    return out;
  }

  SslConfig cfg_;
  int recon_steps_;
  nn::ParamStore<S> online_;
  nn::ParamStore<S> momentum_;
  std::unique_ptr<encoder::Encoder<S>> encoder_;
  std::optional<MlpHead<S>> projector_;
  std::optional<MlpHead<S>> predictor_;
  std::optional<TrajectoryDecoder<S>> decoder_;
  std::unique_ptr<encoder::Encoder<S>> momentum_encoder_;
  std::optional<MlpHead<S>> momentum_projector_;
};

struct StepReport
{
  LossReport losses;
  std::uint64_t step{0};
  double momentum{1.0};
  double lr{0.0};
};

/**
 * @brief One optimization step: loss and backward, AdamW on the online store, then EMA.
 *
 * `k` is the zero-based step index. The EMA runs when k is a multiple of `ema_every_n_steps`,
 * with m = momentum_at(schedule, k).
 */
template <typename S>
StepReport pretrain_step(
  SslModel<S> & model, const PretrainInputs & in, const nn::EmaSchedule & schedule, std::uint64_t k,
  const PretrainConfig & cfg)
{
  StepReport r;
  r.step = k;
  model.online().zero_grad();
  r.losses = model.forward_backward(in, true);
  nn::adamw_step(model.online(), cfg.optim);
  r.momentum = momentum_at(schedule, k);
  if (k % static_cast<std::uint64_t>(cfg.ema_every_n_steps) == 0) {
    nn::ema_update(model.online(), model.momentum(), r.momentum);
  }
  r.lr = cfg.optim.lr;
  return r;
}

struct PretrainOptions
{
  /// Final checkpoint; empty for none.
  std::filesystem::path checkpoint;
  /// Per-step loss log; empty for none.
  std::filesystem::path loss_log;
  /// Comment line written first in the loss log, without the leading '#'.
  std::string provenance;
};

struct PretrainSummary
{
  std::uint64_t steps{0};
  std::size_t skipped_batches{0};
  std::size_t rejected_pairs{0};
  std::vector<double> epoch_mean_loss;
};

/// Path of the intermediate checkpoint written after `epoch` (1-based).
inline std::filesystem::path epoch_checkpoint_path(const std::filesystem::path & final_path, int epoch)
{
  std::filesystem::path p = final_path;
  p.replace_filename(fmt::format("{}.epoch{:03d}{}", final_path.stem().string(), epoch, final_path.extension().string()));
  return p;
}

/**
 * @brief Runs `epochs` passes of pair batches over the bank.
 *
 * Batches with fewer than two eligible agents are skipped and not counted as steps. The loss log
 * has one row per executed step with columns step, epoch, L_c, L_r, L, m, lr.
 */
template <typename S>
PretrainSummary pretrain_loop(
  const sampler::DataBank & bank, SslModel<S> & model, const PretrainConfig & cfg, int k_map, std::uint64_t seed,
  const PretrainOptions & options = {})
{
  cfg.validate();
  const nn::ScopedFlushDenormals flush;
  sampler::BatchSampler sampler(bank, cfg.batch_size, Rng::derive(seed, 0x7061697273ULL).key());
  const nn::EmaSchedule schedule{
    cfg.ema_m0, static_cast<std::uint64_t>(cfg.epochs) * static_cast<std::uint64_t>(sampler.batches_per_epoch())};
  encoder::MapCache maps;
  std::optional<fmt::ostream> log;
  if (!options.loss_log.empty()) {
    log.emplace(fmt::output_file(options.loss_log.string()));
    if (!options.provenance.empty()) {
      log->print("# {}\n", options.provenance);
    }
    log->print("step,epoch,L_c,L_r,L,m,lr\n");
  }

  PretrainSummary summary;
  std::uint64_t k = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    sampler.start_epoch(static_cast<std::uint64_t>(epoch));
    double epoch_total = 0.0;
    std::size_t epoch_steps = 0;
    while (auto batch = sampler.next()) {
      if (batch->num_agents() < 2) {
        ++summary.skipped_batches;
        spdlog::debug("pretrain: skipping batch with {} agents", batch->num_agents());
        continue;
      }
      const PretrainInputs in = prepare_pretrain_inputs(*batch, maps, k_map, model.config().recon_target);
      const StepReport r = pretrain_step(model, in, schedule, k, cfg);
      if (log) {
        log->print(
          "{},{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", k, epoch + 1, r.losses.l_c, r.losses.l_r, r.losses.loss,
          r.momentum, r.lr);
      }
      epoch_total += r.losses.loss;
      ++epoch_steps;
      ++k;
    }
    const double mean = epoch_steps ? epoch_total / static_cast<double>(epoch_steps) : 0.0;
    summary.epoch_mean_loss.push_back(mean);
    spdlog::info("pretrain: epoch {}/{} mean loss {:.5f} over {} steps", epoch + 1, cfg.epochs, mean, epoch_steps);
    if (!options.checkpoint.empty() && cfg.checkpoint_every_epochs > 0 && (epoch + 1) % cfg.checkpoint_every_epochs == 0 &&
        epoch + 1 < cfg.epochs) {
      nn::write_checkpoint(epoch_checkpoint_path(options.checkpoint, epoch + 1), model.to_checkpoint());
    }
  }
  summary.steps = k;
  summary.rejected_pairs = sampler.rejected_pairs();
  if (!options.checkpoint.empty()) {
    nn::write_checkpoint(options.checkpoint, model.to_checkpoint());
  }
  return summary;
}

}  // namespace trajssl::ssl

#endif  // TRAJSSL__SSL__PRETRAINER_HPP_
