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

#ifndef TRAJSSL__FINETUNE__MODEL_HPP_
#define TRAJSSL__FINETUNE__MODEL_HPP_

#include "trajssl/encoder/reference_encoder.hpp"
#include "trajssl/errors.hpp"
#include "trajssl/finetune/inputs.hpp"
#include "trajssl/finetune/metrics.hpp"
#include "trajssl/nn/checkpoint.hpp"
#include "trajssl/nn/fpenv.hpp"
#include "trajssl/nn/optim.hpp"
#include "trajssl/rng.hpp"
#include "trajssl/sampler/pair_sampler.hpp"
#include "trajssl/ssl/heads.hpp"

#include <fmt/format.h>
#include <fmt/os.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace trajssl::finetune
{
struct FinetuneConfig
{
  int epochs{10};
  std::size_t batch_size{32};
  int modes{6};
  int head_hidden{64};
  nn::AdamWConfig optim;

  /// Throws ConfigError.
  void validate() const
  {
    if (epochs < 0) {
      throw ConfigError(fmt::format("finetune.epochs: must be >= 0, got {}", epochs));
    }
    if (batch_size < 1) {
      throw ConfigError("finetune.batch_size: must be >= 1");
    }
    if (modes < 1) {
      throw ConfigError(fmt::format("finetune.modes: must be >= 1, got {}", modes));
    }
    if (head_hidden < 1) {
      throw ConfigError(fmt::format("finetune.head_hidden: must be >= 1, got {}", head_hidden));
    }
  }
};

/**
 * @brief Per-agent multimodal head: K trajectories of T_f positions plus K mode logits.
 *
 * Output row layout is K * T_f * 2 per-step displacements, accumulated into positions, followed
 * by K logits.
 */
template <typename S>
class PredictionHead
{
public:
  PredictionHead(nn::ParamStore<S> & store, const std::string & name, int embed_dim, int hidden, int modes, int T_f)
  : modes_(modes), T_f_(T_f), mlp_(store, name, embed_dim, hidden, modes * T_f * 2 + modes, ssl::NormKind::kLayer)
  {
  }

  struct Output
  {
    /// (N, K * T_f * 2).
    nn::Tensor<S> positions;
    /// (N, K).
    nn::Tensor<S> logits;
  };

  Output forward(const nn::Tensor<S> & embeddings)
  {
    const nn::Tensor<S> raw = mlp_.forward(embeddings);
    const Eigen::Index width = static_cast<Eigen::Index>(modes_) * T_f_ * 2;
    return {ssl::cumulate_steps<S>(raw.leftCols(width), T_f_), raw.rightCols(modes_)};
  }

  nn::Tensor<S> backward(const nn::Tensor<S> & d_positions, const nn::Tensor<S> & d_logits)
  {
    nn::Tensor<S> d_raw(d_positions.rows(), d_positions.cols() + d_logits.cols());
    d_raw.leftCols(d_positions.cols()) = ssl::cumulate_steps_backward<S>(d_positions, T_f_);
    d_raw.rightCols(d_logits.cols()) = d_logits;
    return mlp_.backward(d_raw);
  }

  int modes() const noexcept { return modes_; }
  int future_steps() const noexcept { return T_f_; }

private:
  int modes_;
  int T_f_;
  ssl::MlpHead<S> mlp_;
};

struct FinetuneLoss
{
  double loss{0.0};
  double regression{0.0};
  double classification{0.0};
};

/**
 * @brief Encoder plus prediction head on one parameter store (`encoder.*`, `head.*`).
 */
template <typename S>
class MotionModel
{
public:
  MotionModel(
    const encoder::EncoderConfig & enc, int modes, int T_f, int head_hidden, std::uint64_t seed,
    encoder::EncoderFactory<S> factory = {})
  : seed_(seed)
  {
    if (!factory) {
      factory = encoder::reference_encoder_factory<S>(enc);
    }
    encoder_ = factory(store_, "encoder");
    head_.emplace(store_, "head", encoder_->embed_dim(), head_hidden, modes, T_f);
    nn::initialize(store_, seed);
  }

  MotionModel(const MotionModel &) = delete;
  MotionModel & operator=(const MotionModel &) = delete;

  /**
   * @brief Loads every `encoder.*` tensor from `ckpt`, re-seeds the head and resets AdamW state.
   *
   * Throws CheckpointMismatch naming the first missing or mismatched tensor.
   */
  void init_from_pretrained(const nn::Checkpoint & ckpt)
  {
    nn::initialize(store_, seed_);
    nn::load_store(ckpt, store_, "encoder.");
    store_.reset_optimizer();
  }

  typename PredictionHead<S>::Output forward(const std::vector<const SceneInput *> & scenes)
  {
    const encoder::WindowBatch batch = stack_scenes(scenes, target_rows_);
    const nn::Tensor<S> h = encoder_->forward(batch);
    nn::Tensor<S> z(static_cast<Eigen::Index>(target_rows_.size()), h.cols());
    for (std::size_t i = 0; i < target_rows_.size(); ++i) {
      z.row(static_cast<Eigen::Index>(i)) = h.row(target_rows_[i]);
    }
    encoded_rows_ = h.rows();
    return head_->forward(z);
  }

  void backward(const nn::Tensor<S> & d_positions, const nn::Tensor<S> & d_logits)
  {
    const nn::Tensor<S> dz = head_->backward(d_positions, d_logits);
    nn::Tensor<S> dh = nn::Tensor<S>::Zero(encoded_rows_, dz.cols());
    for (std::size_t i = 0; i < target_rows_.size(); ++i) {
      dh.row(target_rows_[i]) += dz.row(static_cast<Eigen::Index>(i));
    }
    encoder_->backward(dh);
  }

  /**
   * @brief Winner-take-all objective, averaged over scenes.
   *
   * Per scene the winner is the mode with the smallest endpoint error on the valid future; the
   * loss is its mean per-step L1 distance |dx| + |dy| plus the cross-entropy of the mode logits
   * against the winner. With `backward` accumulates gradients in the store.
   */
  FinetuneLoss forward_backward(const std::vector<const SceneInput *> & scenes, bool backward)
  {
    if (scenes.empty()) {
      throw ShapeError("finetune: empty batch");
    }
    const auto out = forward(scenes);
    const int K = head_->modes();
    const int T_f = head_->future_steps();
    const double inv_b = 1.0 / static_cast<double>(scenes.size());
    nn::Tensor<S> d_pos = nn::Tensor<S>::Zero(out.positions.rows(), out.positions.cols());
    nn::Tensor<S> d_logits = nn::Tensor<S>::Zero(out.logits.rows(), out.logits.cols());
    FinetuneLoss loss;
    for (std::size_t b = 0; b < scenes.size(); ++b) {
      const auto i = static_cast<Eigen::Index>(b);
      const Trajectory & truth = scenes[b]->future;
      const auto steps = static_cast<Eigen::Index>(truth.size());
      if (steps > T_f) {
        throw ShapeError("finetune: ground truth longer than the prediction horizon");
      }
      const Eigen::Index end = steps - 1;
      int winner = 0;
      double best = 0.0;
      for (int k = 0; k < K; ++k) {
        const Eigen::Index c = 2 * (static_cast<Eigen::Index>(k) * T_f + end);
        const double e = std::hypot(
          static_cast<double>(out.positions(i, c)) - truth[end].x, static_cast<double>(out.positions(i, c + 1)) - truth[end].y);
        if (k == 0 || e < best) {
          best = e;
          winner = k;
        }
      }
      double l1 = 0.0;
      const S g = static_cast<S>(inv_b / static_cast<double>(steps));
      for (Eigen::Index s = 0; s < steps; ++s) {
        const Eigen::Index c = 2 * (static_cast<Eigen::Index>(winner) * T_f + s);
        const double dx = static_cast<double>(out.positions(i, c)) - truth[s].x;
        const double dy = static_cast<double>(out.positions(i, c + 1)) - truth[s].y;
        l1 += std::abs(dx) + std::abs(dy);
        d_pos(i, c) = dx > 0.0 ? g : (dx < 0.0 ? -g : S(0));
        d_pos(i, c + 1) = dy > 0.0 ? g : (dy < 0.0 ? -g : S(0));
      }
      const Eigen::RowVectorXd logits = out.logits.row(i).template cast<double>();
      const double peak = logits.maxCoeff();
      const Eigen::RowVectorXd e = (logits.array() - peak).exp().matrix();
      const double z = e.sum();
      const double ce = peak + std::log(z) - logits(winner);
      Eigen::RowVectorXd dl = e / z;
      dl(winner) -= 1.0;
      d_logits.row(i) = (dl * inv_b).template cast<S>();
      loss.regression += l1 / static_cast<double>(steps) * inv_b;
      loss.classification += ce * inv_b;
    }
    loss.loss = loss.regression + loss.classification;
    if (backward) {
      this->backward(d_pos, d_logits);
    }
    return loss;
  }

  /// Modes in the target frame and softmax probabilities, one set per scene.
  std::vector<PredictionSet> predict(const std::vector<const SceneInput *> & scenes)
  {
    std::vector<PredictionSet> out;
    if (scenes.empty()) {
      return out;
    }
    const auto raw = forward(scenes);
    const int K = head_->modes();
    const int T_f = head_->future_steps();
    for (Eigen::Index i = 0; i < raw.positions.rows(); ++i) {
      PredictionSet p;
      const Eigen::RowVectorXd logits = raw.logits.row(i).template cast<double>();
      const Eigen::RowVectorXd e = (logits.array() - logits.maxCoeff()).exp().matrix();
      for (int k = 0; k < K; ++k) {
        Trajectory mode;
        for (int s = 0; s < T_f; ++s) {
          const Eigen::Index c = 2 * (static_cast<Eigen::Index>(k) * T_f + s);
          mode.push_back({static_cast<double>(raw.positions(i, c)), static_cast<double>(raw.positions(i, c + 1))});
        }
        p.modes.push_back(std::move(mode));
        p.probs.push_back(e(k) / e.sum());
      }
      out.push_back(std::move(p));
    }
    return out;
  }

  nn::Checkpoint to_checkpoint() const
  {
    nn::Checkpoint ckpt;
    ckpt.has_moments = true;
    nn::append_store(ckpt, store_);
    return ckpt;
  }

  /// Restores every tensor and the optimizer state from a checkpoint written by to_checkpoint.
  void load_checkpoint(const nn::Checkpoint & ckpt) { nn::load_store(ckpt, store_, {}, {}, true); }

  nn::ParamStore<S> & store() noexcept { return store_; }
  const nn::ParamStore<S> & store() const noexcept { return store_; }
  int modes() const noexcept { return head_->modes(); }
  int future_steps() const noexcept { return head_->future_steps(); }

private:
  std::uint64_t seed_;
  nn::ParamStore<S> store_;
  std::unique_ptr<encoder::Encoder<S>> encoder_;
  std::optional<PredictionHead<S>> head_;
  std::vector<int> target_rows_;
  Eigen::Index encoded_rows_{0};
};

template <typename S>
FinetuneLoss finetune_step(MotionModel<S> & model, const std::vector<const SceneInput *> & scenes, const nn::AdamWConfig & optim)
{
  model.store().zero_grad();
  const FinetuneLoss loss = model.forward_backward(scenes, true);
  nn::adamw_step(model.store(), optim);
  return loss;
}

struct FinetuneOptions
{
  std::filesystem::path checkpoint;
  std::filesystem::path loss_log;
  std::string provenance;
};

struct FinetuneSummary
{
  std::uint64_t steps{0};
  std::vector<double> epoch_mean_loss;
};

/**
 * @brief Epochs of shuffled scene batches; log columns step, epoch, L, L_reg, L_cls, lr.
 */
template <typename S>
FinetuneSummary finetune_loop(
  const std::vector<SceneInput> & scenes, MotionModel<S> & model, const FinetuneConfig & cfg, std::uint64_t seed,
  const FinetuneOptions & options = {})
{
  cfg.validate();
  const nn::ScopedFlushDenormals flush;
  if (scenes.empty()) {
    throw EmptyBank("finetune: no scenes");
  }
  sampler::EpochOrder order(scenes.size(), Rng::derive(seed, 0x66696e65ULL).key());
  std::optional<fmt::ostream> log;
  if (!options.loss_log.empty()) {
    log.emplace(fmt::output_file(options.loss_log.string()));
    if (!options.provenance.empty()) {
      log->print("# {}\n", options.provenance);
    }
    log->print("step,epoch,L,L_reg,L_cls,lr\n");
  }
  FinetuneSummary summary;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    order.start_epoch(static_cast<std::uint64_t>(epoch));
    double total = 0.0;
    std::size_t count = 0;
    while (auto idx = order.next(cfg.batch_size)) {
      std::vector<const SceneInput *> batch;
      for (const auto i : *idx) {
        batch.push_back(&scenes[i]);
      }
      const FinetuneLoss l = finetune_step(model, batch, cfg.optim);
      if (log) {
        log->print(
          "{},{},{:.9g},{:.9g},{:.9g},{:.9g}\n", summary.steps, epoch + 1, l.loss, l.regression, l.classification,
          cfg.optim.lr);
      }
      total += l.loss;
      ++count;
      ++summary.steps;
    }
    summary.epoch_mean_loss.push_back(count ? total / static_cast<double>(count) : 0.0);
    spdlog::info("finetune: epoch {}/{} mean loss {:.5f}", epoch + 1, cfg.epochs, summary.epoch_mean_loss.back());
  }
  if (!options.checkpoint.empty()) {
    nn::write_checkpoint(options.checkpoint, model.to_checkpoint());
  }
  return summary;
}

/**
 * @brief Metrics of the model's predictions for every scene, in scene order.
 *
 * Throws EmptyEvaluation for an empty list.
 */
template <typename S>
std::vector<CaseMetrics> evaluate_cases(
  MotionModel<S> & model, const std::vector<SceneInput> & scenes, const MetricsConfig & cfg = {},
  std::size_t batch_size = 64)
{
  if (scenes.empty()) {
    throw EmptyEvaluation("evaluate: no scenes");
  }
  const nn::ScopedFlushDenormals flush;
  std::vector<CaseMetrics> cases;
  cases.reserve(scenes.size());
  for (std::size_t begin = 0; begin < scenes.size(); begin += batch_size) {
    std::vector<const SceneInput *> batch;
    for (std::size_t i = begin; i < std::min(scenes.size(), begin + batch_size); ++i) {
      batch.push_back(&scenes[i]);
    }
    const auto predictions = model.predict(batch);
    for (std::size_t j = 0; j < batch.size(); ++j) {
      cases.push_back(case_metrics(predictions[j].modes, batch[j]->future, cfg));
    }
  }
  return cases;
}

template <typename S>
MetricsReport evaluate(MotionModel<S> & model, const std::vector<SceneInput> & scenes, const MetricsConfig & cfg = {})
{
  return aggregate(evaluate_cases(model, scenes, cfg));
}

}  // namespace trajssl::finetune

#endif  // TRAJSSL__FINETUNE__MODEL_HPP_
