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

#include "test_util.hpp"

#include "trajssl/errors.hpp"
#include "trajssl/finetune/inputs.hpp"
#include "trajssl/nn/gradcheck.hpp"
#include "trajssl/sampler/bank.hpp"
#include "trajssl/ssl/heads.hpp"
#include "trajssl/ssl/inputs.hpp"
#include "trajssl/ssl/losses.hpp"
#include "trajssl/ssl/pretrainer.hpp"
#include "trajssl/ssl/recon_target.hpp"
#include "trajssl/synth/generator.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace trajssl::ssl
{
namespace
{
using Mat = nn::Tensor<double>;
using scenario::Scenario;

Mat random_matrix(Rng & rng, Eigen::Index r, Eigen::Index c)
{
  Mat m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    m.data()[k] = rng.normal();
  }
  return m;
}

double cosine(const Eigen::RowVectorXd & a, const Eigen::RowVectorXd & b) { return a.dot(b) / (a.norm() * b.norm()); }

/// Contrastive objective evaluated term by term from similarity matrices.
double tcl_from_similarities(const Mat & intra, const Mat & cross, double tau)
{
  const Eigen::Index n = intra.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double denom = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) {
        denom += std::exp(intra(i, j) / tau);
      }
      denom += std::exp(cross(i, j) / tau);
    }
    total += -std::log(std::exp(cross(i, i) / tau) / denom);
  }
  return total / static_cast<double>(n);
}

double tcl_oracle(const Mat & z, const Mat & zm, double tau)
{
  const Eigen::Index n = z.rows();
  Mat intra(n, n);
  Mat cross(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      intra(i, j) = cosine(z.row(i), z.row(j));
      cross(i, j) = cosine(z.row(i), zm.row(j));
    }
  }
  return tcl_from_similarities(intra, cross, tau);
}

sampler::Batch fixed_batch(const std::vector<const Scenario *> & scenes, int t, int t_prime, int T_h)
{
  sampler::Batch b;
  for (const auto * s : scenes) {
    sampler::SubScenarioPair p{{s, t, T_h}, {s, t_prime, T_h}, sampler::eligible_agents(*s, t, t_prime, T_h)};
    for (const int track : p.eligible) {
      b.agents.push_back({static_cast<int>(b.pairs.size()), track});
    }
    b.pairs.push_back(std::move(p));
  }
  return b;
}

encoder::EncoderConfig small_encoder()
{
  encoder::EncoderConfig c;
  c.embed_dim = 8;
  c.hidden_dim = 8;
  c.k_map = 2;
  return c;
}

SslConfig small_ssl()
{
  SslConfig c;
  c.head_hidden = 8;
  return c;
}

TEST(Tcl, SingleAgentIsZero)
{
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = tcl_loss<double>(random_matrix(rng, 1, 5), random_matrix(rng, 1, 5), 0.1);
    EXPECT_LT(std::abs(r.loss), 1e-12);
    EXPECT_EQ(r.grad.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Tcl, OrthogonalPairExample)
{
  Mat z(2, 2);
  z << 1, 0, 0, 1;
  const auto r = tcl_loss<double>(z, z, 1.0);
  EXPECT_NEAR(r.loss, std::log(2.0 + std::exp(1.0)) - 1.0, 1e-12);
  EXPECT_NEAR(r.loss, 0.551444, 1e-6);
  EXPECT_NEAR(r.loss, tcl_oracle(z, z, 1.0), 1e-12);
}

TEST(Tcl, MatchesOracleOnRandomInputs)
{
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + trial % 9;
    const Mat z = random_matrix(rng, n, 6);
    const Mat zm = random_matrix(rng, n, 6);
    const double tau = rng.uniform(0.05, 2.0);
    const auto r = tcl_loss<double>(z, zm, tau);
    EXPECT_NEAR(r.loss, tcl_oracle(z, zm, tau), 1e-9 * std::max(1.0, r.loss));
    EXPECT_GE(r.loss, 0.0);
  }
}

TEST(Tcl, ScaleAndPermutationInvariance)
{
  Rng rng(3);
  const Mat z = random_matrix(rng, 6, 4);
  const Mat zm = random_matrix(rng, 6, 4);
  const double base = tcl_loss<double>(z, zm, 0.1).loss;
  EXPECT_NEAR(tcl_loss<double>(Mat(3.0 * z), Mat(3.0 * zm), 0.1).loss, base, 1e-12);
  const std::vector<int> perm{4, 2, 0, 5, 1, 3};
  Mat pz(6, 4);
  Mat pzm(6, 4);
  for (int i = 0; i < 6; ++i) {
    pz.row(i) = z.row(perm[i]);
    pzm.row(i) = zm.row(perm[i]);
  }
  EXPECT_NEAR(tcl_loss<double>(pz, pzm, 0.1).loss, base, 1e-12);
}

TEST(Tcl, IncreasingPositiveSimilarityLowersLoss)
{
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 2 + trial % 5;
    Mat intra = Mat::Zero(n, n);
    Mat cross(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        cross(i, j) = rng.uniform(-1, 1);
        if (j > i) {
          intra(i, j) = intra(j, i) = rng.uniform(-1, 1);
        }
      }
    }
    const Eigen::Index i = trial % n;
    const double before = tcl_from_similarities(intra, cross, 0.2);
    cross(i, i) += 1e-3;
    EXPECT_LT(tcl_from_similarities(intra, cross, 0.2), before);
  }
}

TEST(Tcl, GradientMatchesFiniteDifferences)
{
  Rng rng(5);
  const Mat z = random_matrix(rng, 5, 4);
  const Mat zm = random_matrix(rng, 5, 4);
  const auto r = tcl_loss<double>(z, zm, 0.3);
  Mat num(5, 4);
  Mat probe = z;
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    const double saved = probe.data()[k];
    probe.data()[k] = saved + 1e-5;
    const double plus = tcl_loss<double>(probe, zm, 0.3).loss;
    probe.data()[k] = saved - 1e-5;
    const double minus = tcl_loss<double>(probe, zm, 0.3).loss;
    probe.data()[k] = saved;
    num.data()[k] = (plus - minus) / 2e-5;
  }
  EXPECT_LT(nn::max_relative_error<double>(r.grad, num), 1e-6);
}

TEST(Tcl, DegenerateEmbeddingThrows)
{
  Mat z = Mat::Ones(3, 4);
  z.row(1).setZero();
  EXPECT_THROW(tcl_loss<double>(z, Mat::Ones(3, 4), 0.1), DegenerateEmbedding);
  EXPECT_THROW(tcl_loss<double>(Mat::Ones(3, 4), Mat::Ones(2, 4), 0.1), ShapeError);
}

TEST(Trl, Examples)
{
  Rng rng(6);
  const Mat target = random_matrix(rng, 3, 10);
  const std::vector<std::uint8_t> valid(15, 1);
  EXPECT_EQ(trl_loss<double>(target, target, valid).loss, 0.0);
  Mat shifted = target;
  for (Eigen::Index s = 0; s < 5; ++s) {
    shifted.col(2 * s).array() += 1.0;
  }
  EXPECT_NEAR(trl_loss<double>(shifted, target, valid).loss, 1.0, 1e-12);
}

TEST(Trl, MaskingExcludesInvalidSteps)
{
  Rng rng(7);
  const Mat decoded = random_matrix(rng, 4, 12);
  Mat target = random_matrix(rng, 4, 12);
  std::vector<std::uint8_t> valid(24);
  for (auto & v : valid) {
    v = rng.bernoulli(0.6) ? 1 : 0;
  }
  valid[0] = 1;
  const auto base = trl_loss<double>(decoded, target, valid);
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < 4; ++i) {
    for (int s = 0; s < 6; ++s) {
      if (valid[i * 6 + s]) {
        sum += std::abs(decoded(i, 2 * s) - target(i, 2 * s)) + std::abs(decoded(i, 2 * s + 1) - target(i, 2 * s + 1));
        ++count;
      }
    }
  }
  EXPECT_NEAR(base.loss, sum / count, 1e-12);
  Mat garbage_target = target;
  Mat garbage_decoded = decoded;
  for (int i = 0; i < 4; ++i) {
    for (int s = 0; s < 6; ++s) {
      if (!valid[i * 6 + s]) {
        garbage_target(i, 2 * s) = 1e9;
        garbage_decoded(i, 2 * s + 1) = -1e9;
      }
    }
  }
  const auto g = trl_loss<double>(garbage_decoded, garbage_target, valid);
  EXPECT_EQ(g.loss, base.loss);
  EXPECT_EQ(g.grad, base.grad);
  EXPECT_THROW(trl_loss<double>(decoded, target, std::vector<std::uint8_t>(24, 0)), EmptyTarget);
}

TEST(CombinedLoss, Examples)
{
  EXPECT_DOUBLE_EQ(combined_loss(0.5, 0.3, 1.0), 0.8);
  EXPECT_DOUBLE_EQ(combined_loss(0.5, 0.3, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(combined_loss(0.0, 0.3, 2.0), 0.6);
}

TEST(ReconTarget, StepSets)
{
  const auto other = recon_steps(ReconTarget::kOtherWindow, 50, 0, 30, 20);
  ASSERT_EQ(other.size(), 20u);
  EXPECT_EQ(other.front(), 30);
  EXPECT_EQ(other.back(), 49);
  const auto comp = recon_steps(ReconTarget::kComplementOfInput, 50, 0, 30, 20);
  ASSERT_EQ(comp.size(), 30u);
  EXPECT_EQ(comp.front(), 20);
  EXPECT_EQ(comp.back(), 49);
  EXPECT_EQ(recon_steps(ReconTarget::kEntireScenario, 50, 10, 30, 20).size(), 50u);
  const auto input = recon_steps(ReconTarget::kInputWindow, 50, 10, 30, 20);
  EXPECT_EQ(input.front(), 10);
  EXPECT_EQ(input.back(), 29);
  for (const auto t : {ReconTarget::kInputWindow, ReconTarget::kEntireScenario, ReconTarget::kComplementOfInput,
                       ReconTarget::kOtherWindow}) {
    EXPECT_EQ(recon_target_from_string(to_string(t)), t);
    EXPECT_EQ(static_cast<int>(recon_steps(t, 50, 25, 0, 20).size()), recon_length(t, 50, 20));
  }
  EXPECT_THROW(recon_target_from_string("bogus"), ParseError);
  EXPECT_EQ(SslConfig{}.recon_target, ReconTarget::kOtherWindow);
}

TEST(ReconTarget, CoordinatesInWindowAFrame)
{
  const Scenario s = testing::random_scenario(8, 3, 20, 30, 0.0);
  const sampler::Batch b = fixed_batch({&s}, 5, 27, 20);
  const ReconSample r = select_recon_target(b.pairs[0], 1, ReconTarget::kOtherWindow);
  const scenario::Frame f = encoder::window_frame(s.tracks[1], 5, 20);
  ASSERT_EQ(r.points.size(), 20u);
  for (int k = 0; k < 20; ++k) {
    EXPECT_EQ(r.points[k], f.to_local(s.tracks[1].points[27 + k]));
    EXPECT_EQ(r.valid[k], 1);
  }
}

TEST(Heads, CumulateStepsAdjoint)
{
  Rng rng(9);
  const Mat x = random_matrix(rng, 3, 2 * 2 * 7);
  const Mat y = random_matrix(rng, 3, 2 * 2 * 7);
  const Mat cx = cumulate_steps<double>(x, 7);
  EXPECT_NEAR(cx(0, 2), x(0, 0) + x(0, 2), 1e-12);
  EXPECT_NEAR(cx(0, 2 * 7 + 1), x(0, 2 * 7 + 1), 1e-12);
  const double lhs = (cx.array() * y.array()).sum();
  const double rhs = (x.array() * cumulate_steps_backward<double>(y, 7).array()).sum();
  EXPECT_NEAR(lhs, rhs, 1e-10);
}

TEST(SslModel, BranchLayoutAndInitialCopy)
{
  SslModel<double> model(small_encoder(), small_ssl(), 50, 20, 1);
  const auto & on = model.online();
  const auto & mo = model.momentum();
  for (std::size_t i = 0; i < mo.size(); ++i) {
    const auto & p = mo[i];
    EXPECT_TRUE(p.name.rfind("encoder.", 0) == 0 || p.name.rfind("projector.", 0) == 0) << p.name;
    EXPECT_EQ(p.value, on.at(p.name).value);
  }
  EXPECT_NE(on.find("predictor.fc1.weight"), nullptr);
  EXPECT_NE(on.find("decoder.fc2.weight"), nullptr);
  EXPECT_EQ(mo.find("predictor.fc1.weight"), nullptr);
  EXPECT_EQ(mo.find("decoder.fc2.weight"), nullptr);
  EXPECT_EQ(on.at("decoder.fc2.weight").value.cols(), 40);

  SslConfig entire = small_ssl();
  entire.recon_target = ReconTarget::kEntireScenario;
  SslModel<double> wide(small_encoder(), entire, 50, 20, 1);
  EXPECT_EQ(wide.online().at("decoder.fc2.weight").value.cols(), 100);
}

TEST(SslModel, StopGradientOnMomentumBranch)
{
  std::vector<Scenario> scenes{testing::random_scenario(10, 3, 20, 30, 0.0), testing::random_scenario(11, 2, 20, 30, 0.0)};
  const sampler::Batch b = fixed_batch({&scenes[0], &scenes[1]}, 0, 25, 20);
  encoder::MapCache maps;
  const PretrainInputs in = prepare_pretrain_inputs(b, maps, 2, ReconTarget::kOtherWindow);
  SslModel<double> model(small_encoder(), small_ssl(), 50, 20, 2);
  model.online().zero_grad();
  model.momentum().zero_grad();
  model.forward_backward(in, true);
  double online_grad = 0.0;
  for (std::size_t i = 0; i < model.online().size(); ++i) {
    online_grad += model.online()[i].grad.cwiseAbs().sum();
  }
  EXPECT_GT(online_grad, 0.0);
  for (std::size_t i = 0; i < model.momentum().size(); ++i) {
    EXPECT_EQ(model.momentum()[i].grad.cwiseAbs().maxCoeff(), 0.0) << model.momentum()[i].name;
  }
  const auto fd = nn::finite_diff_grad<double>(
    [&] { return model.forward_backward(in, false).loss; }, model.momentum(), 1e-5, {"encoder.step_out.weight"});
  EXPECT_GT(fd.at("encoder.step_out.weight").cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SslModel, ObjectiveToggles)
{
  const Scenario s = testing::random_scenario(12, 4, 20, 30, 0.0);
  const sampler::Batch b = fixed_batch({&s}, 30, 0, 20);
  encoder::MapCache maps;
  const PretrainInputs in = prepare_pretrain_inputs(b, maps, 2, ReconTarget::kOtherWindow);
  SslModel<double> both(small_encoder(), small_ssl(), 50, 20, 3);
  const LossReport r = both.forward_backward(in, false);
  EXPECT_DOUBLE_EQ(r.loss, r.l_c + r.l_r);
  EXPECT_EQ(r.agents, 4);

  SslConfig tcl_only = small_ssl();
  tcl_only.lambda = 0.0;
  SslModel<double> a(small_encoder(), tcl_only, 50, 20, 3);
  const LossReport ra = a.forward_backward(in, false);
  EXPECT_DOUBLE_EQ(ra.loss, ra.l_c);

  SslConfig trl_only = small_ssl();
  trl_only.use_tcl = false;
  SslModel<double> t(small_encoder(), trl_only, 50, 20, 3);
  const LossReport rt = t.forward_backward(in, false);
  EXPECT_EQ(rt.l_c, 0.0);
  EXPECT_DOUBLE_EQ(rt.loss, rt.l_r);

  SslConfig neither = small_ssl();
  neither.use_tcl = false;
  neither.use_trl = false;
  EXPECT_THROW(neither.validate(), ConfigError);
  SslConfig bad_tau = small_ssl();
  bad_tau.tau = 0.0;
  EXPECT_THROW(bad_tau.validate(), ConfigError);
  SslConfig bad_lambda = small_ssl();
  bad_lambda.lambda = -1.0;
  EXPECT_THROW(bad_lambda.validate(), ConfigError);
}

TEST(SslModel, SingleAgentBatchTooSmall)
{
  const Scenario s = testing::random_scenario(13, 1, 20, 30, 0.0);
  const sampler::Batch b = fixed_batch({&s}, 0, 30, 20);
  encoder::MapCache maps;
  const PretrainInputs in = prepare_pretrain_inputs(b, maps, 2, ReconTarget::kOtherWindow);
  SslModel<double> model(small_encoder(), small_ssl(), 50, 20, 3);
  EXPECT_THROW(model.forward_backward(in, false), BatchTooSmall);
}

TEST(PretrainStep, FrozenMomentumAndZeroLearningRate)
{
  const Scenario s = testing::random_scenario(14, 4, 20, 30, 0.0);
  const sampler::Batch b = fixed_batch({&s}, 0, 30, 20);
  encoder::MapCache maps;
  const PretrainInputs in = prepare_pretrain_inputs(b, maps, 2, ReconTarget::kOtherWindow);
  SslModel<double> model(small_encoder(), small_ssl(), 50, 20, 4);
  PretrainConfig cfg;
  cfg.optim.lr = 0.0;
  cfg.optim.weight_decay = 0.0;
  const auto before = model.momentum();
  const auto r1 = pretrain_step(model, in, nn::EmaSchedule{1.0, 10}, 0, cfg);
  const auto r2 = pretrain_step(model, in, nn::EmaSchedule{1.0, 10}, 1, cfg);
  EXPECT_EQ(r1.losses.loss, r2.losses.loss);
  EXPECT_EQ(r1.momentum, 1.0);
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(model.momentum()[i].value, before[i].value);
  }
}

TEST(PretrainInputs, InputWindowMatchesDownstreamObservation)
{
  const Scenario s = testing::random_scenario(15, 4, 20, 30, 0.0);
  const sampler::Batch b = fixed_batch({&s}, 0, 30, 20);
  encoder::MapCache maps;
  const PretrainInputs in = prepare_pretrain_inputs(b, maps, 4, ReconTarget::kOtherWindow);
  const finetune::SceneInput scene = finetune::prepare_scene(s, 4);
  const int target = s.target_index();
  int k = 0;
  while (b.agents[k].track != target) {
    ++k;
  }
  const Eigen::Index pre = in.online.rows[k];
  const Eigen::Index down = scene.target_row;
  EXPECT_EQ(
    Mat(in.online.batch.features.middleRows(pre * 20, 20)), Mat(scene.window.features.middleRows(down * 20, 20)));
}

TEST(PretrainLoop, StepCountLogAndCheckpoints)
{
  const auto p = *synth::stock_profile("argo-like");
  std::vector<Scenario> raw;
  for (std::uint64_t i = 0; i < 10; ++i) {
    raw.push_back(synth::gen_scenario(p, synth::scenario_seed(21, i)));
  }
  const sampler::DataBank bank = sampler::build_bank(raw, {}, 0);
  ASSERT_EQ(bank.size(), 10u);
  SslModel<float> model(small_encoder(), small_ssl(), 50, 20, 5);
  PretrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 5;
  cfg.checkpoint_every_epochs = 1;
  const auto dir = std::filesystem::temp_directory_path() / "trajssl_pretrain_loop";
  std::filesystem::create_directories(dir);
  const auto ckpt = dir / "model.ckpt";
  const auto log = dir / "loss.csv";
  const auto summary = pretrain_loop(bank, model, cfg, 2, 9, {ckpt, log, "test"});
  EXPECT_EQ(summary.steps, 4u);
  EXPECT_EQ(summary.epoch_mean_loss.size(), 2u);
  std::ifstream in(log);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    lines.push_back(line);
  }
  ASSERT_EQ(lines.size(), 2u + summary.steps);
  EXPECT_EQ(lines[0], "# test");
  EXPECT_EQ(lines[1], "step,epoch,L_c,L_r,L,m,lr");
  EXPECT_TRUE(std::filesystem::exists(epoch_checkpoint_path(ckpt, 1)));
  EXPECT_EQ(epoch_checkpoint_path(ckpt, 1).filename().string(), "model.epoch001.ckpt");
  const nn::Checkpoint c = nn::read_checkpoint(ckpt);
  EXPECT_NE(c.find("encoder.step_in.weight"), nullptr);
  EXPECT_NE(c.find("momentum.encoder.step_in.weight"), nullptr);
  EXPECT_EQ(c.find("momentum.decoder.fc1.weight"), nullptr);
  SslModel<float> restored(small_encoder(), small_ssl(), 50, 20, 99);
  restored.load_checkpoint(c);
  EXPECT_EQ(restored.online().at("decoder.fc2.weight").value, model.online().at("decoder.fc2.weight").value);
  EXPECT_EQ(restored.momentum().at("encoder.key.weight").value, model.momentum().at("encoder.key.weight").value);
  std::filesystem::remove_all(dir);
}

TEST(PretrainLoop, DeterministicAcrossRuns)
{
  const auto p = *synth::stock_profile("argo-like");
  std::vector<Scenario> raw;
  for (std::uint64_t i = 0; i < 12; ++i) {
    raw.push_back(synth::gen_scenario(p, synth::scenario_seed(22, i)));
  }
  const sampler::DataBank bank = sampler::build_bank(raw, {}, 0);
  PretrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  std::vector<double> losses;
  nn::Tensor<float> w[2];
  for (int run = 0; run < 2; ++run) {
    SslModel<float> model(small_encoder(), small_ssl(), 50, 20, 6);
    const auto s = pretrain_loop(bank, model, cfg, 2, 3);
    losses.push_back(s.epoch_mean_loss.back());
    w[run] = model.momentum().at("encoder.step_in.weight").value;
  }
  EXPECT_EQ(losses[0], losses[1]);
  EXPECT_EQ(w[0], w[1]);
}

}  // namespace
}  // namespace trajssl::ssl
