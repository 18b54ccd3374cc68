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

#include "trajssl/cli/gradcheck_suites.hpp"
#include "trajssl/errors.hpp"
#include "trajssl/finetune/inputs.hpp"
#include "trajssl/finetune/metrics.hpp"
#include "trajssl/finetune/model.hpp"
#include "trajssl/nn/gradcheck.hpp"
#include "trajssl/ssl/pretrainer.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace trajssl::finetune
{
namespace
{
using scenario::Scenario;
using scenario::TrajPoint;

encoder::EncoderConfig small_encoder()
{
  encoder::EncoderConfig c;
  c.embed_dim = 8;
  c.hidden_dim = 8;
  c.k_map = 2;
  return c;
}

Trajectory line(double dx, double dy, int steps, double offset_x = 0.0, double offset_y = 0.0)
{
  Trajectory t;
  for (int k = 1; k <= steps; ++k) {
    t.push_back({k * dx + offset_x, k * dy + offset_y});
  }
  return t;
}

TEST(Metrics, ExactModeGivesZero)
{
  const Trajectory truth = line(1.0, 0.2, 30);
  const CaseMetrics m = case_metrics({line(0.5, 0.0, 30), truth}, truth);
  EXPECT_EQ(m.fde, 0.0);
  EXPECT_EQ(m.ade, 0.0);
  EXPECT_FALSE(m.miss);
  EXPECT_EQ(m.winner, 1);
}

TEST(Metrics, TwoModeEndpointExample)
{
  const Trajectory truth = line(1.0, 0.0, 10);
  const CaseMetrics m = case_metrics({line(1.0, 0.0, 10, 0.0, 1.0), line(1.0, 0.0, 10, 0.0, 3.0)}, truth);
  EXPECT_NEAR(m.fde, 1.0, 1e-12);
  EXPECT_NEAR(m.ade, 1.0, 1e-12);
  EXPECT_FALSE(m.miss);
  const CaseMetrics miss = case_metrics({line(1.0, 0.0, 10, 0.0, 2.5)}, truth);
  EXPECT_TRUE(miss.miss);
  MetricsConfig loose;
  loose.miss_threshold = 3.0;
  EXPECT_FALSE(case_metrics({line(1.0, 0.0, 10, 0.0, 2.5)}, truth, loose).miss);
}

TEST(Metrics, BestAdeFlag)
{
  const Trajectory truth = line(1.0, 0.0, 4);
  Trajectory close_end = truth;
  for (int k = 0; k < 3; ++k) {
    close_end[k].y += 5.0;
  }
  const Trajectory close_path = line(1.0, 0.0, 4, 0.0, 0.5);
  const CaseMetrics def = case_metrics({close_end, close_path}, truth);
  EXPECT_EQ(def.winner, 0);
  EXPECT_NEAR(def.ade, 15.0 / 4.0, 1e-12);
  MetricsConfig alt;
  alt.min_ade_from_best_ade = true;
  const CaseMetrics best = case_metrics({close_end, close_path}, truth, alt);
  EXPECT_NEAR(best.ade, 0.5, 1e-12);
  EXPECT_EQ(best.fde, def.fde);
}

TEST(Metrics, ShorterTruthComparesPrefix)
{
  const Trajectory mode = line(1.0, 0.0, 30);
  const Trajectory truth = line(1.0, 0.0, 12, 0.0, 1.0);
  const CaseMetrics m = case_metrics({mode}, truth);
  EXPECT_NEAR(m.fde, 1.0, 1e-12);
  EXPECT_THROW(case_metrics({line(1.0, 0.0, 5)}, truth), ShapeError);
  EXPECT_THROW(case_metrics({}, truth), ShapeError);
  EXPECT_THROW(case_metrics({mode}, {}), ShapeError);
}

TEST(Metrics, AggregateMeansAndEmpty)
{
  const MetricsReport r = aggregate({{1.0, 2.0, false, 0}, {3.0, 4.0, true, 1}});
  EXPECT_DOUBLE_EQ(r.min_ade, 2.0);
  EXPECT_DOUBLE_EQ(r.min_fde, 3.0);
  EXPECT_DOUBLE_EQ(r.miss_rate, 0.5);
  EXPECT_EQ(r.count, 2u);
  EXPECT_THROW(aggregate({}), EmptyEvaluation);
}

TEST(Metrics, SupersetNeverIncreasesMinFde)
{
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Trajectory truth = line(rng.uniform(0, 2), rng.uniform(-1, 1), 30);
    std::vector<Trajectory> modes;
    for (int k = 0; k < 6; ++k) {
      modes.push_back(line(rng.uniform(0, 2), rng.uniform(-1, 1), 30, rng.normal(), rng.normal()));
    }
    const double six = case_metrics(modes, truth).fde;
    modes.push_back(line(rng.uniform(0, 2), rng.uniform(-1, 1), 30, rng.normal(), rng.normal()));
    EXPECT_LE(case_metrics(modes, truth).fde, six);
  }
}

std::vector<SceneInput> toy_scenes(std::vector<Scenario> & storage, int n)
{
  for (int i = 0; i < n; ++i) {
    storage.push_back(cli::toy_scenario(static_cast<std::uint64_t>(i + 1), 3, 20, 30));
  }
  return prepare_scenes(storage, 2);
}

TEST(PrepareScene, FutureInTargetFrame)
{
  const Scenario s = cli::toy_scenario(3, 3, 20, 30);
  const SceneInput in = prepare_scene(s, 2);
  ASSERT_EQ(in.future.size(), 30u);
  EXPECT_EQ(in.window.horizon, 20);
  EXPECT_EQ(in.window.num_agents(), 3);
  const auto & t = s.tracks[s.target_index()];
  EXPECT_EQ(in.future[0], in.frame.to_local(t.points[20]));
  EXPECT_EQ(in.frame.origin, t.points[19]);

  Scenario cut = s;
  auto & ct = cut.tracks[cut.target_index()];
  for (int k = 35; k < 50; ++k) {
    ct.valid[k] = false;
    ct.points[k] = {};
  }
  EXPECT_EQ(prepare_scene(cut, 2).future.size(), 15u);
  for (int k = 20; k < 50; ++k) {
    ct.valid[k] = false;
  }
  EXPECT_THROW(prepare_scene(cut, 2), InvalidScenario);
}

TEST(MotionModel, ProbabilitiesAndShapes)
{
  std::vector<Scenario> storage;
  const auto scenes = toy_scenes(storage, 5);
  MotionModel<double> model(small_encoder(), 6, 30, 8, 1);
  std::vector<const SceneInput *> ptrs;
  for (const auto & s : scenes) {
    ptrs.push_back(&s);
  }
  const auto preds = model.predict(ptrs);
  ASSERT_EQ(preds.size(), 5u);
  for (const auto & p : preds) {
    ASSERT_EQ(p.modes.size(), 6u);
    EXPECT_EQ(p.modes[0].size(), 30u);
    double sum = 0.0;
    for (const double q : p.probs) {
      EXPECT_GE(q, 0.0);
      sum += q;
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
  EXPECT_EQ(model.store().at("head.fc2.weight").value.cols(), 6 * 30 * 2 + 6);
}

TEST(MotionModel, SingleModeHasNoClassificationLoss)
{
  std::vector<Scenario> storage;
  const auto scenes = toy_scenes(storage, 3);
  MotionModel<double> model(small_encoder(), 1, 30, 8, 2);
  const FinetuneLoss l = model.forward_backward({&scenes[0], &scenes[1], &scenes[2]}, false);
  EXPECT_NEAR(l.classification, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(l.loss, l.regression);
}

TEST(MotionModel, TruthEqualToModeGivesZeroRegression)
{
  std::vector<Scenario> storage;
  auto scenes = toy_scenes(storage, 1);
  MotionModel<double> model(small_encoder(), 6, 30, 8, 3);
  const auto pred = model.predict({&scenes[0]}).front();
  scenes[0].future = pred.modes[2];
  const FinetuneLoss l = model.forward_backward({&scenes[0]}, false);
  EXPECT_LT(l.regression, 1e-12);
}

TEST(MotionModel, GradientMatchesFiniteDifferences)
{
  std::vector<Scenario> storage;
  const auto scenes = toy_scenes(storage, 2);
  MotionModel<double> model(small_encoder(), 3, 30, 8, 4);
  const std::vector<const SceneInput *> batch{&scenes[0], &scenes[1]};
  model.store().zero_grad();
  model.forward_backward(batch, true);
  const auto numeric =
    nn::finite_diff_grad<double>([&] { return model.forward_backward(batch, false).loss; }, model.store(), 1e-5);
  EXPECT_LT(nn::max_relative_error<double>(model.store(), numeric), 1e-5);
}

TEST(MotionModel, InitFromPretrained)
{
  ssl::SslConfig sc;
  sc.head_hidden = 8;
  ssl::SslModel<float> pre(small_encoder(), sc, 50, 20, 11);
  const nn::Checkpoint ckpt = pre.to_checkpoint();

  MotionModel<float> a(small_encoder(), 6, 30, 8, 1);
  MotionModel<float> b(small_encoder(), 6, 30, 8, 2);
  a.init_from_pretrained(ckpt);
  b.init_from_pretrained(ckpt);
  for (std::size_t i = 0; i < a.store().size(); ++i) {
    const auto & p = a.store()[i];
    if (p.name.rfind("encoder.", 0) == 0) {
      EXPECT_EQ(p.value, pre.online().at(p.name).value) << p.name;
      EXPECT_EQ(p.value, b.store().at(p.name).value);
      EXPECT_EQ(p.adam_m.cwiseAbs().maxCoeff(), 0.0f);
    }
  }
  EXPECT_NE(a.store().at("head.fc1.weight").value, b.store().at("head.fc1.weight").value);

  const nn::Checkpoint saved = a.to_checkpoint();
  for (const auto & rec : saved.tensors) {
    if (rec.name.rfind("encoder.", 0) == 0) {
      EXPECT_EQ(rec.values, ckpt.find(rec.name)->values);
    }
  }

  nn::Checkpoint broken = ckpt;
  broken.tensors.erase(std::remove_if(broken.tensors.begin(), broken.tensors.end(),
                                      [](const auto & r) { return r.name == "encoder.value.bias"; }),
                       broken.tensors.end());
  try {
    a.init_from_pretrained(broken);
    FAIL() << "expected CheckpointMismatch";
  } catch (const CheckpointMismatch & e) {
    EXPECT_NE(std::string(e.what()).find("encoder.value.bias"), std::string::npos);
  }
}

TEST(Evaluate, DeterministicAndOrderIndependent)
{
  std::vector<Scenario> storage;
  auto scenes = toy_scenes(storage, 9);
  MotionModel<double> model(small_encoder(), 6, 30, 8, 5);
  const MetricsReport a = evaluate(model, scenes);
  const MetricsReport b = evaluate(model, scenes);
  EXPECT_EQ(a.min_fde, b.min_fde);
  std::reverse(scenes.begin(), scenes.end());
  const MetricsReport c = evaluate(model, scenes);
  EXPECT_NEAR(a.min_ade, c.min_ade, 1e-12);
  EXPECT_NEAR(a.min_fde, c.min_fde, 1e-12);
  EXPECT_EQ(a.miss_rate, c.miss_rate);
  EXPECT_EQ(a.count, 9u);
  const auto small = evaluate_cases(model, scenes, {}, 2);
  const auto big = evaluate_cases(model, scenes, {}, 64);
  for (std::size_t i = 0; i < small.size(); ++i) {
    EXPECT_NEAR(small[i].fde, big[i].fde, 1e-12);
  }
  EXPECT_THROW(evaluate(model, std::vector<SceneInput>{}), EmptyEvaluation);
}

TEST(FinetuneLoop, LearnsAndLogs)
{
  std::vector<Scenario> storage;
  const auto scenes = toy_scenes(storage, 16);
  MotionModel<float> model(small_encoder(), 6, 30, 16, 6);
  FinetuneConfig cfg;
  cfg.epochs = 15;
  cfg.batch_size = 8;
  cfg.head_hidden = 16;
  const auto log = std::filesystem::temp_directory_path() / "trajssl_finetune_loss.csv";
  const auto summary = finetune_loop(scenes, model, cfg, 7, {{}, log, "prov"});
  EXPECT_EQ(summary.steps, 30u);
  EXPECT_LT(summary.epoch_mean_loss.back(), summary.epoch_mean_loss.front());
  std::ifstream in(log);
  std::string first;
  std::string header;
  std::getline(in, first);
  std::getline(in, header);
  EXPECT_EQ(first, "# prov");
  EXPECT_EQ(header, "step,epoch,L,L_reg,L_cls,lr");
  std::filesystem::remove(log);
  EXPECT_THROW(finetune_loop(std::vector<SceneInput>{}, model, cfg, 7), EmptyBank);
}

}  // namespace
}  // namespace trajssl::finetune
