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

#include "trajssl/cli/gradcheck_suites.hpp"

#include "trajssl/encoder/reference_encoder.hpp"
#include "trajssl/finetune/inputs.hpp"
#include "trajssl/finetune/model.hpp"
#include "trajssl/nn/gradcheck.hpp"
#include "trajssl/nn/layers.hpp"
#include "trajssl/rng.hpp"
#include "trajssl/ssl/heads.hpp"
#include "trajssl/ssl/inputs.hpp"
#include "trajssl/ssl/losses.hpp"
#include "trajssl/ssl/pretrainer.hpp"

#include <fmt/format.h>

#include <cmath>
#include <functional>
#include <map>

namespace trajssl::cli
{
namespace
{
using nn::ParamStore;
using Mat = nn::Tensor<double>;
using InputGrads = std::map<std::string, Mat>;

Mat random_matrix(Rng & rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0)
{
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = scale * rng.normal();
  }
  return m;
}

std::size_t count_entries(const ParamStore<double> & store)
{
  std::size_t n = 0;
  for (std::size_t i = 0; i < store.size(); ++i) {
    n += store[i].trainable ? static_cast<std::size_t>(store[i].value.size()) : 0;
  }
  return n;
}

/**
 * `analytic` runs forward and backward once, leaving parameter gradients in `params` and
 * returning the gradients of the tensors in `inputs`.
 */
SuiteResult check(
  const std::string & name, ParamStore<double> & params, ParamStore<double> & inputs,
  const std::function<double()> & loss, const std::function<InputGrads()> & analytic, double tolerance)
{
  params.zero_grad();
  const InputGrads input_grads = analytic();
  SuiteResult r;
  r.name = name;
  const auto numeric_params = nn::finite_diff_grad<double>(loss, params, kGradCheckStep);
  r.max_rel_error = nn::max_relative_error(params, numeric_params);
  r.probes = count_entries(params);
  const auto numeric_inputs = nn::finite_diff_grad<double>(loss, inputs, kGradCheckStep);
  for (const auto & [input, g] : input_grads) {
    r.max_rel_error = std::max(r.max_rel_error, nn::max_relative_error<double>(g, numeric_inputs.at(input)));
    r.probes += static_cast<std::size_t>(g.size());
  }
  r.passed = r.max_rel_error < tolerance;
  return r;
}

double weighted_sum(const Mat & y, const Mat & w) { return (y.array() * w.array()).sum(); }

SuiteResult linear_suite(double tol)
{
  Rng rng = Rng::derive(11, 0);
  ParamStore<double> params;
  nn::Linear<double> layer(params, "linear", 5, 4);
  nn::initialize(params, 1);
  ParamStore<double> inputs;
  inputs.get_or_add("x", 6, 5).value = random_matrix(rng, 6, 5);
  const Mat w = random_matrix(rng, 6, 4);
  auto & x = inputs.at("x").value;
  return check(
    "linear", params, inputs, [&] { return weighted_sum(layer.forward(x), w); },
    [&] {
      layer.forward(x);
      return InputGrads{{"x", layer.backward(w)}};
    },
    tol);
}

SuiteResult batch_norm_suite(nn::Mode mode, double tol)
{
  Rng rng = Rng::derive(12, mode == nn::Mode::kTrain ? 0 : 1);
  ParamStore<double> params;
  nn::BatchNorm<double> bn(params, "bn", 4);
  params.at("bn.scale").value = random_matrix(rng, 1, 4, 0.5).array() + 1.0;
  params.at("bn.shift").value = random_matrix(rng, 1, 4);
  params.at("bn.running_mean").value = random_matrix(rng, 1, 4);
  params.at("bn.running_var").value = random_matrix(rng, 1, 4).array().abs() + 0.5;
  ParamStore<double> inputs;
  inputs.get_or_add("x", 5, 4).value = random_matrix(rng, 5, 4, 2.0);
  const Mat w = random_matrix(rng, 5, 4);
  auto & x = inputs.at("x").value;
  return check(
    mode == nn::Mode::kTrain ? "batch_norm_train" : "batch_norm_eval", params, inputs,
    [&] { return weighted_sum(bn.forward(x, mode), w); },
    [&] {
      bn.forward(x, mode);
      return InputGrads{{"x", bn.backward(w)}};
    },
    tol);
}

SuiteResult layer_norm_suite(double tol)
{
  Rng rng = Rng::derive(13, 0);
  ParamStore<double> params;
  nn::LayerNorm<double> ln(params, "ln", 6);
  params.at("ln.scale").value = random_matrix(rng, 1, 6, 0.5).array() + 1.0;
  params.at("ln.shift").value = random_matrix(rng, 1, 6);
  ParamStore<double> inputs;
  inputs.get_or_add("x", 4, 6).value = random_matrix(rng, 4, 6, 2.0);
  const Mat w = random_matrix(rng, 4, 6);
  auto & x = inputs.at("x").value;
  return check(
    "layer_norm", params, inputs, [&] { return weighted_sum(ln.forward(x), w); },
    [&] {
      ln.forward(x);
      return InputGrads{{"x", ln.backward(w)}};
    },
    tol);
}

SuiteResult attention_suite(double tol)
{
  Rng rng = Rng::derive(14, 0);
  ParamStore<double> params;
  ParamStore<double> inputs;
  inputs.get_or_add("q", 4, 3).value = random_matrix(rng, 4, 3);
  inputs.get_or_add("k", 5, 3).value = random_matrix(rng, 5, 3);
  inputs.get_or_add("v", 5, 2).value = random_matrix(rng, 5, 2);
  nn::AttentionMask mask = nn::AttentionMask::Constant(4, 5, true);
  mask(0, 1) = false;
  mask(2, 0) = false;
  mask(2, 4) = false;
  mask.row(3).setConstant(false);
  const Mat w = random_matrix(rng, 4, 2);
  nn::Attention<double> att;
  auto & q = inputs.at("q").value;
  auto & k = inputs.at("k").value;
  auto & v = inputs.at("v").value;
  return check(
    "attention", params, inputs, [&] { return weighted_sum(att.forward(q, k, v, &mask), w); },
    [&] {
      att.forward(q, k, v, &mask);
      const auto g = att.backward(w);
      return InputGrads{{"q", g.dq}, {"k", g.dk}, {"v", g.dv}};
    },
    tol);
}

encoder::EncoderConfig toy_encoder_config()
{
  encoder::EncoderConfig cfg;
  cfg.embed_dim = 8;
  cfg.hidden_dim = 8;
  cfg.k_map = 2;
  cfg.attention_radius = 50.0;
  return cfg;
}

SuiteResult encoder_suite(double tol)
{
  const scenario::Scenario s = toy_scenario(21, 3, 5, 5);
  const encoder::MapIndex map(s.map);
  std::vector<encoder::AgentWindow> agents;
  encoder::append_scene_windows(s, map, 0, 5, 0, agents);
  encoder::append_scene_windows(s, map, 4, 5, 1, agents);
  const encoder::WindowBatch batch = encoder::build_window_batch(agents, 2);
  ParamStore<double> params;
  encoder::ReferenceEncoder<double> enc(toy_encoder_config(), params);
  nn::initialize(params, 3);
  Rng rng = Rng::derive(15, 0);
  const Mat w = random_matrix(rng, batch.num_agents(), 8);
  ParamStore<double> inputs;
  return check(
    "reference_encoder", params, inputs, [&] { return weighted_sum(enc.forward(batch), w); },
    [&] {
      enc.forward(batch);
      enc.backward(w);
      return InputGrads{};
    },
    tol);
}

SuiteResult head_suite(const std::string & name, ssl::NormKind kind, bool trajectory, double tol)
{
  Rng rng = Rng::derive(16, static_cast<std::uint64_t>(kind) * 2 + (trajectory ? 1 : 0));
  ParamStore<double> params;
  ParamStore<double> inputs;
  inputs.get_or_add("x", 6, 8).value = random_matrix(rng, 6, 8);
  auto & x = inputs.at("x").value;
  if (trajectory) {
    ssl::TrajectoryDecoder<double> head(params, name, 8, 8, 5);
    nn::initialize(params, 4);
    const Mat w = random_matrix(rng, 6, 10);
    return check(
      name, params, inputs, [&] { return weighted_sum(head.forward(x), w); },
      [&] {
        head.forward(x);
        return InputGrads{{"x", head.backward(w)}};
      },
      tol);
  }
  ssl::MlpHead<double> head(params, name, 8, 8, 8, kind);
  nn::initialize(params, 4);
  const Mat w = random_matrix(rng, 6, 8);
  return check(
    name, params, inputs, [&] { return weighted_sum(head.forward(x, nn::Mode::kTrain), w); },
    [&] {
      head.forward(x, nn::Mode::kTrain);
      return InputGrads{{"x", head.backward(w)}};
    },
    tol);
}

SuiteResult tcl_suite(double tol)
{
  Rng rng = Rng::derive(17, 0);
  ParamStore<double> params;
  ParamStore<double> inputs;
  inputs.get_or_add("z", 5, 4).value = random_matrix(rng, 5, 4);
  const Mat target = random_matrix(rng, 5, 4);
  auto & z = inputs.at("z").value;
  return check(
    "tcl_loss", params, inputs, [&] { return ssl::tcl_loss<double>(z, target, 0.1).loss; },
    [&] { return InputGrads{{"z", ssl::tcl_loss<double>(z, target, 0.1).grad}}; }, tol);
}

SuiteResult trl_suite(double tol)
{
  Rng rng = Rng::derive(18, 0);
  ParamStore<double> params;
  ParamStore<double> inputs;
  inputs.get_or_add("decoded", 3, 8).value = random_matrix(rng, 3, 8);
  const Mat target = random_matrix(rng, 3, 8);
  std::vector<std::uint8_t> valid(12, 1);
  valid[2] = 0;
  valid[7] = 0;
  auto & decoded = inputs.at("decoded").value;
  return check(
    "trl_loss", params, inputs, [&] { return ssl::trl_loss<double>(decoded, target, valid).loss; },
    [&] { return InputGrads{{"decoded", ssl::trl_loss<double>(decoded, target, valid).grad}}; }, tol);
}

SuiteResult pretrain_composite_suite(double tol)
{
  const scenario::Scenario s = toy_scenario(31, 3, 4, 6);
  sampler::Batch batch;
  sampler::SubScenarioPair pair;
  pair.window_a = {&s, 0, 4};
  pair.window_b = {&s, 5, 4};
  pair.eligible = {0, 1, 2};
  batch.pairs.push_back(pair);
  for (int k = 0; k < 3; ++k) {
    batch.agents.push_back({0, k});
  }
  encoder::MapCache maps;
  const ssl::PretrainInputs in = ssl::prepare_pretrain_inputs(batch, maps, 2, ssl::ReconTarget::kOtherWindow);
  ssl::SslConfig cfg;
  cfg.head_hidden = 8;
  ssl::SslModel<double> model(toy_encoder_config(), cfg, s.T, s.T_h, 5);
  ParamStore<double> inputs;
  return check(
    "pretrain_tcl_trl", model.online(), inputs, [&] { return model.forward_backward(in, false).loss; },
    [&] {
      model.forward_backward(in, true);
      return InputGrads{};
    },
    tol);
}

SuiteResult finetune_suite(double tol)
{
  const scenario::Scenario a = toy_scenario(41, 3, 4, 5);
  const scenario::Scenario b = toy_scenario(42, 2, 4, 5);
  const finetune::SceneInput ia = finetune::prepare_scene(a, 2);
  const finetune::SceneInput ib = finetune::prepare_scene(b, 2);
  const std::vector<const finetune::SceneInput *> scenes{&ia, &ib};
  finetune::MotionModel<double> model(toy_encoder_config(), 3, 5, 8, 6);
  ParamStore<double> inputs;
  return check(
    "finetune_wta", model.store(), inputs, [&] { return model.forward_backward(scenes, false).loss; },
    [&] {
      model.forward_backward(scenes, true);
      return InputGrads{};
    },
    tol);
}
}  // namespace

scenario::Scenario toy_scenario(std::uint64_t seed, int agents, int T_h, int T_f)
{
  Rng rng = Rng::derive(seed, 0x746f79ULL);
  scenario::Scenario s;
  s.id = fmt::format("toy-{}", seed);
  s.source = "toy";
  s.sample_rate_hz = 10.0;
  s.T_h = T_h;
  s.T_f = T_f;
  s.T = T_h + T_f;
  s.native_T = s.T;
  s.target_agent = "a0";
  const int lanes = std::max(2, agents);
  for (int l = 0; l < lanes; ++l) {
    scenario::Polyline line;
    for (int i = 0; i <= 40; ++i) {
      line.points.push_back({-20.0 + 2.0 * i, 3.5 * l});
    }
    s.map.push_back(std::move(line));
  }
  for (int k = 0; k < agents; ++k) {
    scenario::AgentTrack t;
    t.id = fmt::format("a{}", k);
    const double x0 = rng.uniform(-5.0, 5.0);
    const double speed = rng.uniform(3.0, 8.0);
    const double wobble = rng.uniform(0.2, 0.6);
    const double phase = rng.uniform(0.0, 6.0);
    for (int step = 0; step < s.T; ++step) {
      const double time = step / s.sample_rate_hz;
      t.points.push_back({x0 + speed * time + 0.3 * time * time, 3.5 * k + wobble * std::sin(phase + 2.0 * time)});
      t.valid.push_back(true);
    }
    s.tracks.push_back(std::move(t));
  }
  s.validate();
  return s;
}

std::vector<SuiteResult> run_gradcheck_suites(double tolerance)
{
  return {
    linear_suite(tolerance),
    batch_norm_suite(nn::Mode::kTrain, tolerance),
    batch_norm_suite(nn::Mode::kEval, tolerance),
    layer_norm_suite(tolerance),
    attention_suite(tolerance),
    encoder_suite(tolerance),
    head_suite("projector", ssl::NormKind::kBatch, false, tolerance),
    head_suite("predictor", ssl::NormKind::kBatch, false, tolerance),
    head_suite("decoder", ssl::NormKind::kLayer, true, tolerance),
    tcl_suite(tolerance),
    trl_suite(tolerance),
    pretrain_composite_suite(tolerance),
    finetune_suite(tolerance),
  };
}

}  // namespace trajssl::cli
