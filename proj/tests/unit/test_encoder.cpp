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

#include "trajssl/encoder/features.hpp"
#include "trajssl/encoder/reference_encoder.hpp"
#include "trajssl/errors.hpp"
#include "trajssl/nn/gradcheck.hpp"

#include <gtest/gtest.h>

namespace trajssl::encoder
{
namespace
{
using scenario::Scenario;
using scenario::TrajPoint;

EncoderConfig small_config(int k_map = 2)
{
  EncoderConfig c;
  c.embed_dim = 8;
  c.hidden_dim = 8;
  c.k_map = k_map;
  return c;
}

WindowBatch scene_batch(const Scenario & s, const MapIndex & map, int start, int horizon, int k_map)
{
  std::vector<AgentWindow> agents;
  append_scene_windows(s, map, start, horizon, 0, agents);
  return build_window_batch(agents, k_map);
}

template <typename S>
nn::Tensor<double> embed(const EncoderConfig & cfg, const WindowBatch & b, std::uint64_t seed = 3)
{
  nn::ParamStore<S> store;
  ReferenceEncoder<S> enc(cfg, store);
  nn::initialize(store, seed);
  return enc.forward(b).template cast<double>();
}

TEST(EncoderConfig, Validation)
{
  EXPECT_NO_THROW(EncoderConfig{}.validate());
  EncoderConfig c;
  c.embed_dim = 4;
  EXPECT_THROW(c.validate(), ShapeError);
  c = {};
  c.k_map = -1;
  EXPECT_THROW(c.validate(), ShapeError);
  EXPECT_EQ(EncoderConfig{}.feature_dim(), 11);
}

TEST(Featurize, StationaryAgentHasZeroDisplacement)
{
  Scenario s = testing::random_scenario(1, 1, 20, 30, 0.0);
  for (auto & p : s.tracks[0].points) {
    p = {5.0, -3.0};
  }
  const MapIndex map(s.map);
  const auto f = featurize_window(s, map, 0, 0, 20, 2);
  for (int k = 0; k < 20; ++k) {
    EXPECT_EQ(f[k * 7 + 0], 0.0);
    EXPECT_EQ(f[k * 7 + 1], 0.0);
    EXPECT_EQ(f[k * 7 + 2], 1.0);
  }
}

TEST(Featurize, StraightMotionAlongOwnHeading)
{
  Scenario s = testing::random_scenario(2, 1, 20, 30, 0.0);
  const double h = 0.7;
  for (int k = 0; k < s.T; ++k) {
    s.tracks[0].points[k] = {10.0 + k * std::cos(h), -4.0 + k * std::sin(h)};
  }
  const MapIndex map(s.map);
  const auto f = featurize_window(s, map, 0, 5, 20, 0);
  ASSERT_EQ(f.size(), 20u * 3u);
  EXPECT_EQ(f[0], 0.0);
  EXPECT_EQ(f[1], 0.0);
  for (int k = 1; k < 20; ++k) {
    EXPECT_NEAR(f[k * 3 + 0], 1.0, 1e-12);
    EXPECT_NEAR(f[k * 3 + 1], 0.0, 1e-12);
  }
}

TEST(Featurize, MapOffsetsAreNearestPoints)
{
  Scenario s = testing::random_scenario(3, 1, 20, 30, 0.0);
  const MapIndex map(s.map);
  const int k_map = 3;
  const auto f = featurize_window(s, map, 0, 10, 20, k_map);
  const scenario::Frame frame = window_frame(s.tracks[0], 10, 20);
  for (int i = 0; i < 20; ++i) {
    const TrajPoint p = s.tracks[0].points[10 + i];
    std::vector<double> d;
    for (const auto & line : s.map) {
      for (const auto & q : line.points) {
        d.push_back(testing::dist(p, q));
      }
    }
    std::sort(d.begin(), d.end());
    for (int j = 0; j < k_map; ++j) {
      const double ox = f[i * 9 + 3 + 2 * j];
      const double oy = f[i * 9 + 4 + 2 * j];
      EXPECT_NEAR(std::hypot(ox, oy), d[j], 1e-9);
    }
    (void)frame;
  }
}

TEST(MapIndex, MatchesBruteForceNearest)
{
  Rng rng(4);
  std::vector<scenario::Polyline> lines(3);
  for (auto & l : lines) {
    for (int k = 0; k < 60; ++k) {
      l.points.push_back({rng.uniform(-100, 100), rng.uniform(-100, 100)});
    }
  }
  const MapIndex index(lines);
  EXPECT_EQ(index.size(), 180u);
  std::vector<TrajPoint> out;
  for (int trial = 0; trial < 200; ++trial) {
    const TrajPoint q{rng.uniform(-150, 150), rng.uniform(-150, 150)};
    index.nearest(q, 5, out);
    ASSERT_EQ(out.size(), 5u);
    std::vector<double> d;
    for (const auto & l : lines) {
      for (const auto & p : l.points) {
        d.push_back(testing::dist(p, q));
      }
    }
    std::sort(d.begin(), d.end());
    for (int j = 0; j < 5; ++j) {
      EXPECT_NEAR(testing::dist(out[j], q), d[j], 1e-12);
    }
  }
  const MapIndex empty(std::vector<scenario::Polyline>{});
  empty.nearest({0, 0}, 3, out);
  EXPECT_TRUE(out.empty());
}

TEST(WindowFrame, AnchorsAtLastValidStep)
{
  Scenario s = testing::random_scenario(5, 1, 20, 30, 0.0);
  auto & t = s.tracks[0];
  const scenario::Frame full = window_frame(t, 0, 20);
  EXPECT_EQ(full.origin, t.points[19]);
  for (int k = 15; k < 20; ++k) {
    t.valid[k] = false;
    t.points[k] = {};
  }
  const scenario::Frame cut = window_frame(t, 0, 20);
  EXPECT_EQ(cut.origin, t.points[14]);
  for (int k = 0; k < 20; ++k) {
    t.valid[k] = false;
  }
  const scenario::Frame none = window_frame(t, 0, 20);
  EXPECT_EQ(none.origin, (TrajPoint{0, 0}));
  EXPECT_EQ(none.cos_heading, 1.0);
}

TEST(Encoder, OutputShapeAndDeterminism)
{
  const Scenario s = testing::random_scenario(6, 5, 20, 30);
  const MapIndex map(s.map);
  const WindowBatch b = scene_batch(s, map, 0, 20, 2);
  const auto z1 = embed<double>(small_config(), b);
  const auto z2 = embed<double>(small_config(), b);
  EXPECT_EQ(z1.rows(), b.num_agents());
  EXPECT_EQ(z1.cols(), 8);
  EXPECT_TRUE(z1.allFinite());
  EXPECT_EQ(z1, z2);
}

TEST(Encoder, SingleAgentEqualsPooled)
{
  const Scenario s = testing::random_scenario(7, 1, 20, 30);
  const MapIndex map(s.map);
  const WindowBatch b = scene_batch(s, map, 0, 20, 2);
  nn::ParamStore<double> store;
  ReferenceEncoder<double> enc(small_config(), store);
  nn::initialize(store, 1);
  const auto z = enc.forward(b);
  EXPECT_EQ(z, enc.pooled());
}

TEST(Encoder, TwinAgentsGetIdenticalRows)
{
  Scenario s = testing::random_scenario(8, 2, 20, 30, 0.0);
  s.tracks.push_back(s.tracks[1]);
  s.tracks.back().id = "twin";
  const MapIndex map(s.map);
  const auto z = embed<double>(small_config(), scene_batch(s, map, 0, 20, 2));
  EXPECT_EQ(z.row(1), z.row(2));
}

TEST(Encoder, CausalityOutsideWindow)
{
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Scenario s = testing::random_scenario(100 + trial, 4, 20, 30, 0.0);
    const int start = static_cast<int>(rng.uniform_int(0, 30));
    Scenario moved = s;
    for (auto & t : moved.tracks) {
      for (int k = 0; k < s.T; ++k) {
        if (k < start || k >= start + 20) {
          t.points[k] = {rng.uniform(-50, 50), rng.uniform(-50, 50)};
        }
      }
    }
    const MapIndex map(s.map);
    const auto a = embed<double>(small_config(), scene_batch(s, map, start, 20, 2));
    const auto b = embed<double>(small_config(), scene_batch(moved, map, start, 20, 2));
    EXPECT_EQ(a, b);
  }
}

TEST(Encoder, PermutationEquivariance)
{
  const Scenario s = testing::random_scenario(10, 5, 20, 30, 0.0);
  Scenario p = s;
  const std::vector<int> perm{3, 0, 4, 1, 2};
  for (std::size_t i = 0; i < perm.size(); ++i) {
    p.tracks[i] = s.tracks[perm[i]];
  }
  const MapIndex map(s.map);
  const auto a = embed<double>(small_config(), scene_batch(s, map, 0, 20, 2));
  const auto b = embed<double>(small_config(), scene_batch(p, map, 0, 20, 2));
  for (std::size_t i = 0; i < perm.size(); ++i) {
    EXPECT_LE((b.row(static_cast<Eigen::Index>(i)) - a.row(perm[i])).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Encoder, RigidMotionInvariance)
{
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Scenario s = testing::random_scenario(200 + trial, 4, 20, 30, 0.0);
    const Scenario m = testing::transform_scenario(s, rng.uniform(-3, 3), rng.uniform(-100, 100), rng.uniform(-100, 100));
    const MapIndex ma(s.map);
    const MapIndex mb(m.map);
    const auto a = embed<double>(EncoderConfig{}, scene_batch(s, ma, 10, 20, 4));
    const auto b = embed<double>(EncoderConfig{}, scene_batch(m, mb, 10, 20, 4));
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(Encoder, AttentionRadiusAndGroupsIsolate)
{
  Scenario s = testing::random_scenario(12, 2, 20, 30, 0.0);
  const MapIndex map(s.map);
  std::vector<AgentWindow> solo;
  append_scene_windows(s, map, 0, 20, 0, solo);
  solo[1].group = 1;
  nn::ParamStore<double> store;
  ReferenceEncoder<double> enc(small_config(), store);
  nn::initialize(store, 2);
  const auto z = enc.forward(build_window_batch(solo, 2));
  EXPECT_EQ(z, enc.pooled());

  EncoderConfig tight = small_config();
  tight.attention_radius = 1e-3;
  nn::ParamStore<double> store2;
  ReferenceEncoder<double> enc2(tight, store2);
  nn::initialize(store2, 2);
  const auto z2 = enc2.forward(scene_batch(s, map, 0, 20, 2));
  EXPECT_EQ(z2, enc2.pooled());
}

TEST(Encoder, NoValidStepThrows)
{
  Scenario s = testing::random_scenario(13, 2, 20, 30, 0.0);
  const MapIndex map(s.map);
  std::vector<AgentWindow> agents{{&s, &map, 1, 0, 20, 0}};
  for (int k = 0; k < 20; ++k) {
    s.tracks[1].valid[k] = false;
  }
  nn::ParamStore<double> store;
  ReferenceEncoder<double> enc(small_config(), store);
  EXPECT_THROW(enc.forward(build_window_batch(agents, 2)), ShapeError);
}

TEST(AppendSceneWindows, SkipsTracksWithoutValidSteps)
{
  Scenario s = testing::random_scenario(14, 3, 20, 30, 0.0);
  for (int k = 0; k < 20; ++k) {
    s.tracks[1].valid[k] = false;
    s.tracks[1].points[k] = {};
  }
  const MapIndex map(s.map);
  std::vector<AgentWindow> agents;
  const auto rows = append_scene_windows(s, map, 0, 20, 4, agents);
  EXPECT_EQ(rows, (std::vector<int>{0, -1, 1}));
  EXPECT_EQ(agents.size(), 2u);
  EXPECT_EQ(agents[1].group, 4);
}

TEST(Encoder, GradientMatchesFiniteDifferences)
{
  const Scenario s = testing::random_scenario(15, 3, 6, 6);
  const MapIndex map(s.map);
  const WindowBatch b = scene_batch(s, map, 0, 6, 2);
  nn::ParamStore<double> store;
  ReferenceEncoder<double> enc(small_config(), store);
  nn::initialize(store, 4);
  Rng rng(5);
  nn::Tensor<double> w(b.num_agents(), 8);
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    w.data()[k] = rng.normal();
  }
  const auto loss = [&] { return (enc.forward(b).array() * w.array()).sum(); };
  store.zero_grad();
  loss();
  enc.backward(w);
  const auto numeric = nn::finite_diff_grad<double>(loss, store, 1e-5);
  EXPECT_LT(nn::max_relative_error<double>(store, numeric), 1e-5);
}

TEST(MapCache, BuildsOncePerScenario)
{
  const Scenario a = testing::random_scenario(16, 2, 20, 30);
  const Scenario b = testing::random_scenario(17, 2, 20, 30);
  MapCache cache;
  const MapIndex & ia = cache.get(a);
  EXPECT_EQ(&cache.get(a), &ia);
  cache.get(b);
  EXPECT_EQ(cache.size(), 2u);
  EXPECT_EQ(ia.size(), 82u);
}

}  // namespace
}  // namespace trajssl::encoder
