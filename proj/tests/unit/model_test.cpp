// Copyright 2026 The voxedge Authors. All Rights Reserved.
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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "voxedge/model.hpp"
#include "voxedge/synth.hpp"
#include "voxedge/trainer.hpp"

namespace voxedge {
namespace {

using ad::Shape;
using ad::Tape;

ModelConfig small_config(int r) {
  ModelConfig cfg;
  cfg.resolution = r;
  cfg.channel_scale = 0.25;
  cfg.n_in = 256;
  cfg.m_out = 128;
  cfg.m_edge = 32;
  return cfg;
}

PointCloud lamp(std::size_t n, std::uint64_t seed = 1) {
  return make_shape(varied_spec(ShapeKind::Lamp, n, seed));
}

TEST(Model, DeskShapesFollowScalingRule) {
  const Model<float> m(ModelConfig{});
  const std::vector<Shape> expect{{8, 16, 16, 16}, {16, 8, 8, 8}, {16, 4, 4, 4}, {32, 2, 2, 2}};
  EXPECT_EQ(m.grid_feature_shapes(), expect);
  EXPECT_EQ(m.latent_size(), 256u);
}

TEST(Model, ForwardShapesAcrossResolutions) {
  for (int r : {8, 16, 32}) {
    const auto cfg = small_config(r);
    Model<float> model(cfg);
    Tape<float> t;
    const auto out = model.forward(t, prepare_input(lamp(400), cfg), true, 3);
    ASSERT_EQ(out.grid_features.size(), static_cast<std::size_t>(cfg.levels())) << r;
    const auto shapes = model.grid_feature_shapes();
    for (std::size_t i = 0; i < shapes.size(); ++i) EXPECT_EQ(t.shape(out.grid_features[i]), shapes[i]);
    const auto ur = static_cast<std::size_t>(r);
    EXPECT_EQ(t.shape(out.edge_half), (Shape{1, ur / 2, ur / 2, ur / 2}));
    EXPECT_EQ(t.shape(out.edge_full), (Shape{1, ur, ur, ur}));
    EXPECT_EQ(t.shape(out.completion.points), (Shape{3, cfg.m_out}));
    EXPECT_EQ(t.shape(out.edges.points), (Shape{3, cfg.m_edge}));
    EXPECT_EQ(t.value(out.latent).size(), model.latent_size());
    for (float v : t.value(out.completion.points).values()) EXPECT_TRUE(std::isfinite(v));
    for (float v : t.value(out.completion.occupancy).values()) {
      EXPECT_GT(v, 0.0f);
      EXPECT_LT(v, 1.0f);
    }
  }
}

TEST(Model, GridHeadIsPermutationInvariant) {
  const auto cfg = small_config(8);
  Model<double> model(cfg);
  const auto input = prepare_input(lamp(300), cfg);
  auto shuffled = input;
  for (std::size_t l = 0; l < input.cells.size(); ++l) {
    const std::size_t n = input.cells[l].size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[0], perm[n / 2]);
    for (std::size_t j = 0; j < n; ++j) {
      shuffled.cells[l][j] = input.cells[l][perm[j]];
      for (std::size_t row = 0; row < 24; ++row) {
        shuffled.corner_features[l][row * n + j] = input.corner_features[l][row * n + perm[j]];
      }
    }
  }
  Tape<double> a, b;
  const auto oa = model.forward(a, input, false, 1);
  const auto ob = model.forward(b, shuffled, false, 1);
  for (std::size_t l = 0; l < oa.grid_features.size(); ++l) {
    const auto& va = a.value(oa.grid_features[l]);
    const auto& vb = b.value(ob.grid_features[l]);
    for (std::size_t k = 0; k < va.size(); ++k) EXPECT_NEAR(va[k], vb[k], 1e-12);
  }
}

TEST(Model, ZeroCornerFeaturesGiveZeroGrids) {
  const auto cfg = small_config(8);
  Model<double> model(cfg);
  auto input = prepare_input(lamp(300), cfg);
  for (auto& f : input.corner_features) f.fill(0.0);
  Tape<double> t;
  const auto out = model.forward(t, input, true, 1);
  for (auto g : out.grid_features) {
    for (double v : t.value(g).values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Model, ZeroOffsetsEmitCellCentersFromGuide) {
  auto cfg = small_config(8);
  cfg.m_out = 8;
  Model<float> model(cfg);
  model.params().at("pg.fc3.w").value.fill(0.0f);
  model.params().at("pg.fc3.b").value.fill(0.0f);
  const GridSpec spec(8);
  const std::size_t cell = spec.flat(2, 5, 1);
  OccupancyGuide guide;
  guide.completion.assign(spec.cells(), 0);
  guide.completion[cell] = 1;
  guide.edges = guide.completion;
  Tape<float> t;
  const auto out = model.forward(t, prepare_input(lamp(300), cfg), true, 1, &guide);
  const auto& pts = t.value(out.completion.points);
  const Point3 c = spec.cell_center(cell);
  EXPECT_EQ(out.completion.cells, std::vector<std::uint32_t>(8, static_cast<std::uint32_t>(cell)));
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t d = 0; d < 3; ++d) EXPECT_FLOAT_EQ(pts[d * 8 + i], static_cast<float>(c[d]));
  }
}

TEST(Model, SingleCellPointsStayInsideSqrt3Ball) {
  auto cfg = small_config(8);
  cfg.m_out = 8;
  Model<float> model(cfg);
  const GridSpec spec(8);
  OccupancyGuide guide;
  guide.completion.assign(spec.cells(), 0);
  guide.completion[77] = 1;
  guide.edges = guide.completion;
  Tape<float> t;
  const auto out = model.forward(t, prepare_input(lamp(300), cfg), true, 9, &guide);
  const auto& pts = t.value(out.completion.points);
  const Point3 c = spec.cell_center(77);
  for (std::size_t i = 0; i < 8; ++i) {
    const Point3 p{pts[i], pts[8 + i], pts[16 + i]};
    EXPECT_LT(distance(p, c), std::sqrt(3.0) * spec.cell_width() + 1e-6);
  }
}

TEST(Model, AllocationIsLargestRemainder) {
  const std::vector<double> density{0.5, 0.3, 0.0, 0.2};
  const std::vector<std::uint8_t> mask{1, 1, 0, 1};
  EXPECT_EQ(allocate_points(density, mask, 7), (std::vector<std::size_t>{4, 2, 0, 1}));
  EXPECT_EQ(allocate_points(density, mask, 10), (std::vector<std::size_t>{5, 3, 0, 2}));
  const auto c = allocate_points(std::vector<double>(5, 0.0), std::vector<std::uint8_t>(5, 1), 12);
  EXPECT_EQ(std::accumulate(c.begin(), c.end(), std::size_t{0}), 12u);
  EXPECT_THROW(allocate_points(density, std::vector<std::uint8_t>(4, 0), 3), std::invalid_argument);
}

TEST(Model, ForwardIsBitwiseDeterministic) {
  const auto cfg = small_config(16);
  const auto input = prepare_input(lamp(600), cfg);
  Model<float> a(cfg), b(cfg);
  Tape<float> ta, tb;
  const auto oa = a.forward(ta, input, false, 42);
  const auto ob = b.forward(tb, input, false, 42);
  EXPECT_EQ(ta.value(oa.completion.points), tb.value(ob.completion.points));
  EXPECT_EQ(ta.value(oa.edges.points), tb.value(ob.edges.points));
  Tape<float> tc;
  const auto oc = a.forward(tc, input, false, 43);
  EXPECT_NE(ta.value(oa.completion.points), tc.value(oc.completion.points));
}

TEST(Model, PcnProfileDropsSharpAndLocality) {
  auto cfg = small_config(8);
  cfg.weights = LossWeights::pcn();
  Model<double> model(cfg);
  const auto complete = lamp(400);
  const auto edges = extract_edges(complete, synth_edge_params(400)).edges;
  const auto targets = make_targets<double>(complete, edges, cfg);
  const auto guide = make_guide(targets);
  Tape<double> t;
  const auto out = model.forward(t, prepare_input(occlude_by_viewpoint(complete, {1, 0.25}), cfg), true, 1, &guide);
  const auto l = model.losses(t, out, targets);
  auto v = [&](ad::Var x) { return t.value(x).item(); };
  EXPECT_GT(v(l.cd_sharp), 0.0);
  const LossParts parts{v(l.cd), v(l.cd_edge), v(l.cd_sharp), v(l.bce_p), v(l.bce_e),
                        v(l.ld), v(l.ld_e), v(l.lo), v(l.lo_e)};
  EXPECT_NEAR(v(l.total), total_loss(parts, cfg.weights), 1e-9 * std::abs(v(l.total)));
  const double without = 1e4 * (parts.cd + parts.cd_edge) + 100 * (parts.bce_p + parts.bce_e) +
                         1e10 * (parts.ld + parts.ld_e);
  EXPECT_NEAR(v(l.total), without, 1e-9 * std::abs(without));
}

TEST(Model, EdgeAblationFeedsZeroGrids) {
  auto cfg = small_config(8);
  cfg.use_edges = false;
  Model<float> model(cfg);
  for (std::size_t i = 0; i < model.params().size(); ++i) {
    EXPECT_NE(model.params()[i].name.rfind("edge.", 0), 0u) << model.params()[i].name;
  }
  Tape<float> t;
  const auto out = model.forward(t, prepare_input(lamp(300), cfg), true, 1);
  for (float v : t.value(out.edge_half).values()) EXPECT_EQ(v, 0.0f);
  for (float v : t.value(out.edge_full).values()) EXPECT_EQ(v, 0.0f);
  EXPECT_EQ(t.shape(out.completion.points), (Shape{3, cfg.m_out}));
}

TEST(Model, GuideMatchesTargetOccupancy) {
  const auto cfg = small_config(8);
  const auto complete = lamp(400);
  const auto targets = make_targets<float>(complete, complete, cfg);
  const auto guide = make_guide(targets);
  const auto occ = binary_occupancy(complete, GridSpec(8));
  EXPECT_EQ(guide.completion, occ);
  const double sum = std::accumulate(targets.density.begin(), targets.density.end(), 0.0);
  EXPECT_NEAR(sum, 1.0, 1e-5);
}

TEST(Model, GradientCheckOnMicroConfig) {
  const auto r = model_grad_check(1, 12);
  EXPECT_LT(r.max_rel_error, 1e-3);
  EXPECT_GT(r.checked, 0u);
  EXPECT_LT(float_double_agreement(1), 1e-4);
}

}  // namespace
}  // namespace voxedge
