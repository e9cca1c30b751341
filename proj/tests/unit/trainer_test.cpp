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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>

#include "voxedge/errors.hpp"
#include "voxedge/pointcloud_io.hpp"
#include "voxedge/trainer.hpp"

namespace voxedge {
namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.resolution = 8;
  cfg.channel_scale = 0.25;
  cfg.n_in = 128;
  cfg.m_out = 128;
  cfg.m_edge = 32;
  cfg.batch = 2;
  return cfg;
}

Sample lamp_sample(const ModelConfig& cfg, std::uint64_t seed, std::size_t n = 512) {
  const auto spec = varied_spec(ShapeKind::Lamp, n, seed);
  const auto complete = make_shape(spec);
  return make_sample({seed, ShapeKind::Lamp, seed, n, 0.25}, occlude_by_viewpoint(complete, {seed, 0.25}),
                     complete, extract_edges(complete, synth_edge_params(n)).edges, cfg);
}

std::filesystem::path scratch(const char* name) {
  const auto d = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

TEST(Trainer, ResumeContinuesStepsAndMatchesUninterrupted) {
  const auto cfg = tiny_config();
  const std::vector<Sample> data{lamp_sample(cfg, 1), lamp_sample(cfg, 2), lamp_sample(cfg, 3)};
  const auto dir = scratch("voxedge_resume_test");

  Trainer straight(cfg);
  for (int e = 0; e < 3; ++e) straight.train_epoch(data, {});

  Trainer first(cfg);
  first.train_epoch(data, {});
  first.save(dir / "ckpt");
  Trainer resumed = Trainer::resume(dir / "ckpt");
  EXPECT_EQ(resumed.step(), first.step());
  EXPECT_EQ(resumed.epoch(), 1u);
  std::vector<std::uint64_t> steps;
  for (int e = 0; e < 2; ++e) resumed.train_epoch(data, [&](const LossRecord& r) { steps.push_back(r.step); });
  EXPECT_EQ(steps.front(), first.step() + 1);
  EXPECT_EQ(resumed.step(), straight.step());

  const auto& a = straight.model().params();
  const auto& b = resumed.model().params();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i].value.storage();
    const auto& y = b[i].value.storage();
    ASSERT_EQ(x.size(), y.size()) << a[i].name;
    float worst = 0.0f;
    for (std::size_t j = 0; j < x.size(); ++j) worst = std::max(worst, std::abs(x[j] - y[j]));
    EXPECT_EQ(worst, 0.0f) << a[i].name;
  }
  std::filesystem::remove_all(dir);
}

TEST(Trainer, NanLossAbortsWithTermAndKeepsStore) {
  const auto cfg = tiny_config();
  const std::vector<Sample> data{lamp_sample(cfg, 1)};
  Trainer tr(cfg);
  tr.model().params().at("pg.fc3.b").value[0] = std::nanf("");
  const auto before = tr.model().params().at("enc.final.w").value;
  const Sample* batch[] = {&data[0]};
  try {
    tr.train_step(batch);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_EQ(e.term(), "cd");
  }
  EXPECT_EQ(tr.step(), 0u);
  EXPECT_EQ(tr.model().params().at("enc.final.w").value, before);
}

TEST(Trainer, FirstStepLossesFiniteAndLogRowComplete) {
  const auto cfg = tiny_config();
  const std::vector<Sample> data{lamp_sample(cfg, 4), lamp_sample(cfg, 5)};
  Trainer tr(cfg);
  const Sample* batch[] = {&data[0], &data[1]};
  const auto r = tr.train_step(batch);
  for (double v : {r.cd, r.cd_edge, r.cd_sharp, r.bce_p, r.bce_e, r.ld, r.ld_e, r.lo, r.lo_e, r.total}) {
    EXPECT_TRUE(std::isfinite(v));
  }
  EXPECT_EQ(r.step, 1u);
  const auto row = format_log_row(r);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(kLogHeader, kLogHeader + std::strlen(kLogHeader), ','));
}

TEST(Trainer, OverfitOneLamp) {
  ModelConfig cfg;
  const std::vector<Sample> data{lamp_sample(cfg, 7, 2048)};
  Trainer tr(cfg);
  const double initial = chamfer(complete_cloud(tr.model(), data[0].input).points, data[0].complete);
  const Sample* batch[] = {&data[0]};
  for (int i = 0; i < 200; ++i) tr.train_step(batch);
  const double trained = chamfer(complete_cloud(tr.model(), data[0].input).points, data[0].complete);
  EXPECT_LE(trained, 0.2 * initial) << initial << " -> " << trained;
}

TEST(Trainer, AblatedCheckpointDropsEdgeWeights) {
  const auto cfg = tiny_config();
  const auto dir = scratch("voxedge_ablate_test");
  Trainer tr(cfg);
  tr.save(dir / "ckpt");
  auto full = load_model(dir / "ckpt");
  auto ablated = load_model(dir / "ckpt", false);
  EXPECT_LT(ablated.params().size(), full.params().size());
  const auto s = lamp_sample(cfg, 1);
  EXPECT_EQ(complete_cloud(ablated, s.input).edges.size(), 0u);
  auto noedge_cfg = cfg;
  noedge_cfg.use_edges = false;
  Trainer plain(noedge_cfg);
  plain.save(dir / "plain");
  EXPECT_THROW(load_model(dir / "plain", true), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Trainer, DatasetLoadsFromDisk) {
  const auto dir = scratch("voxedge_dataset_test");
  make_dataset(parse_synth_plan("resolution = 8\ngenerate = 3 256 1\n"), dir);
  const auto data = load_dataset(dir, tiny_config());
  ASSERT_EQ(data.size(), 3u);
  EXPECT_EQ(data[1].row.kind, ShapeKind::Cylinder);
  EXPECT_EQ(data[0].partial.size(), 192u);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace voxedge
