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

#include <benchmark/benchmark.h>

#include "voxedge/ad/ops.hpp"
#include "voxedge/edges.hpp"
#include "voxedge/metrics.hpp"
#include "voxedge/model.hpp"
#include "voxedge/rng.hpp"
#include "voxedge/synth.hpp"

namespace {

using namespace voxedge;

PointCloud cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PointCloud pc;
  for (std::size_t i = 0; i < n; ++i) pc.points.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
  return pc;
}

void BM_Knn(benchmark::State& state) {
  const auto pc = cloud(static_cast<std::size_t>(state.range(0)), 1);
  const KnnIndex index(pc);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(index.query(pc[i++ % pc.size()], 100));
}
BENCHMARK(BM_Knn)->Arg(2048)->Arg(16384);

void BM_Chamfer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto p = cloud(n, 2);
  const auto q = cloud(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(chamfer(p, q));
}
BENCHMARK(BM_Chamfer)->Arg(512)->Arg(2048);

void BM_ExtractEdges(benchmark::State& state) {
  const auto pc = make_shape(varied_spec(ShapeKind::Table, 2048, 1));
  for (auto _ : state) benchmark::DoNotOptimize(extract_edges(pc, {100, 5.0}));
}
BENCHMARK(BM_ExtractEdges)->Unit(benchmark::kMillisecond);

void BM_Conv3d(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  ad::NdArray<float> x({c, 16, 16, 16}), w({c, c, 3, 3, 3}), b({c});
  for (auto& v : x.storage()) v = static_cast<float>(rng.uniform(-1, 1));
  for (auto& v : w.storage()) v = static_cast<float>(rng.uniform(-0.1, 0.1));
  for (auto _ : state) {
    ad::Tape<float> t;
    ad::Var xv = t.input(x);
    ad::Var y = ad::conv3d(t, xv, t.input(w), t.input(b), {1, 1, 1});
    t.backward(ad::reduce_sum(t, y));
    benchmark::DoNotOptimize(t.grad(xv).data());
  }
}
BENCHMARK(BM_Conv3d)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_DeskForwardBackward(benchmark::State& state) {
  const ModelConfig cfg;
  Model<float> model(cfg);
  const auto complete = make_shape(varied_spec(ShapeKind::Lamp, 2048, 1));
  const auto edges = extract_edges(complete, synth_edge_params(2048)).edges;
  const auto input = prepare_input(occlude_by_viewpoint(complete, {1, 0.25}), cfg);
  const auto targets = make_targets<float>(complete, edges, cfg);
  const auto guide = make_guide(targets);
  for (auto _ : state) {
    ad::Tape<float> t;
    const auto out = model.forward(t, input, true, 1, &guide);
    t.backward(model.losses(t, out, targets).total);
  }
}
BENCHMARK(BM_DeskForwardBackward)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
