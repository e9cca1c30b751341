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

#include "voxedge/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "voxedge/errors.hpp"
#include "voxedge/rng.hpp"
#include "voxedge/voxelizer.hpp"

namespace voxedge {

using ad::NdArray;
using ad::Shape;
using ad::Tape;
using ad::Var;

namespace {

constexpr int kGridBase[] = {32, 64, 64, 128, 128};
constexpr int kDecoderBase[] = {32, 32, 64, 128, 128};
constexpr double kOccupancyThreshold = 0.5;

int base_at(const int* table, int level) { return table[std::min(level, 4)]; }

// softplus(kUnitSigmaBias) == 1, so a zero projection leaves AdaIN as a
// plain instance standardization.
const double kUnitSigmaBias = std::log(std::exp(1.0) - 1.0);

}  // namespace

ModelInput prepare_input(const PointCloud& partial, const ModelConfig& cfg) {
  cfg.validate();
  require_finite(partial, "prepare_input");
  const auto levels = static_cast<std::size_t>(cfg.levels());
  PointCloud base = partial.size() > cfg.n_in ? farthest_point_sample(partial, cfg.n_in, 0) : partial;
  const auto pyramid = build_scale_pyramid(base, levels);
  ModelInput in;
  in.points = base;
  for (std::size_t i = 0; i < levels; ++i) {
    const GridSpec spec(cfg.resolution >> i);
    auto co = corner_offsets(pyramid[i], spec);
    const std::size_t n = pyramid[i].size();
    // 3 x N x 8 -> rows (d * 8 + v), columns points.
    NdArray<double> feat(Shape{24, n});
    for (std::size_t d = 0; d < 3; ++d) {
      for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t v = 0; v < 8; ++v) feat[(d * 8 + v) * n + p] = co.offsets.at(d, p, v);
      }
    }
    in.corner_features.push_back(std::move(feat));
    in.cells.push_back(std::move(co.cell_index));
  }
  return in;
}

std::vector<std::size_t> allocate_points(std::span<const double> density,
                                         std::span<const std::uint8_t> mask, std::size_t m) {
  if (density.size() != mask.size()) throw std::invalid_argument("allocate_points: size mismatch");
  double total = 0.0;
  for (std::size_t c = 0; c < density.size(); ++c) {
    if (mask[c]) total += std::max(density[c], 0.0);
  }
  std::vector<std::size_t> counts(density.size(), 0);
  std::vector<std::size_t> cells;
  for (std::size_t c = 0; c < mask.size(); ++c) {
    if (mask[c]) cells.push_back(c);
  }
  if (cells.empty()) throw std::invalid_argument("allocate_points: empty mask");
  std::vector<double> remainder(density.size(), 0.0);
  std::size_t assigned = 0;
  for (auto c : cells) {
    const double share = total > 0.0 ? std::max(density[c], 0.0) / total
                                     : 1.0 / static_cast<double>(cells.size());
    const double exact = share * static_cast<double>(m);
    counts[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(counts[c]);
    assigned += counts[c];
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < m; k = (k + 1) % cells.size()) {
    ++counts[cells[k]];
    ++assigned;
  }
  for (std::size_t k = cells.size(); assigned > m;) {
    k = (k == 0 ? cells.size() : k) - 1;
    if (counts[cells[k]] > 0) {
      --counts[cells[k]];
      --assigned;
    }
  }
  return counts;
}

template <typename T>
TrainingTargets<T> make_targets(const PointCloud& complete, const PointCloud& edges,
                                const ModelConfig& cfg) {
  TrainingTargets<T> t;
  auto rows = [](const PointCloud& pc) {
    std::vector<T> out(3 * pc.size());
    for (std::size_t i = 0; i < pc.size(); ++i) {
      for (std::size_t d = 0; d < 3; ++d) out[d * pc.size() + i] = static_cast<T>(pc[i][d]);
    }
    return out;
  };
  auto cast = [](const std::vector<double>& v) { return std::vector<T>(v.begin(), v.end()); };
  const GridSpec full(cfg.resolution);
  const GridSpec half(cfg.resolution / 2);
  t.complete = rows(complete);
  const auto g = density_target(complete, full);
  t.occupancy = cast(g.occupancy);
  t.density = cast(g.density);
  t.edges = rows(edges);
  if (edges.empty()) {
    t.edge_occupancy.assign(full.cells(), T(0));
    t.edge_density.assign(full.cells(), T(0));
    t.edge_occupancy_half.assign(half.cells(), T(0));
  } else {
    const auto ge = density_target(edges, full);
    t.edge_occupancy = cast(ge.occupancy);
    t.edge_density = cast(ge.density);
    const auto occ = binary_occupancy(edges, half);
    t.edge_occupancy_half.assign(occ.begin(), occ.end());
  }
  return t;
}

template <typename T>
OccupancyGuide make_guide(const TrainingTargets<T>& targets) {
  OccupancyGuide g;
  for (T v : targets.occupancy) g.completion.push_back(v > T(0.5));
  for (T v : targets.edge_occupancy) g.edges.push_back(v > T(0.5));
  return g;
}

template <typename T>
Model<T>::Model(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int levels = cfg_.levels();
  for (int i = 0; i < levels; ++i) {
    widths_.grid.push_back(cfg_.channels(base_at(kGridBase, i)));
    widths_.decoder.push_back(cfg_.channels(base_at(kDecoderBase, i)));
  }
  for (int b = 0; b + 1 < levels; ++b) widths_.encoder.push_back(widths_.grid[0] * (2 << b));
  widths_.edge1 = cfg_.channels(64);
  widths_.edge2 = cfg_.channels(128);
  widths_.edge3 = cfg_.channels(32);
  widths_.latent = cfg_.channels(1024);
  widths_.hidden = std::max(16, cfg_.channels(64));
  build();
}

template <typename T>
std::vector<Shape> Model<T>::grid_feature_shapes() const {
  std::vector<Shape> out;
  for (int i = 0; i < cfg_.levels(); ++i) {
    const auto r = static_cast<std::size_t>(cfg_.resolution >> i);
    out.push_back({static_cast<std::size_t>(widths_.grid[i]), r, r, r});
  }
  return out;
}

template <typename T>
std::size_t Model<T>::latent_size() const {
  return static_cast<std::size_t>(widths_.latent);
}

// Seeded by layer name rather than creation order, so a model built without
// the edge branch initialises the shared layers exactly like the full model.
template <typename T>
Rng Model<T>::init_rng(const std::string& name) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) h = (h ^ ch) * 0x100000001b3ULL;
  return Rng(cfg_.seed * 0x9E3779B97F4A7C15ULL ^ h);
}

template <typename T>
void Model<T>::add_conv(const std::string& name, int cin, int cout, int k) {
  Rng rng = init_rng(name);
  const auto fan_in = static_cast<double>(cin) * k * k * k;
  const double bound = 1.0 / std::sqrt(fan_in);
  const auto uk = static_cast<std::size_t>(k);
  NdArray<T> w(Shape{static_cast<std::size_t>(cout), static_cast<std::size_t>(cin), uk, uk, uk});
  for (auto& v : w.storage()) v = static_cast<T>(rng.uniform(-bound, bound));
  params_.add(name + ".w", std::move(w));
  params_.add(name + ".b", NdArray<T>(Shape{static_cast<std::size_t>(cout)}));
}

template <typename T>
void Model<T>::add_tconv(const std::string& name, int cin, int cout, int k) {
  Rng rng = init_rng(name);
  // Each output cell of a stride-2, kernel-4 transposed conv sees
  // cin * (k/2)^3 taps.
  const double fan_in = static_cast<double>(cin) * (k / 2) * (k / 2) * (k / 2);
  const double bound = 1.0 / std::sqrt(fan_in);
  const auto uk = static_cast<std::size_t>(k);
  NdArray<T> w(Shape{static_cast<std::size_t>(cin), static_cast<std::size_t>(cout), uk, uk, uk});
  for (auto& v : w.storage()) v = static_cast<T>(rng.uniform(-bound, bound));
  params_.add(name + ".w", std::move(w));
  params_.add(name + ".b", NdArray<T>(Shape{static_cast<std::size_t>(cout)}));
}

template <typename T>
void Model<T>::add_pointwise(const std::string& name, int cin, int cout) {
  Rng rng = init_rng(name);
  const double bound = 1.0 / std::sqrt(static_cast<double>(cin));
  NdArray<T> w(Shape{static_cast<std::size_t>(cout), static_cast<std::size_t>(cin)});
  for (auto& v : w.storage()) v = static_cast<T>(rng.uniform(-bound, bound));
  params_.add(name + ".w", std::move(w));
  params_.add(name + ".b", NdArray<T>(Shape{static_cast<std::size_t>(cout)}));
}

template <typename T>
void Model<T>::add_norm(const std::string& name, int c, bool running) {
  const Shape s{static_cast<std::size_t>(c)};
  params_.add(name + ".gain", NdArray<T>(s, T(1)));
  params_.add(name + ".bias", NdArray<T>(s, T(0)));
  if (running) {
    params_.add(name + ".running_mean", NdArray<T>(s, T(0)), false);
    params_.add(name + ".running_var", NdArray<T>(s, T(1)), false);
  }
}

template <typename T>
void Model<T>::add_adain(const std::string& name, int c) {
  Rng rng = init_rng(name);
  const auto zl = static_cast<std::size_t>(widths_.latent);
  const auto uc = static_cast<std::size_t>(c);
  const double bound = 1.0 / std::sqrt(static_cast<double>(zl));
  NdArray<T> w(Shape{2 * uc, zl});
  for (auto& v : w.storage()) v = static_cast<T>(rng.uniform(-bound, bound));
  NdArray<T> b(Shape{2 * uc});
  for (std::size_t i = uc; i < 2 * uc; ++i) b[i] = static_cast<T>(kUnitSigmaBias);
  params_.add(name + ".w", std::move(w));
  params_.add(name + ".b", std::move(b));
}

template <typename T>
void Model<T>::add_point_generator(const std::string& name, int c) {
  add_pointwise(name + ".p", c, 1);
  add_pointwise(name + ".d", c, 1);
  params_.at(name + ".d.w").value.fill(T(0));
  add_pointwise(name + ".fc1", c + 2, widths_.hidden);
  add_pointwise(name + ".fc2", widths_.hidden, widths_.hidden);
  add_pointwise(name + ".fc3", widths_.hidden, 3);
}

template <typename T>
void Model<T>::build() {
  const int levels = cfg_.levels();
  for (int i = 0; i < levels; ++i) {
    const std::string h = "grid" + std::to_string(i);
    add_pointwise(h + ".fc1", 24, widths_.grid[i]);
    add_norm(h + ".bn", widths_.grid[i], true);
    add_pointwise(h + ".fc2", widths_.grid[i], widths_.grid[i]);
  }

  const int c0 = widths_.grid[0];
  if (cfg_.use_edges) {
    add_conv("edge.enc1", c0, widths_.edge1, 3);
    add_norm("edge.enc1.in", widths_.edge1, false);
    add_conv("edge.enc2", widths_.edge1, widths_.edge2, 3);
    add_norm("edge.enc2.in", widths_.edge2, false);
    for (int r = 0; r < 3; ++r) {
      const std::string b = "edge.res" + std::to_string(r);
      add_conv(b + ".conv1", widths_.edge2, widths_.edge2, 3);
      add_norm(b + ".in1", widths_.edge2, false);
      add_conv(b + ".conv2", widths_.edge2, widths_.edge2, 3);
      add_norm(b + ".in2", widths_.edge2, false);
    }
    add_tconv("edge.dec1", widths_.edge2, widths_.edge1, 4);
    add_norm("edge.dec1.in", widths_.edge1, false);
    add_pointwise("edge.half", widths_.edge1, 1);
    add_tconv("edge.dec2", widths_.edge1, widths_.edge3, 4);
    add_norm("edge.dec2.in", widths_.edge3, false);
    add_point_generator("edge.pg", widths_.edge3);
  }

  int cin = c0;
  for (std::size_t b = 0; b < widths_.encoder.size(); ++b) {
    const std::string n = "enc" + std::to_string(b);
    const int cb = widths_.encoder[b];
    add_conv(n + ".conv1", cin, cb, 3);
    add_conv(n + ".conv2", cb, cb, 3);
    add_norm(n + ".bn", cb, true);
    cin = cb;
  }
  add_conv("enc.final", cin, widths_.latent, 2);

  int prev = 0;
  for (int j = 0; j < levels; ++j) {
    const int i = levels - 1 - j;
    const std::string n = "dec" + std::to_string(j);
    const int out = widths_.decoder[i];
    int c1 = widths_.grid[i] + prev + (i <= 1 ? 1 : 0);
    if (j > 0) add_tconv(n + ".up", prev, prev, 4);
    add_conv(n + ".conv1", c1, out, 3);
    add_adain(n + ".ada1", out);
    add_conv(n + ".conv2", out, out, 3);
    add_adain(n + ".ada2", out);
    prev = out;
  }
  add_point_generator("pg", prev);
}

template <typename T>
Var Model<T>::bind(Tape<T>& t, const std::string& name) {
  return t.param(params_.at(name));
}

template <typename T>
Var Model<T>::conv(Tape<T>& t, Var x, const std::string& name, ad::ConvOptions opt) {
  return ad::conv3d(t, x, bind(t, name + ".w"), bind(t, name + ".b"), opt);
}

template <typename T>
Var Model<T>::tconv(Tape<T>& t, Var x, const std::string& name) {
  return ad::tconv3d(t, x, bind(t, name + ".w"), bind(t, name + ".b"), {2, 1, 1});
}

template <typename T>
Var Model<T>::pointwise(Tape<T>& t, Var x, const std::string& name) {
  return ad::pointwise(t, x, bind(t, name + ".w"), bind(t, name + ".b"));
}

template <typename T>
Var Model<T>::inorm(Tape<T>& t, Var x, const std::string& name) {
  return ad::instance_norm(t, x, bind(t, name + ".gain"), bind(t, name + ".bias"));
}

template <typename T>
Var Model<T>::bnorm(Tape<T>& t, Var x, const std::string& name, bool training) {
  ad::BatchNormState<T> st{&params_.at(name + ".running_mean"), &params_.at(name + ".running_var"),
                           cfg_.bn_momentum};
  const bool batch_stats = training || !cfg_.bn_running_stats;
  // Running averages move only while training.
  if (batch_stats && !training) {
    auto frozen_mean = params_.at(name + ".running_mean").value;
    auto frozen_var = params_.at(name + ".running_var").value;
    Var y = ad::batch_norm(t, x, bind(t, name + ".gain"), bind(t, name + ".bias"), st, true);
    params_.at(name + ".running_mean").value = std::move(frozen_mean);
    params_.at(name + ".running_var").value = std::move(frozen_var);
    return y;
  }
  return ad::batch_norm(t, x, bind(t, name + ".gain"), bind(t, name + ".bias"), st, training);
}

template <typename T>
Var Model<T>::adain(Tape<T>& t, Var x, Var z, const std::string& name) {
  return ad::adain(t, x, z, bind(t, name + ".w"), bind(t, name + ".b"));
}

template <typename T>
GeneratedPoints Model<T>::generate(Tape<T>& t, Var features, const std::string& name,
                                   std::size_t m, std::uint64_t seed,
                                   const std::vector<std::uint8_t>* guide) {
  GeneratedPoints g;
  const auto& fshape = t.shape(features);
  const std::size_t c = fshape[0];
  const std::size_t r = fshape[1];
  const std::size_t r3 = r * r * r;
  const GridSpec spec(static_cast<int>(r));

  g.occupancy = ad::sigmoid(t, pointwise(t, features, name + ".p"));
  Var logits = ad::reshape(t, pointwise(t, features, name + ".d"), Shape{r3});

  const auto& pv = t.value(g.occupancy);
  g.mask.assign(r3, 0);
  std::size_t best = 0;
  bool any = false;
  for (std::size_t k = 0; k < r3; ++k) {
    if (pv[k] > kOccupancyThreshold) {
      g.mask[k] = 1;
      any = true;
    }
    if (pv[k] > pv[best]) best = k;
  }
  if (guide != nullptr && std::find(guide->begin(), guide->end(), 1) != guide->end()) {
    if (guide->size() != r3) throw std::invalid_argument("forward: guide mask size mismatch");
    g.mask = *guide;
  } else if (!any) {
    g.mask[best] = 1;
    g.fallback = true;
  }
  g.density = ad::masked_softmax(t, logits, g.mask);

  const auto& dv = t.value(g.density);
  std::vector<double> density(dv.values().begin(), dv.values().end());
  g.counts = allocate_points(density, g.mask, m);
  g.cells.reserve(m);
  for (std::size_t k = 0; k < r3; ++k) {
    for (std::size_t n = 0; n < g.counts[k]; ++n) g.cells.push_back(static_cast<std::uint32_t>(k));
  }

  Var folded = ad::gather_columns(t, ad::reshape(t, features, Shape{c, r3}), g.cells);
  Rng rng(seed);
  NdArray<T> noise(Shape{2, m});
  for (auto& v : noise.storage()) v = static_cast<T>(rng.uniform());
  Var h = ad::concat(t, {folded, t.constant(std::move(noise))});
  h = ad::relu(t, pointwise(t, h, name + ".fc1"));
  h = ad::relu(t, pointwise(t, h, name + ".fc2"));
  // tanh bounds each component to one cell width, so |offset| < sqrt(3).
  Var offsets = ad::tanh(t, pointwise(t, h, name + ".fc3"));

  NdArray<T> centers(Shape{3, m});
  for (std::size_t i = 0; i < m; ++i) {
    const Point3 ctr = spec.cell_center(g.cells[i]);
    for (std::size_t d = 0; d < 3; ++d) centers[d * m + i] = static_cast<T>(ctr[d]);
  }
  g.points = ad::add(t, t.constant(std::move(centers)),
                     ad::scale(t, offsets, static_cast<T>(spec.cell_width())));
  return g;
}

template <typename T>
ForwardOutputs Model<T>::forward(Tape<T>& t, const ModelInput& input, bool training,
                                 std::uint64_t noise_seed, const OccupancyGuide* guide) {
  const int levels = cfg_.levels();
  if (input.corner_features.size() != static_cast<std::size_t>(levels) ||
      input.cells.size() != static_cast<std::size_t>(levels)) {
    throw std::invalid_argument("forward: input has " + std::to_string(input.cells.size()) +
                                " pyramid levels, model expects " + std::to_string(levels));
  }
  ForwardOutputs out;
  const auto R = static_cast<std::size_t>(cfg_.resolution);

  for (int i = 0; i < levels; ++i) {
    const std::string h = "grid" + std::to_string(i);
    Var x = t.constant(input.corner_features[i].template cast<T>());
    x = pointwise(t, x, h + ".fc1");
    x = ad::relu(t, bnorm(t, x, h + ".bn", training));
    x = pointwise(t, x, h + ".fc2");
    out.grid_features.push_back(ad::aggregate_mean(t, x, input.cells[i], R >> i));
  }

  Rng seeds(noise_seed);
  const std::uint64_t edge_seed = seeds.next_u64();
  const std::uint64_t completion_seed = seeds.next_u64();

  if (cfg_.use_edges) {
    Var e = ad::relu(t, inorm(t, conv(t, out.grid_features[0], "edge.enc1", {2, 1, 1}), "edge.enc1.in"));
    e = ad::relu(t, inorm(t, conv(t, e, "edge.enc2", {2, 1, 1}), "edge.enc2.in"));
    for (int r = 0; r < 3; ++r) {
      const std::string b = "edge.res" + std::to_string(r);
      Var y = ad::relu(t, inorm(t, conv(t, e, b + ".conv1", {1, 2, 2}), b + ".in1"));
      y = inorm(t, conv(t, y, b + ".conv2", {1, 1, 1}), b + ".in2");
      e = ad::add(t, e, y);
    }
    e = ad::relu(t, inorm(t, tconv(t, e, "edge.dec1"), "edge.dec1.in"));
    out.edge_half = ad::sigmoid(t, pointwise(t, e, "edge.half"));
    e = ad::relu(t, inorm(t, tconv(t, e, "edge.dec2"), "edge.dec2.in"));
    out.edges = generate(t, e, "edge.pg", cfg_.m_edge, edge_seed, guide ? &guide->edges : nullptr);
    out.edge_full = out.edges.occupancy;
  } else {
    out.edge_half = t.constant(NdArray<T>(Shape{1, R / 2, R / 2, R / 2}));
    out.edge_full = t.constant(NdArray<T>(Shape{1, R, R, R}));
  }

  Var x = out.grid_features[0];
  for (std::size_t b = 0; b < widths_.encoder.size(); ++b) {
    const std::string n = "enc" + std::to_string(b);
    x = ad::relu(t, conv(t, x, n + ".conv1", {1, 1, 1}));
    x = conv(t, x, n + ".conv2", {1, 1, 1});
    x = ad::relu(t, bnorm(t, x, n + ".bn", training));
    x = ad::max_pool3d(t, x);
  }
  x = conv(t, x, "enc.final", {1, 0, 1});
  out.latent = ad::reshape(t, x, Shape{static_cast<std::size_t>(widths_.latent)});

  Var prev{};
  for (int j = 0; j < levels; ++j) {
    const int i = levels - 1 - j;
    const std::string n = "dec" + std::to_string(j);
    std::vector<Var> parts;
    if (j > 0) parts.push_back(tconv(t, prev, n + ".up"));
    parts.push_back(out.grid_features[i]);
    if (i == 1) parts.push_back(out.edge_half);
    if (i == 0) parts.push_back(out.edge_full);
    Var y = conv(t, ad::concat(t, parts), n + ".conv1", {1, 1, 1});
    y = ad::relu(t, adain(t, y, out.latent, n + ".ada1"));
    y = conv(t, y, n + ".conv2", {1, 1, 1});
    prev = ad::relu(t, adain(t, y, out.latent, n + ".ada2"));
  }
  out.decoder_features = prev;
  out.completion = generate(t, prev, "pg", cfg_.m_out, completion_seed,
                            guide ? &guide->completion : nullptr);
  return out;
}

template <typename T>
LossVars Model<T>::losses(Tape<T>& t, const ForwardOutputs& out,
                          const TrainingTargets<T>& tg) const {
  LossVars l;
  const auto R = static_cast<std::size_t>(cfg_.resolution);
  const auto zero = [&t] { return t.constant(NdArray<T>::scalar(T(0))); };
  auto centers_of = [&](const GeneratedPoints& g) {
    const GridSpec spec(cfg_.resolution);
    const std::size_t m = g.cells.size();
    std::vector<T> c(3 * m);
    for (std::size_t i = 0; i < m; ++i) {
      const Point3 ctr = spec.cell_center(g.cells[i]);
      for (std::size_t d = 0; d < 3; ++d) c[d * m + i] = static_cast<T>(ctr[d]);
    }
    return c;
  };

  const auto& pts = out.completion;
  l.cd = ad::chamfer(t, pts.points, std::span<const T>(tg.complete));
  l.cd_sharp = ad::chamfer_sharp(t, pts.points, std::span<const T>(tg.complete));
  l.bce_p = ad::bce(t, pts.occupancy, std::span<const T>(tg.occupancy));
  l.ld = ad::mse(t, pts.density, std::span<const T>(tg.density));
  const auto centers = centers_of(pts);
  l.lo = ad::locality(t, pts.points, std::span<const T>(centers), R);

  if (cfg_.use_edges) {
    const auto& e = out.edges;
    l.cd_edge = tg.edges.empty() ? zero() : ad::chamfer(t, e.points, std::span<const T>(tg.edges));
    Var full = ad::bce(t, e.occupancy, std::span<const T>(tg.edge_occupancy));
    Var half = ad::bce(t, out.edge_half, std::span<const T>(tg.edge_occupancy_half));
    l.bce_e = ad::scale(t, ad::add(t, full, half), T(0.5));
    l.ld_e = ad::mse(t, e.density, std::span<const T>(tg.edge_density));
    const auto ec = centers_of(e);
    l.lo_e = ad::locality(t, e.points, std::span<const T>(ec), R);
  } else {
    l.cd_edge = zero();
    l.bce_e = zero();
    l.ld_e = zero();
    l.lo_e = zero();
  }

  const auto& w = cfg_.weights;
  auto weighted = [&](Var v, double lambda) { return ad::scale(t, v, static_cast<T>(lambda)); };
  Var total = weighted(ad::add(t, l.cd, l.cd_edge), w.cd);
  total = ad::add(t, total, weighted(l.cd_sharp, w.cd_sharp));
  total = ad::add(t, total, weighted(ad::add(t, l.bce_p, l.bce_e), w.bce));
  total = ad::add(t, total, weighted(ad::add(t, l.ld, l.ld_e), w.density));
  total = ad::add(t, total, weighted(ad::add(t, l.lo, l.lo_e), w.locality));
  l.total = total;
  return l;
}

template TrainingTargets<float> make_targets<float>(const PointCloud&, const PointCloud&,
                                                    const ModelConfig&);
template TrainingTargets<double> make_targets<double>(const PointCloud&, const PointCloud&,
                                                      const ModelConfig&);
template OccupancyGuide make_guide<float>(const TrainingTargets<float>&);
template OccupancyGuide make_guide<double>(const TrainingTargets<double>&);
template class Model<float>;
template class Model<double>;

}  // namespace voxedge
