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

#include "voxedge/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "voxedge/ad/checkpoint.hpp"
#include "voxedge/ad/grad_check.hpp"
#include "voxedge/errors.hpp"
#include "voxedge/metrics.hpp"
#include "voxedge/pointcloud_io.hpp"
#include "voxedge/rng.hpp"

namespace voxedge {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word.
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kInferenceStream = 0xC0FFEE;

std::string real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <typename T>
PointCloud to_cloud(const ad::NdArray<T>& rows) {
  const std::size_t m = rows.shape().at(1);
  PointCloud pc;
  pc.points.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    pc.points[i] = {static_cast<double>(rows[i]), static_cast<double>(rows[m + i]),
                    static_cast<double>(rows[2 * m + i])};
  }
  return pc;
}

// Write to a sibling temporary and rename, so an interrupted save never
// replaces the previous good file.
void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  write_file(tmp, bytes);
  std::filesystem::rename(tmp, path);
}

}  // namespace

Sample make_sample(const ManifestRow& row, PointCloud partial, PointCloud complete,
                   PointCloud edges, const ModelConfig& cfg) {
  Sample s;
  s.row = row;
  s.input = prepare_input(partial, cfg);
  s.targets = make_targets<float>(complete, edges, cfg);
  s.guide = make_guide(s.targets);
  s.partial = std::move(partial);
  s.complete = std::move(complete);
  s.edges = std::move(edges);
  return s;
}

std::vector<Sample> load_dataset(const std::filesystem::path& dir, const ModelConfig& cfg) {
  std::vector<Sample> out;
  for (const auto& row : load_manifest(dir)) {
    const auto d = sample_dir(dir, row.id);
    out.push_back(make_sample(row, load_pointcloud(d / "partial.ply"),
                              load_pointcloud(d / "complete.ply"), load_pointcloud(d / "edges.ply"),
                              cfg));
  }
  if (out.empty()) throw std::runtime_error("dataset " + dir.string() + " has no samples");
  return out;
}

std::string format_log_row(const LossRecord& r) {
  return std::to_string(r.step) + "," + real(r.cd) + "," + real(r.cd_edge) + "," +
         real(r.cd_sharp) + "," + real(r.bce_p) + "," + real(r.bce_e) + "," + real(r.ld) + "," +
         real(r.ld_e) + "," + real(r.lo) + "," + real(r.lo_e) + "," + real(r.total);
}

template <typename T>
LossRecord read_losses(const ad::Tape<T>& tape, const LossVars& l) {
  LossRecord r;
  const std::pair<const char*, std::pair<ad::Var, double*>> terms[] = {
      {"cd", {l.cd, &r.cd}},         {"cd_edge", {l.cd_edge, &r.cd_edge}},
      {"cd_sharp", {l.cd_sharp, &r.cd_sharp}}, {"bce_p", {l.bce_p, &r.bce_p}},
      {"bce_e", {l.bce_e, &r.bce_e}}, {"ld", {l.ld, &r.ld}},
      {"ld_e", {l.ld_e, &r.ld_e}},   {"lo", {l.lo, &r.lo}},
      {"lo_e", {l.lo_e, &r.lo_e}},   {"total", {l.total, &r.total}}};
  for (const auto& [name, vp] : terms) {
    const double v = static_cast<double>(tape.value(vp.first).item());
    if (!std::isfinite(v)) throw NumericError(name, "loss term is not finite");
    *vp.second = v;
  }
  return r;
}

template LossRecord read_losses<float>(const ad::Tape<float>&, const LossVars&);
template LossRecord read_losses<double>(const ad::Tape<double>&, const LossVars&);

CheckpointPaths::CheckpointPaths(const std::filesystem::path& base) : params(base) {
  config = base;
  config += ".cfg";
  state = base;
  state += ".state";
  adam = base;
  adam += ".adam";
}

Trainer::Trainer(const ModelConfig& cfg) : model_(cfg) {}

LossRecord Trainer::train_step(std::span<const Sample* const> batch) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  auto& params = model_.params();
  params.zero_grad();
  LossRecord mean;
  const std::uint64_t step = adam_.step + 1;
  for (const Sample* s : batch) {
    ad::Tape<float> tape;
    const auto out = model_.forward(tape, s->input, true, mix(mix(config().seed, step), s->row.id),
                                    &s->guide);
    const auto l = model_.losses(tape, out, s->targets);
    const LossRecord r = read_losses(tape, l);
    tape.backward(l.total);
    mean.cd += r.cd;
    mean.cd_edge += r.cd_edge;
    mean.cd_sharp += r.cd_sharp;
    mean.bce_p += r.bce_p;
    mean.bce_e += r.bce_e;
    mean.ld += r.ld;
    mean.ld_e += r.ld_e;
    mean.lo += r.lo;
    mean.lo_e += r.lo_e;
    mean.total += r.total;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double* v : {&mean.cd, &mean.cd_edge, &mean.cd_sharp, &mean.bce_p, &mean.bce_e, &mean.ld,
                    &mean.ld_e, &mean.lo, &mean.lo_e, &mean.total}) {
    *v *= inv;
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (auto& g : params[i].grad.storage()) g *= static_cast<float>(inv);
  }
  ad::AdamOptions opt;
  opt.lr = config().lr;
  ad::adam_step(params, adam_, opt);
  mean.step = adam_.step;
  return mean;
}

void Trainer::train_epoch(const std::vector<Sample>& data,
                          const std::function<void(const LossRecord&)>& on_step) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix(config().seed, 0xE90C + epoch_));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const std::size_t b = config().batch;
  std::vector<const Sample*> batch;
  for (std::size_t start = 0; start < order.size(); start += b) {
    batch.clear();
    for (std::size_t k = start; k < std::min(start + b, order.size()); ++k) batch.push_back(&data[order[k]]);
    const auto r = train_step(batch);
    if (on_step) on_step(r);
  }
  ++epoch_;
}

void Trainer::save(const std::filesystem::path& base) const {
  const CheckpointPaths p(base);
  if (p.params.has_parent_path()) std::filesystem::create_directories(p.params.parent_path());
  write_atomic(p.params, ad::encode_parameters(ad::snapshot(model_.params())));
  write_atomic(p.config, format_config(config()));
  write_atomic(p.state, "step = " + std::to_string(adam_.step) + "\nepoch = " + std::to_string(epoch_) + "\n");
  std::vector<ad::NamedArray> moments;
  const auto& store = model_.params();
  for (std::size_t i = 0; i < adam_.m.size(); ++i) {
    const auto& name = store[i].name;
    moments.push_back({"m/" + name, adam_.m[i].shape(), {adam_.m[i].storage().begin(), adam_.m[i].storage().end()}});
    moments.push_back({"v/" + name, adam_.v[i].shape(), {adam_.v[i].storage().begin(), adam_.v[i].storage().end()}});
  }
  write_atomic(p.adam, ad::encode_parameters(moments));
}

Trainer Trainer::resume(const std::filesystem::path& base) {
  const CheckpointPaths p(base);
  Trainer t(load_config(p.config));
  ad::restore(t.model_.params(), ad::load_parameters(p.params));

  std::istringstream state(read_file(p.state));
  std::string key, eq;
  std::uint64_t value = 0;
  while (state >> key >> eq >> value) {
    if (key == "step") t.adam_.step = value;
    else if (key == "epoch") t.epoch_ = static_cast<std::size_t>(value);
    else throw ParseError("unknown checkpoint state key '" + key + "'", 0);
  }

  const auto moments = ad::load_parameters(p.adam);
  if (!moments.empty()) {
    auto& store = t.model_.params();
    t.adam_.m.clear();
    t.adam_.v.clear();
    for (std::size_t i = 0; i < store.size(); ++i) {
      t.adam_.m.emplace_back(store[i].value.shape());
      t.adam_.v.emplace_back(store[i].value.shape());
    }
    for (const auto& a : moments) {
      const bool first = a.name.rfind("m/", 0) == 0;
      if (!first && a.name.rfind("v/", 0) != 0) {
        throw std::runtime_error("optimizer state entry '" + a.name + "' is malformed");
      }
      const std::string name = a.name.substr(2);
      std::size_t idx = store.size();
      for (std::size_t i = 0; i < store.size(); ++i) {
        if (store[i].name == name) idx = i;
      }
      if (idx == store.size() || store[idx].value.shape() != a.shape) {
        throw std::runtime_error("optimizer state entry '" + a.name + "' does not match the model");
      }
      auto& dst = first ? t.adam_.m[idx] : t.adam_.v[idx];
      std::copy(a.data.begin(), a.data.end(), dst.storage().begin());
    }
  }
  return t;
}

Completion complete_cloud(Model<float>& model, const ModelInput& input) {
  ad::Tape<float> tape;
  const auto out = model.forward(tape, input, false, mix(model.config().seed, kInferenceStream));
  Completion c;
  c.points = to_cloud(tape.value(out.completion.points));
  c.cells = out.completion.cells;
  c.fallback = out.completion.fallback;
  if (model.config().use_edges) c.edges = to_cloud(tape.value(out.edges.points));
  return c;
}

Model<float> load_model(const std::filesystem::path& base, std::optional<bool> use_edges) {
  const CheckpointPaths p(base);
  ModelConfig cfg = load_config(p.config);
  const bool trained_with_edges = cfg.use_edges;
  if (use_edges) {
    if (*use_edges && !trained_with_edges) {
      throw ConfigError("checkpoint " + base.string() + " was trained without the edge generator");
    }
    cfg.use_edges = *use_edges;
  }
  Model<float> model(cfg);
  auto arrays = ad::load_parameters(p.params);
  if (trained_with_edges && !cfg.use_edges) {
    std::erase_if(arrays, [](const ad::NamedArray& a) { return a.name.rfind("edge.", 0) == 0; });
  }
  ad::restore(model.params(), arrays);
  return model;
}

EvalResult evaluate(Model<float>& model, const std::vector<Sample>& data) {
  EvalResult r;
  std::map<std::string, std::pair<double, std::size_t>> by_kind;
  for (const auto& s : data) {
    const auto c = complete_cloud(model, s.input);
    const double cd = chamfer(c.points, s.complete);
    r.cd.push_back(cd);
    r.mean_cd += cd;
    auto& k = by_kind[to_string(s.row.kind)];
    k.first += cd;
    ++k.second;
  }
  r.mean_cd /= static_cast<double>(std::max<std::size_t>(1, data.size()));
  for (const auto& [kind, acc] : by_kind) r.mean_cd_by_kind[kind] = acc.first / static_cast<double>(acc.second);
  return r;
}

ModelConfig micro_config(std::uint64_t seed) {
  ModelConfig cfg;
  cfg.resolution = 8;
  cfg.channel_scale = 1.0 / 32.0;
  cfg.n_in = 64;
  cfg.m_out = 64;
  cfg.m_edge = 16;
  cfg.seed = seed;
  return cfg;
}

namespace {

struct MicroProblem {
  ModelInput input;
  PointCloud complete, edges;
};

MicroProblem micro_problem(const ModelConfig& cfg, std::uint64_t seed) {
  const auto shape = make_shape(varied_spec(ShapeKind::Lamp, 256, seed));
  MicroProblem p;
  p.complete = farthest_point_sample(shape, 128, 0);
  p.edges = extract_edges(p.complete, synth_edge_params(p.complete.size())).edges;
  p.input = prepare_input(occlude_by_viewpoint(p.complete, {seed, 0.25}), cfg);
  return p;
}

}  // namespace

ModelGradCheck model_grad_check(std::uint64_t seed, std::size_t coordinates, double eps) {
  const ModelConfig cfg = micro_config(seed);
  const MicroProblem prob = micro_problem(cfg, seed);
  const auto targets = make_targets<double>(prob.complete, prob.edges, cfg);
  const auto guide = make_guide(targets);
  Model<double> model(cfg);
  const std::uint64_t noise = mix(seed, 77);

  struct Eval {
    double total;
    std::vector<std::uint32_t> cells, edge_cells;
    std::uint64_t branches;
  };
  auto run = [&](ad::Tape<double>& tape) {
    const auto out = model.forward(tape, prob.input, true, noise, &guide);
    const auto l = model.losses(tape, out, targets);
    return std::pair{l.total, Eval{tape.value(l.total).item(), out.completion.cells, out.edges.cells,
                                           tape.branch_signature()}};
  };

  auto& params = model.params();
  params.zero_grad();
  ad::Tape<double> tape;
  const auto [loss, base] = run(tape);
  tape.backward(loss);

  std::vector<std::pair<std::size_t, std::size_t>> pool;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    for (std::size_t k = 0; k < params[i].value.size(); ++k) pool.emplace_back(i, k);
  }
  Rng rng(mix(seed, 0x6C));
  ModelGradCheck result;
  for (std::size_t attempts = 0; result.checked < coordinates && attempts < 20 * coordinates; ++attempts) {
    const auto [pi, k] = pool[rng.below(pool.size())];
    double& x = params[pi].value[k];
    const double x0 = x;
    bool changed = false;
    auto f = [&] {
      ad::Tape<double> t;
      const auto e = run(t).second;
      changed = changed || e.cells != base.cells || e.edge_cells != base.edge_cells ||
                e.branches != base.branches;
      return e.total;
    };
    const double fd = ad::central_difference(f, x, eps);
    x = x0;
    if (changed) {
      ++result.skipped;
      continue;
    }
    const double err = ad::relative_error(params[pi].grad[k], fd);
    result.names.push_back(params[pi].name + "[" + std::to_string(k) + "]");
    result.errors.push_back(err);
    result.max_rel_error = std::max(result.max_rel_error, err);
    ++result.checked;
  }
  return result;
}

double float_double_agreement(std::uint64_t seed) {
  const ModelConfig cfg = micro_config(seed);
  const MicroProblem prob = micro_problem(cfg, seed);
  Model<float> mf(cfg);
  Model<double> md(cfg);
  ad::Tape<float> tf;
  ad::Tape<double> td;
  const auto of = mf.forward(tf, prob.input, true, 5);
  const auto od = md.forward(td, prob.input, true, 5);
  auto rel = [](const auto& a, const auto& b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      diff = std::max(diff, std::abs(static_cast<double>(a[i]) - b[i]));
      scale = std::max(scale, std::abs(b[i]));
    }
    return diff / std::max(scale, 1e-30);
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < of.grid_features.size(); ++i) {
    worst = std::max(worst, rel(tf.value(of.grid_features[i]), td.value(od.grid_features[i])));
  }
  worst = std::max(worst, rel(tf.value(of.latent), td.value(od.latent)));
  worst = std::max(worst, rel(tf.value(of.decoder_features), td.value(od.decoder_features)));
  worst = std::max(worst, rel(tf.value(of.edge_full), td.value(od.edge_full)));
  if (of.completion.cells == od.completion.cells) {
    worst = std::max(worst, rel(tf.value(of.completion.points), td.value(od.completion.points)));
  }
  return worst;
}

}  // namespace voxedge
