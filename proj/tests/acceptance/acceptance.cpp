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

// One line per criterion: "PASS <name>: <detail>" or "FAIL <name>: <detail>".
// Usage: voxedge_acceptance <criterion|all> <workdir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "voxedge/ad/op_checks.hpp"
#include "voxedge/config.hpp"
#include "voxedge/edges.hpp"
#include "voxedge/metrics.hpp"
#include "voxedge/pointcloud_io.hpp"
#include "voxedge/synth.hpp"
#include "voxedge/trainer.hpp"
#include "voxedge/voxelizer.hpp"

namespace fs = std::filesystem;
using namespace voxedge;
using testing::random_cloud;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      detail << "[" << why << "] ";
    }
  }
};

using Criterion = std::function<void(Verdict&, const fs::path&)>;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void gradient_oracle(Verdict& v, const fs::path&) {
  double worst_op = 0.0;
  std::string worst_name;
  std::size_t ops = 0;
  for (const auto& r : ad::check_all_ops(1, 3)) {
    ++ops;
    v.require(r.shapes.size() >= 3, r.op + " has fewer than 3 shapes");
    v.require(r.max_rel_error < 1e-4, r.op + " " + sci(r.max_rel_error));
    if (r.max_rel_error > worst_op) {
      worst_op = r.max_rel_error;
      worst_name = r.op;
    }
  }
  double worst_model = 0.0;
  std::size_t checked = 0, skipped = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto m = model_grad_check(seed, 20);
    v.require(m.checked > 0, "model seed " + std::to_string(seed) + " checked nothing");
    v.require(m.max_rel_error < 1e-3, "model seed " + std::to_string(seed) + " " + sci(m.max_rel_error));
    worst_model = std::max(worst_model, m.max_rel_error);
    checked += m.checked;
    skipped += m.skipped;
  }
  v.detail << ops << " ops, worst " << worst_name << " " << sci(worst_op) << " (< 1e-4); micro model worst "
           << sci(worst_model) << " (< 1e-3) over " << checked << " parameters, " << skipped
           << " skipped at kinks";
}

PointCloud rigid(const PointCloud& pc, double angle, double s, Point3 t) {
  PointCloud out;
  const double c = std::cos(angle), sn = std::sin(angle);
  for (const auto& p : pc) {
    const double x = c * p[0] - sn * p[2], z = sn * p[0] + c * p[2];
    out.points.push_back({s * x + t[0], s * p[1] + t[1], s * z + t[2]});
  }
  return out;
}

void edge_oracle(Verdict& v, const fs::path&) {
  const EdgeParams settings[] = {EdgeParams{}, EdgeParams::completion3d()};
  std::size_t compared = 0, edges = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto pc = random_cloud(1000 + seed, 500);
    for (const auto& p : settings) {
      const auto fast = extract_edges(pc, p);
      v.require(fast.mask == extract_edges_bruteforce(pc, p), "cloud " + std::to_string(seed) + " differs");
      for (auto m : fast.mask) edges += m;
      ++compared;
    }
  }
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto pc = random_cloud(2000 + seed, 500);
    for (const auto& p : settings) {
      const auto base = extract_edges(pc, p).mask;
      v.require(extract_edges(rigid(pc, 0.3 * seed, 1.0, {1, -2, 0.5}), p).mask == base, "rigid motion");
      v.require(extract_edges(rigid(pc, 0.0, 0.1 * seed + 0.5, {0, 0, 0}), p).mask == base, "uniform scale");
    }
  }
  v.detail << compared << " cloud/setting pairs bit-identical (" << edges << " edge points), 5 clouds invariant";
}

double sq_oracle(const Point3& a, const Point3& b) {
  return (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]);
}

std::vector<double> nn_loop(const PointCloud& from, const PointCloud& to) {
  std::vector<double> out;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) best = std::min(best, sq_oracle(p, q));
    out.push_back(best);
  }
  return out;
}

void metric_oracles(Verdict& v, const fs::path&) {
  double worst_cd = 0.0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto p = random_cloud(3000 + s, 40 + 7 * s);
    const auto q = random_cloud(4000 + s, 60 + 3 * s);
    const auto pq = nn_loop(p, q), qp = nn_loop(q, p);
    double a = 0, b = 0, a5 = 0, b5 = 0;
    for (double d : pq) {
      a += d;
      a5 += std::pow(std::sqrt(d), 5);
    }
    for (double d : qp) {
      b += d;
      b5 += std::pow(std::sqrt(d), 5);
    }
    const double cd = a / p.size() + b / q.size();
    const double sharp = std::pow(a5, 0.2) / p.size() + std::pow(b5, 0.2) / q.size();
    worst_cd = std::max({worst_cd, std::abs(chamfer(p, q) - cd), std::abs(chamfer_sharp(p, q) - sharp)});
  }
  v.require(worst_cd <= 1e-12, "chamfer " + sci(worst_cd));

  auto gaussian = [](std::vector<double> m, std::vector<double> c) {
    GaussianStats g;
    g.mean = std::move(m);
    g.covariance = std::move(c);
    return g;
  };
  double worst_fpd = 0.0;
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    const double m1 = rng.uniform(-2, 2), m2 = rng.uniform(-2, 2), s1 = rng.uniform(0.1, 3), s2 = rng.uniform(0.1, 3);
    const double one_d = (m1 - m2) * (m1 - m2) + (s1 - s2) * (s1 - s2);
    worst_fpd = std::max(worst_fpd, std::abs(fpd(gaussian({m1}, {s1 * s1}), gaussian({m2}, {s2 * s2})) - one_d));
    std::vector<double> ma(3), mb(3), ca(9, 0.0), cb(9, 0.0);
    double diag = 0;
    for (std::size_t d = 0; d < 3; ++d) {
      ma[d] = rng.uniform(-1, 1);
      mb[d] = rng.uniform(-1, 1);
      ca[d * 4] = rng.uniform(0.1, 2);
      cb[d * 4] = rng.uniform(0.1, 2);
      diag += (ma[d] - mb[d]) * (ma[d] - mb[d]) +
              (std::sqrt(ca[d * 4]) - std::sqrt(cb[d * 4])) * (std::sqrt(ca[d * 4]) - std::sqrt(cb[d * 4]));
    }
    worst_fpd = std::max(worst_fpd, std::abs(fpd(gaussian(ma, ca), gaussian(mb, cb)) - diag));
  }
  v.require(worst_fpd <= 1e-8, "fpd " + sci(worst_fpd));

  const double h = std::sqrt(0.5);
  const double rot = registration_errors({1, 0, 0, 0}, {h, 0, 0, h}, {0, 0, 0}, {0, 0, 0}).rotation;
  // The quaternion components are rounded, so pi is reached to one ulp-scale tolerance.
  v.require(std::abs(rot - std::numbers::pi) <= 1e-15, "registration " + sci(rot - std::numbers::pi));

  const LossWeights w{};
  double LossParts::*fields[] = {&LossParts::cd, &LossParts::cd_edge, &LossParts::cd_sharp,
                                 &LossParts::bce_p, &LossParts::bce_e, &LossParts::ld,
                                 &LossParts::ld_e, &LossParts::lo, &LossParts::lo_e};
  const double coeff[] = {w.cd, w.cd, w.cd_sharp, w.bce, w.bce, w.density, w.density, w.locality, w.locality};
  // One term at a time, then all together against the hand-weighted sum.
  bool linear = true;
  const LossParts base{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double expected = 0.0;
  for (std::size_t i = 0; i < 9; ++i) {
    LossParts one{};
    one.*fields[i] = 2.0;
    linear = linear && std::abs(total_loss(one, w) - 2.0 * coeff[i]) <= 1e-12 * coeff[i];
    expected += coeff[i] * (base.*fields[i]);
  }
  linear = linear && std::abs(total_loss(base, w) - expected) <= 1e-12 * expected;
  v.require(linear, "total_loss linearity");
  v.detail << "chamfer/sharp max diff " << sci(worst_cd) << " over 20 instances; fpd closed forms " << sci(worst_fpd)
           << "; registration pi - " << sci(std::numbers::pi - rot) << "; total_loss linear in all 9 terms";
}

void voxel_round_trip(Verdict& v, const fs::path&) {
  const GridSpec spec(32);
  const double bound = std::sqrt(3.0) / 2.0 / 32.0;
  double worst = 0.0, worst_corner = 0.0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto pc = random_cloud(5000 + s, 300 + 20 * s);
    const auto g = density_target(pc, spec);
    std::vector<std::uint8_t> mask(g.occupancy.size());
    for (std::size_t c = 0; c < mask.size(); ++c) mask[c] = g.occupancy[c] > 0.5;
    const auto counts = allocate_points(g.density, mask, pc.size());
    PointCloud rec;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      for (std::size_t k = 0; k < counts[c]; ++k) rec.points.push_back(spec.cell_center(c));
    }
    for (double d : nearest_neighbors(pc, rec).squared_distance) worst = std::max(worst, std::sqrt(d));
    for (double d : nearest_neighbors(rec, pc).squared_distance) worst = std::max(worst, std::sqrt(d));

    const auto co = corner_offsets(pc, spec);
    for (std::size_t i = 0; i < pc.size(); ++i) {
      const auto cell = spec.cell_of(pc[i]);
      for (std::size_t vtx = 0; vtx < 8; ++vtx) {
        for (std::size_t d = 0; d < 3; ++d) {
          const double corner = cell[d] + static_cast<double>((vtx >> (2 - d)) & 1U);
          worst_corner = std::max(worst_corner, std::abs((corner + co.offsets.at(d, i, vtx)) / 32.0 - pc[i][d]));
        }
      }
    }
  }
  v.require(worst <= bound, "nearest distance " + sci(worst) + " > " + sci(bound));
  v.require(worst_corner <= 1e-12, "corner reconstruction " + sci(worst_corner));
  v.detail << "max nearest distance " << sci(worst) << " <= " << sci(bound) << "; corner reconstruction error "
           << sci(worst_corner);
}

fs::path config_dir() { return fs::path(VOXEDGE_CONFIG_DIR); }

std::string train_log(Trainer& tr, const std::vector<Sample>& data, std::size_t epochs) {
  std::string log = std::string(kLogHeader) + "\n";
  for (std::size_t e = 0; e < epochs; ++e) {
    tr.train_epoch(data, [&](const LossRecord& r) { log += format_log_row(r) + "\n"; });
  }
  return log;
}

void determinism(Verdict& v, const fs::path& work) {
  const auto plan = parse_synth_plan("resolution = 16\nratio = 0.25\ngenerate = 10 2048 100\n");
  const fs::path a = work / "det_a", b = work / "det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  make_dataset(plan, a);
  make_dataset(plan, b);
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto other = b / fs::relative(entry.path(), a);
    v.require(fs::exists(other) && read_file(entry.path()) == read_file(other),
              "dataset file " + fs::relative(entry.path(), a).string());
    ++files;
  }

  const auto cfg = load_config(config_dir() / "desk.cfg");
  const auto data_a = load_dataset(a, cfg);
  const auto data_b = load_dataset(b, cfg);
  Trainer ta(cfg), tb(cfg);
  const auto log_a = train_log(ta, data_a, 2);
  const auto log_b = train_log(tb, data_b, 2);
  v.require(log_a == log_b, "training logs differ");
  ta.save(work / "det_ckpt_a");
  tb.save(work / "det_ckpt_b");
  for (const char* ext : {"", ".adam", ".state", ".cfg"}) {
    v.require(read_file(work / ("det_ckpt_a" + std::string(ext))) == read_file(work / ("det_ckpt_b" + std::string(ext))),
              std::string("checkpoint") + ext);
  }
  auto ma = load_model(work / "det_ckpt_a");
  auto mb = load_model(work / "det_ckpt_b");
  std::size_t outputs = 0;
  for (std::size_t i = 0; i < data_a.size(); ++i) {
    const auto ca = complete_cloud(ma, data_a[i].input);
    const auto cb = complete_cloud(mb, data_b[i].input);
    v.require(encode_ply(ca.points, PlyEncoding::kBinaryLittleEndian) ==
                  encode_ply(cb.points, PlyEncoding::kBinaryLittleEndian),
              "inference sample " + std::to_string(i));
    ++outputs;
  }
  v.detail << files << " dataset files, " << std::count(log_a.begin(), log_a.end(), '\n') - 1
           << " log rows, checkpoints and " << outputs << " completions bitwise identical";
}

double mean_over(const EvalResult& r, const std::vector<Sample>& data, std::initializer_list<ShapeKind> kinds) {
  double s = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (auto k : kinds) {
      if (data[i].row.kind == k) {
        s += r.cd[i];
        ++n;
      }
    }
  }
  return n ? s / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

void desk_training(Verdict& v, const fs::path& work) {
  const auto train_dir = work / "desk_train", held_dir = work / "desk_heldout";
  fs::remove_all(train_dir);
  fs::remove_all(held_dir);
  make_dataset(load_synth_plan(config_dir() / "desk_synth.txt"), train_dir);
  make_dataset(load_synth_plan(config_dir() / "desk_heldout.txt"), held_dir);
  const auto cfg = load_config(config_dir() / "desk.cfg");
  const auto train = load_dataset(train_dir, cfg);
  const auto held = load_dataset(held_dir, cfg);
  v.require(train.size() == 50, "training set size");

  Trainer full(cfg);
  const auto untrained = evaluate(full.model(), held);
  auto run = [&](Trainer& tr) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t e = 0; e < cfg.epochs; ++e) tr.train_epoch(train, {});
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  const double full_s = run(full);
  const auto trained = evaluate(full.model(), held);

  auto ablated_cfg = cfg;
  ablated_cfg.use_edges = false;
  Trainer ablated(ablated_cfg);
  const double ablated_s = run(ablated);
  const auto no_edges = evaluate(ablated.model(), held);

  const double ratio = trained.mean_cd / untrained.mean_cd;
  const auto thin = {ShapeKind::Lamp, ShapeKind::Table};
  const double full_thin = mean_over(trained, held, thin);
  const double ablated_thin = mean_over(no_edges, held, thin);
  v.require(ratio <= 0.3, "trained/untrained " + sci(ratio) + " > 0.3");
  v.require(ablated_thin > full_thin, "no-edges lamp/table CD not worse");
  v.detail << "held-out CD " << sci(untrained.mean_cd) << " -> " << sci(trained.mean_cd) << " (ratio " << sci(ratio)
           << ", need <= 0.3); lamp/table CD full " << sci(full_thin) << " vs no-edges " << sci(ablated_thin)
           << " (lamp " << sci(trained.mean_cd_by_kind.at("lamp")) << "/" << sci(no_edges.mean_cd_by_kind.at("lamp"))
           << ", table " << sci(trained.mean_cd_by_kind.at("table")) << "/"
           << sci(no_edges.mean_cd_by_kind.at("table")) << "); training " << static_cast<int>(full_s) << " s + "
           << static_cast<int>(ablated_s) << " s";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: %s <criterion|all> <workdir>\n", argv[0]);
    return 2;
  }
  const std::vector<std::pair<std::string, Criterion>> criteria{
      {"gradient_oracle", gradient_oracle}, {"edge_oracle", edge_oracle},
      {"metric_oracles", metric_oracles},   {"voxel_round_trip", voxel_round_trip},
      {"determinism", determinism},         {"desk_training", desk_training}};
  const std::string want = argv[1];
  const fs::path work = argv[2];
  fs::create_directories(work);
  bool all_pass = true, ran = false;
  for (const auto& [name, fn] : criteria) {
    if (want != "all" && want != name) continue;
    ran = true;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(v, work);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.str().c_str(), secs);
    std::fflush(stdout);
    all_pass = all_pass && v.pass;
  }
  if (!ran) {
    std::fprintf(stderr, "unknown criterion '%s'\n", want.c_str());
    return 2;
  }
  return all_pass ? 0 : 1;
}
