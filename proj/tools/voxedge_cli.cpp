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

// voxedge command-line tool. Results go to stdout as JSON, progress and
// diagnostics to stderr. Exit codes: 0 success, 1 runtime or numeric
// failure, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "voxedge/ad/op_checks.hpp"
#include "voxedge/config.hpp"
#include "voxedge/edges.hpp"
#include "voxedge/errors.hpp"
#include "voxedge/metrics.hpp"
#include "voxedge/pointcloud_io.hpp"
#include "voxedge/synth.hpp"
#include "voxedge/trainer.hpp"
#include "voxedge/voxelizer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace voxedge;

namespace {

constexpr double kOpThreshold = 1e-4;
constexpr double kModelThreshold = 1e-3;

void emit(const json& j) { std::cout << j.dump() << "\n"; }

int run_synth(const fs::path& spec, const fs::path& out) {
  const auto plan = load_synth_plan(spec);
  const auto rows = make_dataset(plan, out);
  emit({{"samples", rows.size()}, {"out", out.string()}, {"resolution", plan.resolution}});
  return 0;
}

int run_edges(const fs::path& in, const fs::path& out, std::optional<std::size_t> k,
              std::optional<double> lambda, const std::string& profile,
              const std::optional<fs::path>& mask_out) {
  EdgeParams p = profile == "completion3d" ? EdgeParams::completion3d() : EdgeParams{};
  if (k) p.k = *k;
  if (lambda) p.lambda = *lambda;
  const auto cloud = load_pointcloud(in);
  const auto res = extract_edges(cloud, p);
  save_pointcloud(out, res.edges);
  if (mask_out) save_mask(*mask_out, res.mask);
  emit({{"points", cloud.size()}, {"edges", res.edges.size()}, {"k", p.k}, {"lambda", p.lambda}});
  return 0;
}

int run_voxelize(const fs::path& in, int resolution, const fs::path& out) {
  const GridSpec spec(resolution);
  const auto g = density_target(load_pointcloud(in), spec);
  GridFeature grid(2, resolution);
  std::copy(g.occupancy.begin(), g.occupancy.end(), grid.data.begin());
  std::copy(g.density.begin(), g.density.end(), grid.data.begin() + spec.cells());
  save_grid(out, grid);
  std::size_t occupied = 0;
  for (double v : g.occupancy) occupied += v > 0.5;
  emit({{"resolution", resolution}, {"occupied_cells", occupied}});
  return 0;
}

struct TrainArgs {
  fs::path config, data, out;
  std::optional<fs::path> log, eval_data;
  std::optional<std::size_t> epochs;
  std::optional<std::string> profile;
  bool no_edges = false;
  bool resume = false;
};

json eval_json(const EvalResult& r) {
  return {{"mean_cd", r.mean_cd}, {"by_kind", r.mean_cd_by_kind}, {"per_sample", r.cd}};
}

int run_train(const TrainArgs& a) {
  const bool resuming = a.resume && fs::exists(a.out);
  Trainer trainer = resuming ? Trainer::resume(a.out) : [&] {
    ModelConfig cfg = load_config(a.config);
    if (a.profile) {
      cfg.profile = *a.profile;
      cfg.weights = LossWeights::profile(*a.profile);
    }
    if (a.no_edges) cfg.use_edges = false;
    if (a.epochs) cfg.epochs = *a.epochs;
    cfg.validate();
    return Trainer(cfg);
  }();
  ModelConfig cfg = trainer.config();
  if (resuming && a.epochs) cfg.epochs = *a.epochs;

  const auto data = load_dataset(a.data, cfg);
  fs::path log_path = a.log.value_or(fs::path(a.out.string() + ".csv"));
  if (log_path.has_parent_path()) fs::create_directories(log_path.parent_path());
  std::ofstream log(log_path, resuming ? std::ios::app : std::ios::trunc);
  if (!log) throw std::runtime_error("cannot open log " + log_path.string());
  if (!resuming) log << kLogHeader << "\n";

  std::cerr << "training " << data.size() << " samples, epochs " << trainer.epoch() << ".." << cfg.epochs
            << (cfg.use_edges ? "" : " (no edges)") << "\n";
  LossRecord last;
  try {
    while (trainer.epoch() < cfg.epochs) {
      trainer.train_epoch(data, [&](const LossRecord& r) {
        log << format_log_row(r) << "\n";
        last = r;
      });
      log.flush();
      trainer.save(a.out);
      std::cerr << "epoch " << trainer.epoch() << " step " << trainer.step() << " total " << last.total
                << " cd " << last.cd << "\n";
    }
  } catch (const NumericError& e) {
    log.flush();
    std::cerr << "numeric failure in '" << e.term() << "' after step " << trainer.step()
              << "; last good checkpoint kept at " << a.out.string() << "\n";
    return 1;
  }
  if (!fs::exists(a.out)) trainer.save(a.out);
  json out{{"steps", trainer.step()}, {"epochs", trainer.epoch()}, {"checkpoint", a.out.string()},
           {"log", log_path.string()}, {"final_total", last.total}, {"final_cd", last.cd}};
  if (a.eval_data) {
    const auto eval = load_dataset(*a.eval_data, cfg);
    out["eval"] = eval_json(evaluate(trainer.model(), eval));
  }
  emit(out);
  return 0;
}

int run_complete(const fs::path& ckpt, const fs::path& in, const fs::path& out,
                 const std::optional<fs::path>& edges_out, bool no_edges, bool normalize) {
  auto model = load_model(ckpt, no_edges ? std::optional<bool>(false) : std::nullopt);
  PointCloud partial = load_pointcloud(in);
  NormTransform tf{};
  bool inverted = false;
  if (normalize) {
    auto [pc, t] = normalize_to_unit_cube(partial, model.config().resolution);
    partial = std::move(pc);
    tf = t;
    inverted = true;
  }
  const auto c = complete_cloud(model, prepare_input(partial, model.config()));
  save_pointcloud(out, inverted ? tf.invert(c.points) : c.points);
  if (edges_out) {
    if (!model.config().use_edges) throw std::runtime_error("--edges-out needs the edge generator");
    save_pointcloud(*edges_out, inverted ? tf.invert(c.edges) : c.edges);
  }
  if (c.fallback) std::cerr << "warning: no cell cleared the occupancy threshold\n";
  emit({{"points", c.points.size()}, {"edges", c.edges.size()}, {"fallback", c.fallback}});
  return 0;
}

int run_eval(const fs::path& pred_path, const fs::path& gt_path, const std::optional<fs::path>& input) {
  const auto pred = load_pointcloud(pred_path);
  const auto gt = load_pointcloud(gt_path);
  if (pred.empty() || gt.empty()) throw std::invalid_argument("eval: clouds must be non-empty");
  json out{{"cd", chamfer(pred, gt)}, {"cd_sharp", chamfer_sharp(pred, gt)}};
  if (input) out["fidelity"] = fidelity(load_pointcloud(*input), pred);
  emit(out);
  return 0;
}

int run_score(const fs::path& ckpt, const fs::path& data, bool no_edges) {
  auto model = load_model(ckpt, no_edges ? std::optional<bool>(false) : std::nullopt);
  emit(eval_json(evaluate(model, load_dataset(data, model.config()))));
  return 0;
}

int run_gradcheck(const std::string& scope, std::uint64_t seed) {
  if (scope == "ops") {
    json ops = json::array();
    bool pass = true;
    for (const auto& r : ad::check_all_ops(seed)) {
      const bool ok = r.max_rel_error < kOpThreshold;
      pass = pass && ok;
      std::fprintf(stderr, "%-18s %.3e %s\n", r.op.c_str(), r.max_rel_error, ok ? "ok" : "FAIL");
      ops.push_back({{"op", r.op}, {"max_rel_error", r.max_rel_error}, {"shapes", r.shapes}});
    }
    emit({{"scope", scope}, {"seed", seed}, {"threshold", kOpThreshold}, {"ops", ops}, {"pass", pass}});
    return pass ? 0 : 1;
  }
  const auto r = model_grad_check(seed);
  json coords = json::array();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    std::fprintf(stderr, "%-28s %.3e\n", r.names[i].c_str(), r.errors[i]);
    coords.push_back({{"param", r.names[i]}, {"rel_error", r.errors[i]}});
  }
  const bool pass = r.checked > 0 && r.max_rel_error < kModelThreshold;
  emit({{"scope", scope}, {"seed", seed}, {"threshold", kModelThreshold}, {"max_rel_error", r.max_rel_error},
        {"skipped", r.skipped}, {"coordinates", coords}, {"pass", pass}});
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxel-based edge-guided point cloud completion"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  fs::path spec, out, in, ckpt, pred, gt, data;
  std::optional<fs::path> mask_out, edges_out, input;
  std::optional<std::size_t> k;
  std::optional<double> lambda;
  std::string profile = "default";
  int resolution = 32;
  bool no_edges = false, normalize = false;
  std::string scope = "ops";
  std::uint64_t seed = 1;
  TrainArgs ta;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--spec", spec, "plan file")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", out, "output directory")->required();

  auto* edges = app.add_subcommand("edges", "extract edge points");
  edges->add_option("--in", in, "input cloud")->required()->check(CLI::ExistingFile);
  edges->add_option("--out", out, "edge cloud")->required();
  edges->add_option("--k", k, "neighbors")->check(CLI::PositiveNumber);
  edges->add_option("--lambda", lambda, "threshold ratio")->check(CLI::PositiveNumber);
  edges->add_option("--profile", profile, "default (k=100, lambda=5) or completion3d (k=150, lambda=1.8)")
      ->check(CLI::IsMember({"default", "completion3d"}));
  edges->add_option("--mask-out", mask_out, "write the 0/1 mask, one line per input point");

  auto* vox = app.add_subcommand("voxelize", "occupancy and density grids of a cloud");
  vox->add_option("--in", in, "input cloud in the unit cube")->required()->check(CLI::ExistingFile);
  vox->add_option("--resolution", resolution, "grid resolution")->check(CLI::PositiveNumber);
  vox->add_option("--out", out, "grid file")->required();

  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", ta.config, "config file")->check(CLI::ExistingFile);
  train->add_option("--data", ta.data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--out", ta.out, "checkpoint path")->required();
  train->add_option("--log", ta.log, "CSV log (default <out>.csv)");
  train->add_option("--epochs", ta.epochs, "override the configured epoch count");
  train->add_option("--profile", ta.profile, "loss profile")->check(CLI::IsMember({"completion3d", "pcn"}));
  train->add_option("--eval-data", ta.eval_data, "dataset scored after training")->check(CLI::ExistingDirectory);
  train->add_flag("--no-edges", ta.no_edges, "train without the edge generator");
  train->add_flag("--resume", ta.resume, "continue from the checkpoint at --out");

  auto* complete = app.add_subcommand("complete", "complete a partial cloud");
  complete->add_option("--ckpt", ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  complete->add_option("--in", in, "partial cloud")->required()->check(CLI::ExistingFile);
  complete->add_option("--out", out, "completed cloud")->required();
  complete->add_option("--edges-out", edges_out, "generated edge cloud");
  complete->add_flag("--no-edges", no_edges, "run with zero edge grids");
  complete->add_flag("--normalize", normalize, "normalize the input and map the output back");

  auto* eval = app.add_subcommand("eval", "compare a prediction with ground truth");
  eval->add_option("--pred", pred, "predicted cloud")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", gt, "ground-truth cloud")->required()->check(CLI::ExistingFile);
  eval->add_option("--input", input, "partial input, enables fidelity")->check(CLI::ExistingFile);

  auto* score = app.add_subcommand("score", "mean chamfer distance of a checkpoint over a dataset");
  score->add_option("--ckpt", ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  score->add_option("--data", data, "dataset directory")->required()->check(CLI::ExistingDirectory);
  score->add_flag("--no-edges", no_edges, "run with zero edge grids");

  auto* grad = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  grad->add_option("--scope", scope, "ops or model")->check(CLI::IsMember({"ops", "model"}));
  grad->add_option("--seed", seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) return run_synth(spec, out);
    if (*edges) return run_edges(in, out, k, lambda, profile, mask_out);
    if (*vox) return run_voxelize(in, resolution, out);
    if (*train) {
      if (ta.config.empty() && !(ta.resume && fs::exists(ta.out))) {
        std::cerr << "train: --config is required unless resuming\n";
        return 2;
      }
      return run_train(ta);
    }
    if (*complete) return run_complete(ckpt, in, out, edges_out, no_edges, normalize);
    if (*eval) return run_eval(pred, gt, input);
    if (*score) return run_score(ckpt, data, no_edges);
    if (*grad) return run_gradcheck(scope, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
