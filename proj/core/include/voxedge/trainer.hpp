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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "voxedge/ad/optim.hpp"
#include "voxedge/config.hpp"
#include "voxedge/model.hpp"
#include "voxedge/synth.hpp"

namespace voxedge {

struct Sample {
  ManifestRow row;
  PointCloud partial;
  PointCloud complete;
  PointCloud edges;
  ModelInput input;
  TrainingTargets<float> targets;
  OccupancyGuide guide;
};

/// Reads every manifest row under dir and precomputes model inputs and grid
/// targets for cfg.
std::vector<Sample> load_dataset(const std::filesystem::path& dir, const ModelConfig& cfg);
Sample make_sample(const ManifestRow& row, PointCloud partial, PointCloud complete,
                   PointCloud edges, const ModelConfig& cfg);

struct LossRecord {
  std::uint64_t step = 0;
  double cd = 0, cd_edge = 0, cd_sharp = 0, bce_p = 0, bce_e = 0, ld = 0, ld_e = 0, lo = 0,
         lo_e = 0, total = 0;
};

inline constexpr const char* kLogHeader = "step,cd,cd_edge,cd_sharp,bce_p,bce_e,ld,ld_e,lo,lo_e,total";
std::string format_log_row(const LossRecord& r);

/// Scalar loss terms read off a tape. Throws NumericError naming the first
/// non-finite term in log-column order.
template <typename T>
LossRecord read_losses(const ad::Tape<T>& tape, const LossVars& l);

struct Completion {
  PointCloud points;
  PointCloud edges;
  std::vector<std::uint32_t> cells;
  bool fallback = false;
};

/// Paths of a checkpoint and its sidecars.
struct CheckpointPaths {
  std::filesystem::path params, config, state, adam;
  explicit CheckpointPaths(const std::filesystem::path& base);
};

class Trainer {
 public:
  explicit Trainer(const ModelConfig& cfg);

  Model<float>& model() { return model_; }
  const ModelConfig& config() const { return model_.config(); }
  std::uint64_t step() const { return adam_.step; }
  std::size_t epoch() const { return epoch_; }

  /// Forward and backward on every sample, mean gradient, one Adam update.
  /// Points are emitted from ground-truth occupied cells while training.
  /// Returns batch-mean loss terms; the store is untouched on NumericError.
  LossRecord train_step(std::span<const Sample* const> batch);

  /// One pass over the data in a seed-determined order.
  void train_epoch(const std::vector<Sample>& data, const std::function<void(const LossRecord&)>& on_step);

  /// Writes params, config, optimizer state and step counters.
  void save(const std::filesystem::path& base) const;
  /// Loads a checkpoint written by save(); the stored config replaces the
  /// constructor config.
  static Trainer resume(const std::filesystem::path& base);

 private:
  Model<float> model_;
  ad::AdamState<float> adam_;
  std::size_t epoch_ = 0;
};

/// Deterministic inference: evaluation-mode forward with a seed tied to cfg.seed.
Completion complete_cloud(Model<float>& model, const ModelInput& input);

/// Loads a checkpoint's params into a fresh model built from its config.
/// Passing use_edges = false on a checkpoint trained with edges runs the
/// ablation path: edge-generator weights are ignored and edge grids are zero.
Model<float> load_model(const std::filesystem::path& base, std::optional<bool> use_edges = {});

struct EvalResult {
  double mean_cd = 0.0;
  std::vector<double> cd;                       // per sample
  std::map<std::string, double> mean_cd_by_kind;
};

EvalResult evaluate(Model<float>& model, const std::vector<Sample>& data);

struct ModelGradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // discrete structure changed under perturbation
  std::vector<std::string> names;
  std::vector<double> errors;
};

/// End-to-end finite-difference check of the total loss in double precision
/// on a micro configuration (R=8, minimal widths, N=64, M=64).
ModelGradCheck model_grad_check(std::uint64_t seed, std::size_t coordinates = 20, double eps = 1e-5);

/// Maximum relative difference between float and double training-mode
/// forwards of the same micro model.
double float_double_agreement(std::uint64_t seed);

ModelConfig micro_config(std::uint64_t seed);

}  // namespace voxedge
