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
#include <span>
#include <string>
#include <vector>

#include "voxedge/ad/ops.hpp"
#include "voxedge/ad/tape.hpp"
#include "voxedge/config.hpp"
#include "voxedge/geometry.hpp"
#include "voxedge/metrics.hpp"
#include "voxedge/rng.hpp"

namespace voxedge {

/// Network input for one normalized partial cloud: per pyramid level the
/// corner offsets laid out as [24, N_i] (row d * 8 + v) and each point's cell.
struct ModelInput {
  std::vector<ad::NdArray<double>> corner_features;
  std::vector<std::vector<std::uint32_t>> cells;
  PointCloud points;
};

/// Farthest-point samples the cloud down to cfg.n_in (when larger), builds
/// the log2(R)-level pyramid and the corner offsets of every level on the
/// grid of matching resolution R / 2^i.
ModelInput prepare_input(const PointCloud& partial, const ModelConfig& cfg);

/// Splits m points over masked cells by largest remainder on m * density:
/// floors first, then one extra point per cell in order of decreasing
/// remainder (ties to the lower cell index). Counts sum to m exactly.
std::vector<std::size_t> allocate_points(std::span<const double> density,
                                         std::span<const std::uint8_t> mask, std::size_t m);

/// Output of one point generator head.
struct GeneratedPoints {
  ad::Var points;      // [3, M] in normalized coordinates
  ad::Var occupancy;   // [1, R, R, R] sigmoid probabilities
  ad::Var density;     // [R^3], zero outside the occupied mask
  std::vector<std::uint32_t> cells;   // generating cell per point
  std::vector<std::uint8_t> mask;     // occupied cells (p > 0.5)
  std::vector<std::size_t> counts;    // points per cell
  bool fallback = false;              // no cell cleared the threshold
};

/// Ground-truth occupied-cell masks at the base resolution. An empty or
/// all-zero mask leaves the corresponding generator on its own prediction.
struct OccupancyGuide {
  std::vector<std::uint8_t> completion;
  std::vector<std::uint8_t> edges;
};

struct ForwardOutputs {
  std::vector<ad::Var> grid_features;  // P_f^0 .. P_f^{L-1}
  ad::Var latent;                      // z
  ad::Var edge_half;                   // [1, R/2, R/2, R/2]
  ad::Var edge_full;                   // [1, R, R, R]
  ad::Var decoder_features;            // refinement output at R
  GeneratedPoints completion;
  GeneratedPoints edges;               // empty when edges are disabled
};

/// Supervision for one sample, all as flat arrays in the model precision.
template <typename T>
struct TrainingTargets {
  std::vector<T> complete;  // [3, Mq]
  std::vector<T> edges;     // [3, Me], may be empty
  std::vector<T> occupancy;
  std::vector<T> density;
  std::vector<T> edge_occupancy;
  std::vector<T> edge_density;
  std::vector<T> edge_occupancy_half;
};

/// Cells with target occupancy above one half.
template <typename T>
OccupancyGuide make_guide(const TrainingTargets<T>& targets);

template <typename T>
TrainingTargets<T> make_targets(const PointCloud& complete, const PointCloud& edges,
                                const ModelConfig& cfg);

/// Differentiable loss terms plus the weighted total.
struct LossVars {
  ad::Var cd, cd_edge, cd_sharp, bce_p, bce_e, ld, ld_e, lo, lo_e, total;
};

/// Edge-guided voxel completion network at a configurable width.
///
/// Pipeline: multi-scale grid head -> edge generator and shape encoder ->
/// refinement decoder (AdaIN on the latent, edge grids injected at the two
/// finest cells) -> per-cell point generator.
template <typename T>
class Model {
 public:
  explicit Model(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  ad::ParameterStore<T>& params() { return params_; }
  const ad::ParameterStore<T>& params() const { return params_; }

  /// training selects batch statistics (and updates running averages) in
  /// batch norm. noise_seed drives the 2-D folding samples. A non-null
  /// guide replaces the predicted p > 0.5 masks with ground-truth occupancy
  /// when choosing the cells that emit points.
  ForwardOutputs forward(ad::Tape<T>& tape, const ModelInput& input, bool training,
                         std::uint64_t noise_seed, const OccupancyGuide* guide = nullptr);

  LossVars losses(ad::Tape<T>& tape, const ForwardOutputs& out,
                  const TrainingTargets<T>& targets) const;

  /// Expected P_f^i shapes for this configuration.
  std::vector<ad::Shape> grid_feature_shapes() const;
  std::size_t latent_size() const;

 private:
  struct Widths {
    std::vector<int> grid;     // per pyramid level
    std::vector<int> encoder;  // per shape-encoder block
    std::vector<int> decoder;  // per pyramid level
    int edge1, edge2, edge3;
    int latent;
    int hidden;
  };

  void build();
  void add_conv(const std::string& name, int cin, int cout, int k);
  void add_tconv(const std::string& name, int cin, int cout, int k);
  void add_pointwise(const std::string& name, int cin, int cout);
  void add_norm(const std::string& name, int c, bool running);
  void add_adain(const std::string& name, int c);
  void add_point_generator(const std::string& name, int c);

  ad::Var bind(ad::Tape<T>& t, const std::string& name);
  ad::Var conv(ad::Tape<T>& t, ad::Var x, const std::string& name, ad::ConvOptions opt);
  ad::Var tconv(ad::Tape<T>& t, ad::Var x, const std::string& name);
  ad::Var pointwise(ad::Tape<T>& t, ad::Var x, const std::string& name);
  ad::Var inorm(ad::Tape<T>& t, ad::Var x, const std::string& name);
  ad::Var bnorm(ad::Tape<T>& t, ad::Var x, const std::string& name, bool training);
  ad::Var adain(ad::Tape<T>& t, ad::Var x, ad::Var z, const std::string& name);
  GeneratedPoints generate(ad::Tape<T>& t, ad::Var features, const std::string& name,
                           std::size_t m, std::uint64_t seed,
                           const std::vector<std::uint8_t>* guide);

  Rng init_rng(const std::string& name) const;

  ModelConfig cfg_;
  Widths widths_;
  ad::ParameterStore<T> params_;
};

extern template class Model<float>;
extern template class Model<double>;

}  // namespace voxedge
