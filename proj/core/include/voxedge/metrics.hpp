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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "voxedge/geometry.hpp"
#include "voxedge/voxelizer.hpp"

namespace voxedge {

/// Loss weights for total_loss. The default profile is the one used for the
/// Completion3D-style data; pcn() drops the sharp-Chamfer and locality terms.
struct LossWeights {
  double cd = 1e4;        // lambda1: CD + CD_edge
  double cd_sharp = 300;  // lambda2
  double bce = 100;       // lambda3: BCE_P + BCE_E
  double density = 1e10;  // lambda4: Ld + Ld_edge
  double locality = 0.3;  // lambda5: Lo + Lo_edge

  static LossWeights completion3d() { return {}; }
  static LossWeights pcn() { return {1e4, 0.0, 100, 1e10, 0.0}; }
  /// "completion3d" or "pcn"; anything else throws ConfigError.
  static LossWeights profile(const std::string& name);
};

/// Every scalar entering the combined objective.
struct LossParts {
  double cd = 0.0;
  double cd_edge = 0.0;
  double cd_sharp = 0.0;
  double bce_p = 0.0;
  double bce_e = 0.0;
  double ld = 0.0;
  double ld_e = 0.0;
  double lo = 0.0;
  double lo_e = 0.0;
};

struct GaussianStats {
  std::vector<double> mean;
  std::vector<double> covariance;  // d x d row-major

  std::size_t dim() const { return mean.size(); }
  /// Sample mean and (N - 1)-normalized covariance of feature rows.
  static GaussianStats fit(std::span<const double> rows, std::size_t dim);
};

using Quaternion = std::array<double, 4>;  // (w, x, y, z)

struct RegistrationErrors {
  double rotation = 0.0;
  double translation = 0.0;
};

inline constexpr double kBceEpsilon = 1e-7;

/// For every point of from, its nearest neighbor in to: (index, squared
/// distance).
struct NearestResult {
  std::vector<std::uint32_t> index;
  std::vector<double> squared_distance;
};
NearestResult nearest_neighbors(const PointCloud& from, const PointCloud& to);

/// (1/N) sum_p d(p,Q)^2 + (1/M) sum_q d(q,P)^2.
double chamfer(const PointCloud& p, const PointCloud& q);

/// (1/N) (sum_p d(p,Q)^5)^(1/5) + (1/M) (sum_q d(q,P)^5)^(1/5); the
/// normalization sits outside the root.
double chamfer_sharp(const PointCloud& p, const PointCloud& q);

/// Mean binary cross-entropy over all cells, predictions clamped to
/// [eps, 1 - eps].
double bce_grid(std::span<const double> pred, std::span<const double> gt);

double density_mse(std::span<const double> pred, std::span<const double> gt);

/// Sum over points of max(|p - center(cell)| - sqrt(3), 0), distances in
/// cell widths.
double locality_loss(const PointCloud& points, std::span<const std::uint32_t> cell_assignment,
                     const GridSpec& spec);

/// Combined objective; throws NumericError naming the first non-finite part.
double total_loss(const LossParts& parts, const LossWeights& w);

/// Mean unsquared distance from each input point to its nearest output point.
double fidelity(const PointCloud& input, const PointCloud& output);

/// Squared mean difference plus Tr(Sx + Sy - 2 (Sx Sy)^(1/2)), with the root
/// trace taken from the symmetric product Sx^(1/2) Sy Sx^(1/2).
double fpd(const GaussianStats& x, const GaussianStats& y);

/// rotation = 2 acos(clamp(2 <q1,q2>^2 - 1)), translation = |t1 - t2|.
RegistrationErrors registration_errors(const Quaternion& q1, const Quaternion& q2,
                                       const Point3& t1, const Point3& t2);

}  // namespace voxedge
