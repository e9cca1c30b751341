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
#include <span>
#include <string>
#include <vector>

#include "voxedge/geometry.hpp"

namespace voxedge {

/// Regular R x R x R partition of the unit cube. Cells are addressed
/// (ix, iy, iz) and flattened z-fastest: (ix * R + iy) * R + iz.
struct GridSpec {
  int resolution = 32;

  explicit GridSpec(int r = 32);

  std::size_t cells() const {
    return static_cast<std::size_t>(resolution) * resolution * resolution;
  }
  double cell_width() const { return 1.0 / resolution; }
  std::size_t flat(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * resolution + iy) * resolution + iz;
  }
  /// Cell containing p; a coordinate of exactly 1.0 is clamped into the last
  /// cell. Throws std::invalid_argument outside [0, 1].
  std::array<int, 3> cell_of(Point3 p) const;
  Point3 cell_center(std::size_t flat_index) const;
};

/// Offsets from each point to the 8 corners of its cell in cell-width units,
/// stored as a dense 3 x N x 8 array: data[(d * N + i) * 8 + v]. Corner v
/// has unit offsets ((v >> 2) & 1, (v >> 1) & 1, v & 1) from the cell's
/// minimum vertex.
struct CornerOffsetTensor {
  std::size_t num_points = 0;
  std::vector<double> data;

  double at(std::size_t d, std::size_t i, std::size_t v) const {
    return data[(d * num_points + i) * 8 + v];
  }
};

struct CornerOffsets {
  CornerOffsetTensor offsets;
  std::vector<std::uint32_t> cell_index;
};

/// Dense C x R^3 per-cell features at one pyramid scale.
struct GridFeature {
  int channels = 0;
  int resolution = 0;
  std::vector<double> data;

  GridFeature() = default;
  GridFeature(int c, int r)
      : channels(c),
        resolution(r),
        data(static_cast<std::size_t>(c) * r * r * r, 0.0) {}

  std::size_t cells() const {
    return static_cast<std::size_t>(resolution) * resolution * resolution;
  }
  double& at(int c, std::size_t cell) { return data[c * cells() + cell]; }
  double at(int c, std::size_t cell) const { return data[c * cells() + cell]; }
};

struct OccupancyDensityGrid {
  int resolution = 0;
  std::vector<double> occupancy;
  std::vector<double> density;
};

/// Level 0 is the input; level i is FPS of level i-1 down to ceil(N_{i-1}/2).
std::vector<PointCloud> build_scale_pyramid(const PointCloud& pc, std::size_t levels = 5);

CornerOffsets corner_offsets(const PointCloud& pc, const GridSpec& spec);

std::vector<std::uint32_t> cell_indices(const PointCloud& pc, const GridSpec& spec);

/// features is C x N row-major. Empty cells are zero.
GridFeature aggregate_mean(std::span<const double> features, std::size_t channels,
                           std::span<const std::uint32_t> cell_index, const GridSpec& spec);

std::vector<std::uint8_t> binary_occupancy(const PointCloud& pc, const GridSpec& spec);

/// density[c] = (#points in c) / N, occupancy = binary_occupancy.
OccupancyDensityGrid density_target(const PointCloud& pc, const GridSpec& spec);

/// Flat binary grid file: "VEGRID\0\0", u32 C, u32 R, then C * R^3
/// little-endian float32, channel-major then z-fastest spatial order.
std::string encode_grid(const GridFeature& grid);
GridFeature decode_grid(const std::string& bytes);
void save_grid(const std::filesystem::path& path, const GridFeature& grid);
GridFeature load_grid(const std::filesystem::path& path);

}  // namespace voxedge
