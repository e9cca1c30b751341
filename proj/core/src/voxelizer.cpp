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

#include "voxedge/voxelizer.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "voxedge/errors.hpp"
#include "voxedge/pointcloud_io.hpp"

namespace voxedge {

GridSpec::GridSpec(int r) : resolution(r) {
  if (r < 2 || (r & (r - 1)) != 0) {
    throw std::invalid_argument("GridSpec: resolution must be a power of two >= 2, got " +
                                std::to_string(r));
  }
}

std::array<int, 3> GridSpec::cell_of(Point3 p) const {
  std::array<int, 3> c{};
  for (std::size_t d = 0; d < 3; ++d) {
    if (!(p[d] >= 0.0 && p[d] <= 1.0)) {
      throw std::invalid_argument("coordinate " + std::to_string(p[d]) + " outside [0, 1]");
    }
    c[d] = std::min(static_cast<int>(p[d] * resolution), resolution - 1);
  }
  return c;
}

Point3 GridSpec::cell_center(std::size_t f) const {
  const auto r = static_cast<std::size_t>(resolution);
  const std::size_t iz = f % r;
  const std::size_t iy = (f / r) % r;
  const std::size_t ix = f / (r * r);
  const double w = cell_width();
  return {(ix + 0.5) * w, (iy + 0.5) * w, (iz + 0.5) * w};
}

std::vector<PointCloud> build_scale_pyramid(const PointCloud& pc, std::size_t levels) {
  if (levels < 1) throw std::invalid_argument("build_scale_pyramid: levels must be >= 1");
  const std::size_t need = std::size_t{1} << (levels - 1);
  if (pc.size() < need) {
    throw std::invalid_argument("build_scale_pyramid: " + std::to_string(pc.size()) +
                                " points cannot form " + std::to_string(levels) + " levels");
  }
  std::vector<PointCloud> out;
  out.reserve(levels);
  out.push_back(pc);
  for (std::size_t i = 1; i < levels; ++i) {
    const auto& prev = out.back();
    out.push_back(farthest_point_sample(prev, (prev.size() + 1) / 2, 0));
  }
  return out;
}

std::vector<std::uint32_t> cell_indices(const PointCloud& pc, const GridSpec& spec) {
  std::vector<std::uint32_t> cells(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const auto c = spec.cell_of(pc[i]);
    cells[i] = static_cast<std::uint32_t>(spec.flat(c[0], c[1], c[2]));
  }
  return cells;
}

CornerOffsets corner_offsets(const PointCloud& pc, const GridSpec& spec) {
  CornerOffsets out;
  const std::size_t n = pc.size();
  out.offsets.num_points = n;
  out.offsets.data.resize(3 * n * 8);
  out.cell_index.resize(n);
  const double r = spec.resolution;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = spec.cell_of(pc[i]);
    out.cell_index[i] = static_cast<std::uint32_t>(spec.flat(c[0], c[1], c[2]));
    for (std::size_t d = 0; d < 3; ++d) {
      const double local = pc[i][d] * r - c[d];
      for (std::size_t v = 0; v < 8; ++v) {
        const int bit = static_cast<int>((v >> (2 - d)) & 1U);
        out.offsets.data[(d * n + i) * 8 + v] = local - bit;
      }
    }
  }
  return out;
}

GridFeature aggregate_mean(std::span<const double> features, std::size_t channels,
                           std::span<const std::uint32_t> cell_index, const GridSpec& spec) {
  const std::size_t n = cell_index.size();
  if (features.size() != channels * n) {
    throw std::invalid_argument("aggregate_mean: feature array is not C x N");
  }
  GridFeature grid(static_cast<int>(channels), spec.resolution);
  const std::size_t cells = spec.cells();
  std::vector<std::uint32_t> count(cells, 0);
  for (auto c : cell_index) {
    if (c >= cells) throw std::invalid_argument("aggregate_mean: cell index out of range");
    ++count[c];
  }
  for (std::size_t ch = 0; ch < channels; ++ch) {
    double* row = grid.data.data() + ch * cells;
    for (std::size_t i = 0; i < n; ++i) row[cell_index[i]] += features[ch * n + i];
    for (std::size_t c = 0; c < cells; ++c) {
      if (count[c] > 0) row[c] /= count[c];
    }
  }
  return grid;
}

std::vector<std::uint8_t> binary_occupancy(const PointCloud& pc, const GridSpec& spec) {
  std::vector<std::uint8_t> occ(spec.cells(), 0);
  for (const auto& p : pc) {
    const auto c = spec.cell_of(p);
    occ[spec.flat(c[0], c[1], c[2])] = 1;
  }
  return occ;
}

OccupancyDensityGrid density_target(const PointCloud& pc, const GridSpec& spec) {
  if (pc.empty()) throw std::invalid_argument("density_target: empty cloud");
  OccupancyDensityGrid g;
  g.resolution = spec.resolution;
  g.occupancy.assign(spec.cells(), 0.0);
  g.density.assign(spec.cells(), 0.0);
  std::vector<std::uint64_t> count(spec.cells(), 0);
  for (auto c : cell_indices(pc, spec)) ++count[c];
  const double n = static_cast<double>(pc.size());
  for (std::size_t c = 0; c < spec.cells(); ++c) {
    if (count[c] > 0) {
      g.occupancy[c] = 1.0;
      g.density[c] = static_cast<double>(count[c]) / n;
    }
  }
  return g;
}

namespace {
constexpr char kGridMagic[8] = {'V', 'E', 'G', 'R', 'I', 'D', '\0', '\0'};
}

std::string encode_grid(const GridFeature& grid) {
  const std::size_t values = grid.data.size();
  std::string out(16 + values * sizeof(float), '\0');
  std::memcpy(out.data(), kGridMagic, 8);
  const auto c = static_cast<std::uint32_t>(grid.channels);
  const auto r = static_cast<std::uint32_t>(grid.resolution);
  std::memcpy(out.data() + 8, &c, 4);
  std::memcpy(out.data() + 12, &r, 4);
  for (std::size_t i = 0; i < values; ++i) {
    const auto f = static_cast<float>(grid.data[i]);
    std::memcpy(out.data() + 16 + i * sizeof(float), &f, sizeof(float));
  }
  return out;
}

GridFeature decode_grid(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kGridMagic, 8) != 0) {
    throw ParseError("not a VEGRID file", 0);
  }
  std::uint32_t c = 0;
  std::uint32_t r = 0;
  std::memcpy(&c, bytes.data() + 8, 4);
  std::memcpy(&r, bytes.data() + 12, 4);
  GridFeature g(static_cast<int>(c), static_cast<int>(r));
  if (bytes.size() != 16 + g.data.size() * sizeof(float)) {
    throw ParseError("VEGRID payload size does not match header", 0);
  }
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    float f;
    std::memcpy(&f, bytes.data() + 16 + i * sizeof(float), sizeof(float));
    g.data[i] = f;
  }
  return g;
}

void save_grid(const std::filesystem::path& path, const GridFeature& grid) {
  write_file(path, encode_grid(grid));
}

GridFeature load_grid(const std::filesystem::path& path) { return decode_grid(read_file(path)); }

}  // namespace voxedge
