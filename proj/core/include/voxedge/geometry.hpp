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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace voxedge {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double operator[](std::size_t d) const { return d == 0 ? x : (d == 1 ? y : z); }
  double& operator[](std::size_t d) { return d == 0 ? x : (d == 1 ? y : z); }

  friend Point3 operator+(Point3 a, Point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Point3 operator-(Point3 a, Point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Point3 operator*(double s, Point3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Point3&, const Point3&) = default;
};

inline double squared_distance(Point3 a, Point3 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

inline double distance(Point3 a, Point3 b) { return std::sqrt(squared_distance(a, b)); }

/// Ordered list of 3D points. Coordinates are finite; order is meaningful
/// (masks and FPS seeds refer to indices).
struct PointCloud {
  std::vector<Point3> points;

  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> pts) : points(std::move(pts)) {}

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const Point3& operator[](std::size_t i) const { return points[i]; }
  Point3& operator[](std::size_t i) { return points[i]; }
  auto begin() const { return points.begin(); }
  auto end() const { return points.end(); }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

/// Isotropic map into the unit cube: normalized = (p - center) * scale + 0.5.
struct NormTransform {
  Point3 center;
  double scale = 1.0;

  Point3 apply(Point3 p) const;
  Point3 invert(Point3 q) const;
  PointCloud apply(const PointCloud& pc) const;
  PointCloud invert(const PointCloud& pc) const;
};

struct OcclusionSpec {
  std::uint64_t seed = 0;
  double target_ratio = 0.25;
};

/// Throws std::invalid_argument when any coordinate is NaN or infinite.
void require_finite(const PointCloud& pc, const char* what);

/// Scales isotropically so the longest bounding-box axis spans exactly
/// [margin, 1 - margin], margin = 0.5 / resolution, and centers the box at
/// 0.5. A cloud of identical points maps to (0.5, 0.5, 0.5).
std::pair<PointCloud, NormTransform> normalize_to_unit_cube(const PointCloud& pc,
                                                            int resolution = 32);

/// Greedy farthest point sampling starting from pc[seed_index]. Distance ties
/// go to the lowest index.
PointCloud farthest_point_sample(const PointCloud& pc, std::size_t m,
                                 std::size_t seed_index = 0);

/// Index variant of farthest_point_sample; returns selected indices in
/// selection order.
std::vector<std::size_t> farthest_point_indices(const PointCloud& pc, std::size_t m,
                                                std::size_t seed_index = 0);

/// Uniform-grid bucketing over the bounding box of a cloud for exact k-NN.
/// Results match a full sort by (squared distance, index).
class KnnIndex {
 public:
  explicit KnnIndex(const PointCloud& pc);

  std::size_t size() const { return points_.size(); }

  /// k nearest indices to query in ascending distance; ties by lowest index.
  std::vector<std::size_t> query(Point3 query, std::size_t k) const;

  /// Single nearest neighbor; returns (index, squared distance).
  std::pair<std::size_t, double> nearest(Point3 query) const;

 private:
  std::array<int, 3> cell_of(Point3 p) const;
  std::size_t flat(int i, int j, int k) const;
  template <typename Visit>
  void visit_shell(const std::array<int, 3>& c, int r, Visit&& visit) const;

  std::vector<Point3> points_;
  Point3 origin_;
  double cell_width_ = 1.0;
  std::array<int, 3> dims_{1, 1, 1};
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> sorted_ids_;
};

std::vector<std::size_t> knn(const PointCloud& pc, Point3 query, std::size_t k);

/// Removes the floor(target_ratio * N) points nearest to a seed-chosen
/// viewpoint point; survivors keep input order.
PointCloud occlude_by_viewpoint(const PointCloud& pc, const OcclusionSpec& spec);

/// Indices kept by occlude_by_viewpoint, ascending.
std::vector<std::size_t> occlusion_survivors(const PointCloud& pc, const OcclusionSpec& spec);

PointCloud select(const PointCloud& pc, std::span<const std::size_t> indices);

}  // namespace voxedge
