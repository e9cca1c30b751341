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

#include "voxedge/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "voxedge/rng.hpp"

namespace voxedge {

Point3 NormTransform::apply(Point3 p) const {
  return {(p.x - center.x) * scale + 0.5, (p.y - center.y) * scale + 0.5,
          (p.z - center.z) * scale + 0.5};
}

Point3 NormTransform::invert(Point3 q) const {
  return {(q.x - 0.5) / scale + center.x, (q.y - 0.5) / scale + center.y,
          (q.z - 0.5) / scale + center.z};
}

PointCloud NormTransform::apply(const PointCloud& pc) const {
  PointCloud out;
  out.points.reserve(pc.size());
  for (const auto& p : pc) out.points.push_back(apply(p));
  return out;
}

PointCloud NormTransform::invert(const PointCloud& pc) const {
  PointCloud out;
  out.points.reserve(pc.size());
  for (const auto& p : pc) out.points.push_back(invert(p));
  return out;
}

void require_finite(const PointCloud& pc, const char* what) {
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const auto& p = pc[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw std::invalid_argument(std::string(what) + ": non-finite coordinate at point " +
                                  std::to_string(i));
    }
  }
}

std::pair<PointCloud, NormTransform> normalize_to_unit_cube(const PointCloud& pc,
                                                            int resolution) {
  if (pc.empty()) throw std::invalid_argument("normalize_to_unit_cube: empty cloud");
  if (resolution < 1) throw std::invalid_argument("normalize_to_unit_cube: resolution < 1");
  require_finite(pc, "normalize_to_unit_cube");

  Point3 lo = pc[0];
  Point3 hi = pc[0];
  for (const auto& p : pc) {
    for (std::size_t d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  }
  NormTransform t;
  t.center = 0.5 * (lo + hi);
  const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  const double margin = 0.5 / resolution;
  t.scale = extent > 0.0 ? (1.0 - 2.0 * margin) / extent : 1.0;
  return {t.apply(pc), t};
}

std::vector<std::size_t> farthest_point_indices(const PointCloud& pc, std::size_t m,
                                                std::size_t seed_index) {
  const std::size_t n = pc.size();
  if (m < 1 || m > n) {
    throw std::invalid_argument("farthest_point_sample: m=" + std::to_string(m) +
                                " outside [1, " + std::to_string(n) + "]");
  }
  if (seed_index >= n) throw std::invalid_argument("farthest_point_sample: seed index out of range");

  std::vector<std::size_t> chosen;
  chosen.reserve(m);
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::size_t current = seed_index;
  for (std::size_t s = 0; s < m; ++s) {
    chosen.push_back(current);
    min_d2[current] = -1.0;
    std::size_t best = n;
    double best_d2 = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (min_d2[i] < 0.0) continue;
      min_d2[i] = std::min(min_d2[i], squared_distance(pc[i], pc[current]));
      if (min_d2[i] > best_d2) {
        best_d2 = min_d2[i];
        best = i;
      }
    }
    current = best;
  }
  return chosen;
}

PointCloud farthest_point_sample(const PointCloud& pc, std::size_t m, std::size_t seed_index) {
  const auto idx = farthest_point_indices(pc, m, seed_index);
  return select(pc, idx);
}

PointCloud select(const PointCloud& pc, std::span<const std::size_t> indices) {
  PointCloud out;
  out.points.reserve(indices.size());
  for (auto i : indices) out.points.push_back(pc.points.at(i));
  return out;
}

namespace {

constexpr int kTargetPerCell = 4;
constexpr int kMaxDim = 64;

}  // namespace

KnnIndex::KnnIndex(const PointCloud& pc) : points_(pc.points) {
  if (points_.empty()) return;
  Point3 lo = points_[0];
  Point3 hi = points_[0];
  for (const auto& p : points_) {
    for (std::size_t d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  }
  origin_ = lo;
  const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  const double cells_per_axis =
      std::cbrt(static_cast<double>(points_.size()) / kTargetPerCell);
  const int target = std::clamp(static_cast<int>(std::ceil(cells_per_axis)), 1, kMaxDim);
  cell_width_ = extent > 0.0 ? extent / target : 1.0;
  for (std::size_t d = 0; d < 3; ++d) {
    const double span = hi[d] - lo[d];
    dims_[d] = std::clamp(static_cast<int>(std::floor(span / cell_width_)) + 1, 1, kMaxDim + 1);
  }

  const std::size_t ncell = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  std::vector<std::uint32_t> counts(ncell + 1, 0);
  std::vector<std::size_t> cell_ids(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto c = cell_of(points_[i]);
    cell_ids[i] = flat(c[0], c[1], c[2]);
    ++counts[cell_ids[i] + 1];
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  cell_start_ = counts;
  sorted_ids_.resize(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    sorted_ids_[counts[cell_ids[i]]++] = static_cast<std::uint32_t>(i);
  }
}

std::array<int, 3> KnnIndex::cell_of(Point3 p) const {
  std::array<int, 3> c{};
  for (std::size_t d = 0; d < 3; ++d) {
    const double t = std::floor((p[d] - origin_[d]) / cell_width_);
    c[d] = static_cast<int>(std::clamp(t, 0.0, static_cast<double>(dims_[d] - 1)));
  }
  return c;
}

std::size_t KnnIndex::flat(int i, int j, int k) const {
  return (static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k;
}

template <typename Visit>
void KnnIndex::visit_shell(const std::array<int, 3>& c, int r, Visit&& visit) const {
  const int i0 = std::max(c[0] - r, 0), i1 = std::min(c[0] + r, dims_[0] - 1);
  const int j0 = std::max(c[1] - r, 0), j1 = std::min(c[1] + r, dims_[1] - 1);
  const int k0 = std::max(c[2] - r, 0), k1 = std::min(c[2] + r, dims_[2] - 1);
  for (int i = i0; i <= i1; ++i) {
    for (int j = j0; j <= j1; ++j) {
      const bool face = std::abs(i - c[0]) == r || std::abs(j - c[1]) == r;
      for (int k = k0; k <= k1; ++k) {
        if (!face && std::abs(k - c[2]) != r) continue;
        const std::size_t f = flat(i, j, k);
        for (std::uint32_t s = cell_start_[f]; s < cell_start_[f + 1]; ++s) visit(sorted_ids_[s]);
      }
    }
  }
}

std::vector<std::size_t> KnnIndex::query(Point3 q, std::size_t k) const {
  if (k > points_.size()) {
    throw std::invalid_argument("knn: k=" + std::to_string(k) + " exceeds cloud size " +
                                std::to_string(points_.size()));
  }
  if (k == 0) return {};
  using Cand = std::pair<double, std::size_t>;
  std::vector<Cand> cand;
  const auto c = cell_of(q);
  // Points outside the Chebyshev shell r around the query cell lie farther
  // than (r - 1) * w plus the query's offset inside its own cell. A bound of
  // dist_to_cell_boundary + (r - 1) * w is exact; stop once the k-th
  // candidate is strictly closer than that.
  double inner = std::numeric_limits<double>::infinity();
  for (std::size_t d = 0; d < 3; ++d) {
    const double lo = origin_[d] + c[d] * cell_width_;
    const double hi = lo + cell_width_;
    // Cells on the grid border extend to infinity because of clamping.
    const double to_lo = c[d] == 0 ? std::numeric_limits<double>::infinity() : q[d] - lo;
    const double to_hi = c[d] == dims_[d] - 1 ? std::numeric_limits<double>::infinity() : hi - q[d];
    inner = std::min({inner, std::max(to_lo, 0.0), std::max(to_hi, 0.0)});
  }
  const int max_r = std::max({dims_[0], dims_[1], dims_[2]});
  for (int r = 0; r <= max_r; ++r) {
    visit_shell(c, r, [&](std::uint32_t id) {
      cand.emplace_back(squared_distance(points_[id], q), id);
    });
    if (cand.size() >= k) {
      std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1), cand.end());
      const double kth = cand[k - 1].first;
      const double bound = inner + r * cell_width_;
      if (kth < bound * bound) break;
    }
  }
  std::sort(cand.begin(), cand.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = cand[i].second;
  return out;
}

std::pair<std::size_t, double> KnnIndex::nearest(Point3 q) const {
  const auto idx = query(q, 1);
  return {idx[0], squared_distance(points_[idx[0]], q)};
}

std::vector<std::size_t> knn(const PointCloud& pc, Point3 query, std::size_t k) {
  if (k > pc.size()) {
    throw std::invalid_argument("knn: k=" + std::to_string(k) + " exceeds cloud size " +
                                std::to_string(pc.size()));
  }
  return KnnIndex(pc).query(query, k);
}

std::vector<std::size_t> occlusion_survivors(const PointCloud& pc, const OcclusionSpec& spec) {
  if (!(spec.target_ratio > 0.0 && spec.target_ratio < 1.0)) {
    throw std::invalid_argument("occlude_by_viewpoint: target_ratio must lie in (0, 1)");
  }
  const std::size_t n = pc.size();
  std::vector<std::size_t> keep(n);
  std::iota(keep.begin(), keep.end(), std::size_t{0});
  if (n == 0) return keep;
  // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
  const auto removed = static_cast<std::size_t>(std::floor(spec.target_ratio * n + 1e-9));
  if (removed == 0) return keep;

  Rng rng(spec.seed);
  const Point3 view = pc[rng.below(n)];
  std::vector<std::pair<double, std::size_t>> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = {squared_distance(pc[i], view), i};
  std::sort(order.begin(), order.end());
  std::vector<char> drop(n, 0);
  for (std::size_t i = 0; i < removed; ++i) drop[order[i].second] = 1;
  keep.clear();
  for (std::size_t i = 0; i < n; ++i) {
    if (!drop[i]) keep.push_back(i);
  }
  return keep;
}

PointCloud occlude_by_viewpoint(const PointCloud& pc, const OcclusionSpec& spec) {
  const auto keep = occlusion_survivors(pc, spec);
  return select(pc, keep);
}

}  // namespace voxedge
