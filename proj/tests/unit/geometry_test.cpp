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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "test_support.hpp"
#include "voxedge/geometry.hpp"

namespace voxedge {
namespace {

using testing::random_cloud;

// Full sort by (distance, index): the reference the grid index must match.
std::vector<std::size_t> knn_oracle(const PointCloud& pc, Point3 q, std::size_t k) {
  std::vector<std::size_t> idx(pc.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return squared_distance(pc[a], q) < squared_distance(pc[b], q);
  });
  idx.resize(k);
  return idx;
}

TEST(Knn, MatchesSortOracle) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto pc = random_cloud(seed, 300);
    const KnnIndex index(pc);
    Rng rng(seed + 100);
    for (int q = 0; q < 20; ++q) {
      const Point3 query{rng.uniform(), rng.uniform(), rng.uniform()};
      for (std::size_t k : {1, 7, 50, 300}) {
        EXPECT_EQ(index.query(query, k), knn_oracle(pc, query, k));
      }
    }
  }
}

TEST(Knn, ClusteredAndOutOfCubeClouds) {
  auto pc = random_cloud(4, 200, 0.4, 0.41);
  const auto far = random_cloud(5, 20, -3.0, 5.0);
  pc.points.insert(pc.points.end(), far.points.begin(), far.points.end());
  for (std::size_t i = 0; i < pc.size(); i += 13) {
    EXPECT_EQ(knn(pc, pc[i], 25), knn_oracle(pc, pc[i], 25));
  }
}

TEST(Knn, SelfQueryReturnsSelf) {
  const auto pc = random_cloud(2, 50);
  EXPECT_EQ(knn(pc, pc[17], 1), std::vector<std::size_t>{17});
}

TEST(Knn, SquareTiesBreakByIndex) {
  const PointCloud sq({{1, 1, 0}, {0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
  EXPECT_EQ(knn(sq, {0.5, 0.5, 0}, 4), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Knn, KLargerThanCloudThrows) {
  EXPECT_THROW(knn(random_cloud(1, 5), {0, 0, 0}, 6), std::invalid_argument);
}

TEST(Fps, CollinearPicksEndpoints) {
  const PointCloud line({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
  EXPECT_EQ(farthest_point_indices(line, 2, 0), (std::vector<std::size_t>{0, 3}));
}

TEST(Fps, FullSelectionIsPermutation) {
  const auto pc = random_cloud(3, 40);
  auto idx = farthest_point_indices(pc, pc.size(), 5);
  EXPECT_EQ(idx.front(), 5u);
  std::sort(idx.begin(), idx.end());
  for (std::size_t i = 0; i < idx.size(); ++i) EXPECT_EQ(idx[i], i);
}

TEST(Fps, SinglePointAndErrors) {
  const auto pc = random_cloud(3, 10);
  EXPECT_EQ(farthest_point_indices(pc, 1, 4), std::vector<std::size_t>{4});
  EXPECT_THROW(farthest_point_indices(pc, 11, 0), std::invalid_argument);
}

TEST(Fps, MinSpacingIsNonIncreasingInM) {
  const auto pc = random_cloud(8, 200);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t m = 2; m <= 60; m += 2) {
    const auto s = farthest_point_sample(pc, m, 0);
    double spacing = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = i + 1; j < s.size(); ++j) spacing = std::min(spacing, distance(s[i], s[j]));
    }
    EXPECT_LE(spacing, prev);
    prev = spacing;
  }
}

TEST(Normalize, FitsCubeWithMarginAndRoundTrips) {
  const auto pc = random_cloud(9, 100, -7.0, 13.0);
  const auto [out, tf] = normalize_to_unit_cube(pc, 32);
  double lo = 1.0, hi = 0.0;
  for (const auto& p : out) {
    for (std::size_t d = 0; d < 3; ++d) {
      EXPECT_GE(p[d], 0.0);
      EXPECT_LE(p[d], 1.0);
      lo = std::min(lo, p[d]);
      hi = std::max(hi, p[d]);
    }
  }
  EXPECT_NEAR(lo, 0.5 / 32, 1e-12);
  EXPECT_NEAR(hi, 1.0 - 0.5 / 32, 1e-12);
  const auto back = tf.invert(out);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    for (std::size_t d = 0; d < 3; ++d) EXPECT_NEAR(back[i][d], pc[i][d], 1e-12 * std::max(1.0, std::abs(pc[i][d])));
  }
  // Isotropic: distance ratios survive.
  const double r0 = distance(pc[0], pc[1]) / distance(pc[2], pc[3]);
  const double r1 = distance(out[0], out[1]) / distance(out[2], out[3]);
  EXPECT_NEAR(r0, r1, 1e-12 * r0);
}

TEST(Normalize, DegenerateCloudGoesToCenter) {
  const PointCloud pc({{5, 5, 5}});
  const auto [out, tf] = normalize_to_unit_cube(pc);
  EXPECT_EQ(out[0], (Point3{0.5, 0.5, 0.5}));
}

TEST(Normalize, CubeCornersKeepAspect) {
  PointCloud pc;
  for (int v = 0; v < 8; ++v) pc.points.push_back({10.0 * (v & 1), 10.0 * ((v >> 1) & 1), 10.0 * (v >> 2)});
  const auto [out, tf] = normalize_to_unit_cube(pc);
  for (const auto& p : out) {
    for (std::size_t d = 0; d < 3; ++d) EXPECT_TRUE(std::abs(p[d] - 1.0 / 64) < 1e-12 || std::abs(p[d] - 63.0 / 64) < 1e-12);
  }
}

TEST(Occlusion, RemovesNearestRankAroundViewpoint) {
  const auto pc = random_cloud(11, 10);
  // The viewpoint is pc[Rng(seed).below(N)]; pick a seed that lands on 0.
  std::uint64_t seed = 0;
  while (Rng(seed).below(10) != 0) ++seed;
  const auto survivors = occlusion_survivors(pc, {seed, 0.5});
  ASSERT_EQ(survivors.size(), 5u);
  auto order = knn_oracle(pc, pc[0], 10);
  std::set<std::size_t> expected(order.begin() + 5, order.end());
  EXPECT_EQ(std::set<std::size_t>(survivors.begin(), survivors.end()), expected);
  EXPECT_TRUE(std::is_sorted(survivors.begin(), survivors.end()));
}

TEST(Occlusion, ExactRatioAndDeterminism) {
  const auto pc = random_cloud(12, 1000);
  for (double ratio : {0.2, 0.3, 0.4}) {
    const auto a = occlude_by_viewpoint(pc, {7, ratio});
    EXPECT_EQ(a.size(), 1000u - static_cast<std::size_t>(ratio * 1000 + 1e-9));
    EXPECT_EQ(a, occlude_by_viewpoint(pc, {7, ratio}));
  }
  EXPECT_EQ(occlude_by_viewpoint(random_cloud(1, 3), {0, 0.2}).size(), 3u);
}

TEST(RequireFinite, RejectsNan) {
  PointCloud pc({{0, std::nan(""), 0}});
  EXPECT_THROW(require_finite(pc, "test"), std::invalid_argument);
}

}  // namespace
}  // namespace voxedge
