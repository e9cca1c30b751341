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
#include <vector>

#include "voxedge/geometry.hpp"

namespace voxedge {

/// Centroid-displacement edge rule parameters. Defaults are the profile for
/// 2048-point synthetic shapes; completion3d() is the sparser-benchmark
/// profile.
struct EdgeParams {
  std::size_t k = 100;
  double lambda = 5.0;

  static EdgeParams completion3d() { return {150, 1.8}; }
  void validate() const;
};

struct EdgeResult {
  std::vector<std::uint8_t> mask;
  PointCloud edges;
};

/// For each point p: c = centroid of its k nearest neighbors (p itself
/// excluded), v = distance to the closest of them; p is an edge point when
/// |c - p| > lambda * v. When v == 0 (duplicates) the test becomes
/// |c - p| > 1e-12.
EdgeResult extract_edges(const PointCloud& pc, const EdgeParams& params);

/// Same contract evaluated from the full pairwise distance matrix with a
/// stable sort. Test oracle.
std::vector<std::uint8_t> extract_edges_bruteforce(const PointCloud& pc, const EdgeParams& params);

}  // namespace voxedge
