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

#include <cstdint>

#include "voxedge/geometry.hpp"
#include "voxedge/rng.hpp"

namespace voxedge::testing {

inline PointCloud random_cloud(std::uint64_t seed, std::size_t n, double lo = 0.0, double hi = 1.0) {
  Rng rng(seed);
  PointCloud pc;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(lo, hi);
    const double y = rng.uniform(lo, hi);
    const double z = rng.uniform(lo, hi);
    pc.points.push_back({x, y, z});
  }
  return pc;
}

}  // namespace voxedge::testing
