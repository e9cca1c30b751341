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
#include <string>
#include <vector>

#include "voxedge/ad/grad_check.hpp"

namespace voxedge::ad {

struct OpCheckReport {
  std::string op;
  std::vector<std::string> shapes;  // one per instance
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
};

/// Finite-difference checks of every primitive at double precision, each on
/// `instances` randomly drawn shapes. Outputs are folded to a scalar with a
/// random weighting so that no gradient is structurally uniform.
std::vector<OpCheckReport> check_all_ops(std::uint64_t seed, std::size_t instances = 3);

}  // namespace voxedge::ad
