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
#include <functional>
#include <span>
#include <vector>

#include "voxedge/ad/tape.hpp"

namespace voxedge::ad {

/// Builds a scalar-valued graph from leaf inputs.
using TapeFn = std::function<Var(Tape<double>&, std::span<const Var>)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

/// |a - fd| / max(|a|, |fd|, 1e-8).
double relative_error(double analytic, double numeric);

/// Central difference (f(x + eps) - f(x - eps)) / 2 eps, restoring x.
double central_difference(const std::function<double()>& f, double& x, double eps);

/// Compares reverse-mode gradients of fn against central differences for
/// every input coordinate. Throws std::invalid_argument when fn does not
/// return a scalar.
GradCheckResult grad_check(const TapeFn& fn, const std::vector<NdArray<double>>& inputs,
                           double eps = 1e-5);

}  // namespace voxedge::ad
