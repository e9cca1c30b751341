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

#include "voxedge/ad/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace voxedge::ad {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

double central_difference(const std::function<double()>& f, double& x, double eps) {
  const double saved = x;
  x = saved + eps;
  const double up = f();
  x = saved - eps;
  const double down = f();
  x = saved;
  return (up - down) / (2.0 * eps);
}

GradCheckResult grad_check(const TapeFn& fn, const std::vector<NdArray<double>>& inputs,
                           double eps) {
  std::vector<NdArray<double>> work = inputs;

  auto evaluate = [&](bool want_grads, std::vector<NdArray<double>>* grads) {
    Tape<double> tape;
    std::vector<Var> vars;
    vars.reserve(work.size());
    for (const auto& a : work) vars.push_back(tape.input(a));
    const Var out = fn(tape, vars);
    if (tape.value(out).size() != 1) {
      throw std::invalid_argument("grad_check: function output must be a scalar, got shape " +
                                  shape_string(tape.value(out).shape()));
    }
    if (want_grads) {
      tape.backward(out);
      grads->clear();
      for (auto v : vars) {
        grads->push_back(tape.has_grad(v) ? tape.grad(v) : NdArray<double>(tape.shape(v)));
      }
    }
    return tape.value(out).item();
  };

  std::vector<NdArray<double>> analytic;
  evaluate(true, &analytic);

  GradCheckResult r;
  for (std::size_t k = 0; k < work.size(); ++k) {
    for (std::size_t i = 0; i < work[k].size(); ++i) {
      const double fd =
          central_difference([&] { return evaluate(false, nullptr); }, work[k][i], eps);
      const double err = relative_error(analytic[k][i], fd);
      ++r.coordinates;
      if (err > r.max_rel_error || r.coordinates == 1) {
        r.max_rel_error = err;
        r.worst_input = k;
        r.worst_index = i;
        r.analytic = analytic[k][i];
        r.numeric = fd;
      }
    }
  }
  return r;
}

}  // namespace voxedge::ad
