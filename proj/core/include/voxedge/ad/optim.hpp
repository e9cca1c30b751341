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

#include <cmath>
#include <cstdint>
#include <vector>

#include "voxedge/ad/tape.hpp"
#include "voxedge/errors.hpp"

namespace voxedge::ad {

struct AdamOptions {
  double lr = 0.0007;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moments per parameter, indexed like the store.
template <typename T>
struct AdamState {
  std::vector<NdArray<T>> m;
  std::vector<NdArray<T>> v;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update over every trainable parameter. All
/// gradients are validated before any value changes; a non-finite gradient
/// throws NumericError naming the parameter and leaves the store untouched.
template <typename T>
void adam_step(ParameterStore<T>& params, AdamState<T>& state, const AdamOptions& opt) {
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m.emplace_back(params[i].value.shape());
      state.v.emplace_back(params[i].value.shape());
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (!p.trainable) continue;
    if (state.m[i].shape() != p.value.shape()) {
      throw std::invalid_argument("adam_step: state shape mismatch for '" + p.name + "'");
    }
    for (auto g : p.grad.values()) {
      if (!std::isfinite(static_cast<double>(g))) {
        throw NumericError(p.name, "non-finite gradient");
      }
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    if (!p.trainable) continue;
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      const double mk = opt.beta1 * m[k] + (1.0 - opt.beta1) * g;
      const double vk = opt.beta2 * v[k] + (1.0 - opt.beta2) * g * g;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      const double update = opt.lr * (mk / c1) / (std::sqrt(vk / c2) + opt.eps);
      p.value[k] = static_cast<T>(p.value[k] - update);
    }
  }
}

}  // namespace voxedge::ad
