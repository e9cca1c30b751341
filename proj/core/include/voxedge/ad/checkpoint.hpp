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
#include <filesystem>
#include <string>
#include <vector>

#include "voxedge/ad/tape.hpp"

namespace voxedge::ad {

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<float> data;
};

/// Checkpoint layout: magic "VEPT\0", u32 count, then per parameter
/// u16 name length, UTF-8 name, u8 rank, rank x u32 extents, float32 data.
/// All integers little-endian.
std::string encode_parameters(const std::vector<NamedArray>& arrays);
std::vector<NamedArray> decode_parameters(const std::string& bytes);

template <typename T>
std::vector<NamedArray> snapshot(const ParameterStore<T>& store) {
  std::vector<NamedArray> out;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& p = store[i];
    out.push_back({p.name, p.value.shape(),
                   std::vector<float>(p.value.values().begin(), p.value.values().end())});
  }
  return out;
}

/// Copies arrays into the store by name. Every store parameter must be
/// present with an identical shape and no extra names are allowed; the
/// error names the first offending parameter.
template <typename T>
void restore(ParameterStore<T>& store, const std::vector<NamedArray>& arrays) {
  if (arrays.size() != store.size()) {
    throw std::runtime_error("checkpoint holds " + std::to_string(arrays.size()) +
                             " parameters, model expects " + std::to_string(store.size()));
  }
  for (const auto& a : arrays) {
    auto* p = store.find(a.name);
    if (p == nullptr) throw std::runtime_error("checkpoint parameter '" + a.name + "' unknown to model");
    if (p->value.shape() != a.shape) {
      throw std::runtime_error("parameter '" + a.name + "': checkpoint shape " +
                               shape_string(a.shape) + " vs model shape " +
                               shape_string(p->value.shape()));
    }
  }
  for (const auto& a : arrays) {
    auto& p = store.at(a.name);
    for (std::size_t k = 0; k < a.data.size(); ++k) p.value[k] = static_cast<T>(a.data[k]);
  }
}

void save_parameters(const std::filesystem::path& path, const std::vector<NamedArray>& arrays);
std::vector<NamedArray> load_parameters(const std::filesystem::path& path);

}  // namespace voxedge::ad
