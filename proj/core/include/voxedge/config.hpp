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
#include <filesystem>
#include <string>

#include "voxedge/metrics.hpp"

namespace voxedge {

/// Network and training configuration. Field defaults are the desk-scale
/// setup (R = 16, channel scale 1/4, 512 points in and out);
/// paper_scale() gives the full-width 32^3 variant.
struct ModelConfig {
  int resolution = 16;
  double channel_scale = 0.25;
  std::size_t n_in = 512;
  std::size_t m_out = 512;
  std::size_t m_edge = 128;
  std::string profile = "completion3d";
  LossWeights weights = LossWeights::completion3d();
  double lr = 0.0007;
  std::uint64_t seed = 1;
  std::size_t batch = 8;
  std::size_t epochs = 200;
  bool use_edges = true;
  double bn_momentum = 0.9;
  /// Evaluate batch norm with running averages (true) or with the
  /// statistics of the current input (false).
  bool bn_running_stats = true;

  static ModelConfig paper_scale();

  /// Number of pyramid levels and refinement cells: log2(resolution).
  int levels() const;
  /// max(4, ceil(channel_scale * base)).
  int channels(int base) const;
  /// Throws ConfigError on an invalid combination.
  void validate() const;
};

/// Parses UTF-8 "key = value" lines ('#' starts a comment). Recognized keys:
/// resolution, channel_scale, n_in, m_out, m_edge, lambda1..lambda5, lr,
/// seed, profile, batch, epochs, use_edges, bn_momentum, bn_running_stats.
/// A profile line resets lambda1..5 to that profile; explicit lambda lines
/// override it regardless of order.
ModelConfig parse_config(const std::string& text);
ModelConfig load_config(const std::filesystem::path& path);
std::string format_config(const ModelConfig& cfg);

}  // namespace voxedge
