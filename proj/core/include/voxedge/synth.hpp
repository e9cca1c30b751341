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
#include <vector>

#include "voxedge/edges.hpp"
#include "voxedge/geometry.hpp"

namespace voxedge {

enum class ShapeKind { Box, Cylinder, Lamp, Table, Cross };

inline constexpr ShapeKind kAllShapeKinds[] = {ShapeKind::Box, ShapeKind::Cylinder, ShapeKind::Lamp,
                                               ShapeKind::Table, ShapeKind::Cross};

const char* to_string(ShapeKind kind);
ShapeKind parse_shape_kind(const std::string& name);

// Size parameters, in order, when ShapeSpec::size is given explicitly:
//   box       sx sy sz
//   cylinder  radius height
//   lamp      base_radius pole_radius pole_height shade_bottom shade_top shade_height
//   table     width depth top_thickness leg_height leg_radius
//   cross     length width thickness
// An empty size selects the family defaults.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::Box;
  std::size_t n = 2048;
  std::uint64_t seed = 0;
  std::vector<double> size;
};

std::vector<double> default_size(ShapeKind kind);

/// Family defaults scaled per parameter by a seed-derived factor in [0.8, 1.25).
ShapeSpec varied_spec(ShapeKind kind, std::size_t n, std::uint64_t seed);

struct SynthShape {
  PointCloud cloud;
  std::vector<std::uint8_t> part;        // per point, index into part_names
  std::vector<std::string> part_names;
};

/// Area-weighted uniform surface sample, normalized to the unit cube.
SynthShape make_shape_labeled(const ShapeSpec& spec);
PointCloud make_shape(const ShapeSpec& spec);

/// k = min(100, n / 8), lambda = 5.
EdgeParams synth_edge_params(std::size_t n);

struct ManifestRow {
  std::size_t id = 0;
  ShapeKind kind = ShapeKind::Box;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double ratio = 0.0;
};

struct SynthPlan {
  int resolution = 16;
  double ratio = 0.25;
  std::vector<ShapeSpec> specs;
};

/// Line format, '#' starts a comment:
///   resolution = 16
///   ratio = 0.25
///   shape = table 2048 7 [size...]
///   generate = 50 2048 100      (count, n, base seed; families round-robin)
SynthPlan parse_synth_plan(const std::string& text);
SynthPlan load_synth_plan(const std::filesystem::path& path);

/// Writes out_dir/sample_%04d/{complete,partial,edges}.ply and grids.bin
/// (occupancy, density, edge occupancy, edge density at the plan resolution)
/// plus manifest.csv. Partial clouds come from occlude_by_viewpoint with the
/// sample seed.
std::vector<ManifestRow> make_dataset(const SynthPlan& plan, const std::filesystem::path& out_dir);

std::string format_manifest(const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> parse_manifest(const std::string& text);
std::vector<ManifestRow> load_manifest(const std::filesystem::path& dir);
std::filesystem::path sample_dir(const std::filesystem::path& dir, std::size_t id);

}  // namespace voxedge
