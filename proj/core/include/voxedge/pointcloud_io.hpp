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

#include "voxedge/geometry.hpp"

namespace voxedge {

enum class PlyEncoding { kAscii, kBinaryLittleEndian };

/// Reads XYZ-ASCII (one "x y z" per line, blank lines ignored) or the PLY
/// subset: format ascii / binary_little_endian 1.0 with a single element
/// "vertex" carrying float properties x, y, z. The format is chosen from the
/// "ply" magic line, not the file extension.
PointCloud load_pointcloud(const std::filesystem::path& path);

PointCloud parse_xyz(const std::string& text);
PointCloud parse_ply(const std::string& bytes);

/// Binary little-endian PLY is the default so saved payloads are
/// byte-reproducible.
void save_ply(const std::filesystem::path& path, const PointCloud& pc,
              PlyEncoding encoding = PlyEncoding::kBinaryLittleEndian);
std::string encode_ply(const PointCloud& pc, PlyEncoding encoding);

void save_xyz(const std::filesystem::path& path, const PointCloud& pc);

/// Writes a cloud, choosing the format from the extension (.ply or anything
/// else as XYZ).
void save_pointcloud(const std::filesystem::path& path, const PointCloud& pc);

/// One 0/1 per line aligned with input order.
void save_mask(const std::filesystem::path& path, const std::vector<std::uint8_t>& mask);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace voxedge
