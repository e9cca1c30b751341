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

#include "voxedge/pointcloud_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "voxedge/errors.hpp"

namespace voxedge {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_real(std::string_view tok, T& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

Point3 parse_xyz_line(std::string_view line, std::size_t lineno) {
  const auto tok = split_ws(line);
  if (tok.size() != 3) {
    throw ParseError("expected 3 coordinates, found " + std::to_string(tok.size()), lineno);
  }
  Point3 p;
  for (std::size_t d = 0; d < 3; ++d) {
    if (!parse_real(tok[d], p[d])) {
      throw ParseError("invalid coordinate '" + std::string(tok[d]) + "'", lineno);
    }
  }
  return p;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

PointCloud parse_xyz(const std::string& text) {
  PointCloud pc;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    ++lineno;
    const auto line = trim(std::string_view(text).substr(pos, nl - pos));
    if (!line.empty()) pc.points.push_back(parse_xyz_line(line, lineno));
    pos = nl + 1;
  }
  return pc;
}

PointCloud parse_ply(const std::string& bytes) {
  std::size_t pos = 0;
  std::size_t lineno = 0;
  auto next_line = [&]() -> std::string_view {
    if (pos >= bytes.size()) throw ParseError("unexpected end of PLY header", lineno + 1);
    auto nl = bytes.find('\n', pos);
    if (nl == std::string::npos) nl = bytes.size();
    auto line = trim(std::string_view(bytes).substr(pos, nl - pos));
    pos = nl + 1;
    ++lineno;
    return line;
  };

  if (next_line() != "ply") throw ParseError("missing 'ply' magic", 1);
  PlyEncoding encoding = PlyEncoding::kAscii;
  bool have_format = false;
  std::size_t count = 0;
  bool in_vertex = false;
  bool have_vertex = false;
  std::vector<std::string> props;
  for (;;) {
    const auto line = next_line();
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() != 3 || tok[2] != "1.0") {
        throw UnsupportedFormatError("PLY line " + std::to_string(lineno) +
                                     ": unsupported format line");
      }
      if (tok[1] == "ascii") {
        encoding = PlyEncoding::kAscii;
      } else if (tok[1] == "binary_little_endian") {
        encoding = PlyEncoding::kBinaryLittleEndian;
      } else {
        throw UnsupportedFormatError("PLY line " + std::to_string(lineno) +
                                     ": unsupported encoding '" + std::string(tok[1]) + "'");
      }
      have_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw ParseError("malformed element line", lineno);
      if (tok[1] != "vertex" || have_vertex) {
        throw UnsupportedFormatError("PLY line " + std::to_string(lineno) +
                                     ": unsupported element '" + std::string(tok[1]) + "'");
      }
      double c = 0.0;
      if (!parse_real(tok[2], c) || c < 0 || c != std::floor(c)) {
        throw ParseError("invalid vertex count", lineno);
      }
      count = static_cast<std::size_t>(c);
      in_vertex = true;
      have_vertex = true;
    } else if (tok[0] == "property") {
      if (!in_vertex) throw ParseError("property before element", lineno);
      if (tok.size() != 3 || (tok[1] != "float" && tok[1] != "float32")) {
        throw UnsupportedFormatError("PLY line " + std::to_string(lineno) +
                                     ": unsupported property '" + std::string(line) + "'");
      }
      props.emplace_back(tok[2]);
    } else {
      throw ParseError("unknown header keyword '" + std::string(tok[0]) + "'", lineno);
    }
  }
  if (!have_format) throw ParseError("missing format line", lineno);
  if (props != std::vector<std::string>{"x", "y", "z"}) {
    throw UnsupportedFormatError("PLY vertex properties must be exactly float x, y, z");
  }

  PointCloud pc;
  pc.points.reserve(count);
  if (encoding == PlyEncoding::kBinaryLittleEndian) {
    const std::size_t need = count * 3 * sizeof(float);
    if (bytes.size() - pos < need) throw ParseError("truncated binary vertex data", 0);
    for (std::size_t i = 0; i < count; ++i) {
      float v[3];
      std::memcpy(v, bytes.data() + pos + i * sizeof(v), sizeof(v));
      if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2])) {
        throw ParseError("non-finite coordinate in vertex " + std::to_string(i), 0);
      }
      pc.points.push_back({v[0], v[1], v[2]});
    }
  } else {
    while (pc.size() < count) {
      const auto line = next_line();
      if (line.empty()) continue;
      // Properties are declared float, so both encodings load the same values.
      const auto tok = split_ws(line);
      if (tok.size() != 3) {
        throw ParseError("expected 3 coordinates, found " + std::to_string(tok.size()), lineno);
      }
      float v[3];
      for (std::size_t d = 0; d < 3; ++d) {
        if (!parse_real(tok[d], v[d])) {
          throw ParseError("invalid coordinate '" + std::string(tok[d]) + "'", lineno);
        }
      }
      pc.points.push_back({v[0], v[1], v[2]});
    }
  }
  return pc;
}

PointCloud load_pointcloud(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (bytes.rfind("ply", 0) == 0 && (bytes.size() == 3 || bytes[3] == '\n' || bytes[3] == '\r')) {
    return parse_ply(bytes);
  }
  return parse_xyz(bytes);
}

std::string encode_ply(const PointCloud& pc, PlyEncoding encoding) {
  std::string out = "ply\n";
  out += encoding == PlyEncoding::kAscii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(pc.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\nend_header\n";
  if (encoding == PlyEncoding::kBinaryLittleEndian) {
    const std::size_t base = out.size();
    out.resize(base + pc.size() * 3 * sizeof(float));
    for (std::size_t i = 0; i < pc.size(); ++i) {
      const float v[3] = {static_cast<float>(pc[i].x), static_cast<float>(pc[i].y),
                          static_cast<float>(pc[i].z)};
      std::memcpy(out.data() + base + i * sizeof(v), v, sizeof(v));
    }
  } else {
    char buf[64];
    for (const auto& p : pc) {
      for (std::size_t d = 0; d < 3; ++d) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), static_cast<float>(p[d]));
        out.append(buf, end);
        out += d == 2 ? '\n' : ' ';
      }
    }
  }
  return out;
}

void save_ply(const std::filesystem::path& path, const PointCloud& pc, PlyEncoding encoding) {
  write_file(path, encode_ply(pc, encoding));
}

void save_xyz(const std::filesystem::path& path, const PointCloud& pc) {
  std::string out;
  char buf[64];
  for (const auto& p : pc) {
    for (std::size_t d = 0; d < 3; ++d) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), p[d]);
      out.append(buf, end);
      out += d == 2 ? '\n' : ' ';
    }
  }
  write_file(path, out);
}

void save_pointcloud(const std::filesystem::path& path, const PointCloud& pc) {
  if (path.extension() == ".ply") {
    save_ply(path, pc);
  } else {
    save_xyz(path, pc);
  }
}

void save_mask(const std::filesystem::path& path, const std::vector<std::uint8_t>& mask) {
  std::string out;
  out.reserve(mask.size() * 2);
  for (auto m : mask) {
    out += m ? '1' : '0';
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace voxedge
