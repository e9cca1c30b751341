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

#include "voxedge/ad/checkpoint.hpp"

#include <cstring>
#include <stdexcept>

#include "voxedge/errors.hpp"
#include "voxedge/pointcloud_io.hpp"

namespace voxedge::ad {
namespace {

constexpr char kMagic[5] = {'V', 'E', 'P', 'T', '\0'};

template <typename U>
void put(std::string& out, U v) {
  char buf[sizeof(U)];
  std::memcpy(buf, &v, sizeof(U));
  out.append(buf, sizeof(U));
}

class Reader {
 public:
  explicit Reader(const std::string& b) : bytes_(b) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    U v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw ParseError("truncated checkpoint", 0);
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_parameters(const std::vector<NamedArray>& arrays) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    if (a.name.size() > 0xFFFF) throw std::invalid_argument("parameter name too long");
    if (a.shape.size() > 0xFF) throw std::invalid_argument("parameter rank too large");
    put<std::uint16_t>(out, static_cast<std::uint16_t>(a.name.size()));
    out += a.name;
    put<std::uint8_t>(out, static_cast<std::uint8_t>(a.shape.size()));
    for (auto e : a.shape) put<std::uint32_t>(out, static_cast<std::uint32_t>(e));
    for (float v : a.data) put<float>(out, v);
  }
  return out;
}

std::vector<NamedArray> decode_parameters(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not a VEPT checkpoint", 0);
  }
  Reader r(bytes);
  r.str(sizeof(kMagic));
  const auto count = r.get<std::uint32_t>();
  std::vector<NamedArray> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name = r.str(r.get<std::uint16_t>());
    const auto rank = r.get<std::uint8_t>();
    for (std::uint8_t d = 0; d < rank; ++d) a.shape.push_back(r.get<std::uint32_t>());
    const std::size_t n = shape_size(a.shape);
    a.data.resize(n);
    for (std::size_t k = 0; k < n; ++k) a.data[k] = r.get<float>();
    out.push_back(std::move(a));
  }
  if (!r.done()) throw ParseError("trailing bytes after checkpoint payload", 0);
  return out;
}

void save_parameters(const std::filesystem::path& path, const std::vector<NamedArray>& arrays) {
  write_file(path, encode_parameters(arrays));
}

std::vector<NamedArray> load_parameters(const std::filesystem::path& path) {
  return decode_parameters(read_file(path));
}

}  // namespace voxedge::ad
