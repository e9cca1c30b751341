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

#include "voxedge/config.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "voxedge/errors.hpp"
#include "voxedge/pointcloud_io.hpp"

namespace voxedge {

ModelConfig ModelConfig::paper_scale() {
  ModelConfig c;
  c.resolution = 32;
  c.channel_scale = 1.0;
  c.n_in = 2048;
  c.m_out = 2048;
  c.m_edge = 512;
  c.batch = 32;
  return c;
}

int ModelConfig::levels() const {
  int l = 0;
  for (int r = resolution; r > 1; r >>= 1) ++l;
  return l;
}

int ModelConfig::channels(int base) const {
  return std::max(4, static_cast<int>(std::ceil(channel_scale * base - 1e-9)));
}

void ModelConfig::validate() const {
  if (resolution < 8 || (resolution & (resolution - 1)) != 0) {
    throw ConfigError("resolution must be a power of two >= 8, got " + std::to_string(resolution));
  }
  if (!(channel_scale > 0.0)) throw ConfigError("channel_scale must be positive");
  const std::size_t need = std::size_t{1} << (levels() - 1);
  if (n_in < need) {
    throw ConfigError("n_in=" + std::to_string(n_in) + " too small for " +
                      std::to_string(levels()) + " pyramid levels (need >= " +
                      std::to_string(need) + ")");
  }
  if (m_out == 0 || m_edge == 0) throw ConfigError("m_out and m_edge must be positive");
  if (batch == 0) throw ConfigError("batch must be positive");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(bn_momentum >= 0.0 && bn_momentum < 1.0)) throw ConfigError("bn_momentum must lie in [0, 1)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v, std::size_t line) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    throw ParseError("invalid real for '" + key + "': '" + v + "'", line);
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v, std::size_t line) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ParseError("invalid integer for '" + key + "': '" + v + "'", line);
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v, std::size_t line) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ParseError("invalid boolean for '" + key + "': '" + v + "'", line);
}

}  // namespace

ModelConfig parse_config(const std::string& text) {
  ModelConfig c;
  std::map<int, double> lambdas;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key == "resolution") {
      c.resolution = static_cast<int>(to_uint(key, val, line));
    } else if (key == "channel_scale") {
      c.channel_scale = to_real(key, val, line);
    } else if (key == "n_in") {
      c.n_in = to_uint(key, val, line);
    } else if (key == "m_out") {
      c.m_out = to_uint(key, val, line);
    } else if (key == "m_edge") {
      c.m_edge = to_uint(key, val, line);
    } else if (key.size() == 7 && key.rfind("lambda", 0) == 0 && key[6] >= '1' && key[6] <= '5') {
      lambdas[key[6] - '0'] = to_real(key, val, line);
    } else if (key == "lr") {
      c.lr = to_real(key, val, line);
    } else if (key == "seed") {
      c.seed = to_uint(key, val, line);
    } else if (key == "profile") {
      c.profile = val;
      c.weights = LossWeights::profile(val);
    } else if (key == "batch") {
      c.batch = to_uint(key, val, line);
    } else if (key == "epochs") {
      c.epochs = to_uint(key, val, line);
    } else if (key == "use_edges") {
      c.use_edges = to_bool(key, val, line);
    } else if (key == "bn_momentum") {
      c.bn_momentum = to_real(key, val, line);
    } else if (key == "bn_running_stats") {
      c.bn_running_stats = to_bool(key, val, line);
    } else {
      throw ParseError("unknown key '" + key + "'", line);
    }
  }
  for (const auto& [i, v] : lambdas) {
    double* slots[] = {&c.weights.cd, &c.weights.cd_sharp, &c.weights.bce, &c.weights.density,
                       &c.weights.locality};
    *slots[i - 1] = v;
  }
  c.validate();
  return c;
}

ModelConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

std::string format_config(const ModelConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "resolution = " << c.resolution << "\n"
    << "channel_scale = " << c.channel_scale << "\n"
    << "n_in = " << c.n_in << "\n"
    << "m_out = " << c.m_out << "\n"
    << "m_edge = " << c.m_edge << "\n"
    << "profile = " << c.profile << "\n"
    << "lambda1 = " << c.weights.cd << "\n"
    << "lambda2 = " << c.weights.cd_sharp << "\n"
    << "lambda3 = " << c.weights.bce << "\n"
    << "lambda4 = " << c.weights.density << "\n"
    << "lambda5 = " << c.weights.locality << "\n"
    << "lr = " << c.lr << "\n"
    << "seed = " << c.seed << "\n"
    << "batch = " << c.batch << "\n"
    << "epochs = " << c.epochs << "\n"
    << "use_edges = " << (c.use_edges ? "true" : "false") << "\n"
    << "bn_momentum = " << c.bn_momentum << "\n"
    << "bn_running_stats = " << (c.bn_running_stats ? "true" : "false") << "\n";
  return o.str();
}

}  // namespace voxedge
