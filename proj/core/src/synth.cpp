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

#include "voxedge/synth.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "voxedge/errors.hpp"
#include "voxedge/pointcloud_io.hpp"
#include "voxedge/rng.hpp"
#include "voxedge/voxelizer.hpp"

namespace voxedge {

namespace {

constexpr double kPi = std::numbers::pi;

// One analytic surface patch. sample() maps two uniforms to a point.
struct Patch {
  double area = 0.0;
  std::uint8_t part = 0;
  enum class Type { Rect, Disk, Frustum } type = Type::Rect;
  Point3 origin;  // rect corner, disk or frustum base center
  Point3 u, v;    // rect edges
  double r0 = 0, r1 = 0, h = 0;

  Point3 sample(double a, double b) const {
    switch (type) {
      case Type::Rect:
        return origin + a * u + b * v;
      case Type::Disk: {
        const double r = r0 * std::sqrt(a);
        return origin + Point3{r * std::cos(2 * kPi * b), r * std::sin(2 * kPi * b), 0.0};
      }
      case Type::Frustum: {
        // Inverse CDF of the radius-proportional height density.
        const double t = r1 == r0 ? a
                                  : (-r0 + std::sqrt(r0 * r0 + (r1 * r1 - r0 * r0) * a)) / (r1 - r0);
        const double r = r0 + (r1 - r0) * t;
        return origin + Point3{r * std::cos(2 * kPi * b), r * std::sin(2 * kPi * b), h * t};
      }
    }
    return origin;
  }
};

double norm(Point3 p) { return std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z); }

Patch rect(Point3 o, Point3 u, Point3 v, std::uint8_t part) {
  Patch p;
  p.type = Patch::Type::Rect;
  p.origin = o;
  p.u = u;
  p.v = v;
  const Point3 c{u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
  p.area = norm(c);
  p.part = part;
  return p;
}

Patch disk(Point3 center, double r, std::uint8_t part) {
  Patch p;
  p.type = Patch::Type::Disk;
  p.origin = center;
  p.r0 = r;
  p.area = kPi * r * r;
  p.part = part;
  return p;
}

Patch frustum(Point3 base, double r0, double r1, double h, std::uint8_t part) {
  Patch p;
  p.type = Patch::Type::Frustum;
  p.origin = base;
  p.r0 = r0;
  p.r1 = r1;
  p.h = h;
  p.area = kPi * (r0 + r1) * std::hypot(h, r1 - r0);
  p.part = part;
  return p;
}

// Six faces of the axis-aligned box [lo, lo + ext].
void box(std::vector<Patch>& out, Point3 lo, Point3 ext, std::uint8_t part) {
  const Point3 ex{ext.x, 0, 0}, ey{0, ext.y, 0}, ez{0, 0, ext.z};
  out.push_back(rect(lo, ex, ey, part));
  out.push_back(rect(lo + ez, ex, ey, part));
  out.push_back(rect(lo, ex, ez, part));
  out.push_back(rect(lo + ey, ex, ez, part));
  out.push_back(rect(lo, ey, ez, part));
  out.push_back(rect(lo + ex, ey, ez, part));
}

std::size_t param_count(ShapeKind k) {
  switch (k) {
    case ShapeKind::Box: return 3;
    case ShapeKind::Cylinder: return 2;
    case ShapeKind::Lamp: return 6;
    case ShapeKind::Table: return 5;
    case ShapeKind::Cross: return 3;
  }
  return 0;
}

struct Layout {
  std::vector<Patch> patches;
  std::vector<std::string> parts;
};

Layout layout(ShapeKind kind, const std::vector<double>& s) {
  Layout l;
  auto& p = l.patches;
  switch (kind) {
    case ShapeKind::Box:
      l.parts = {"face"};
      box(p, {0, 0, 0}, {s[0], s[1], s[2]}, 0);
      break;
    case ShapeKind::Cylinder:
      l.parts = {"side", "cap"};
      p.push_back(frustum({0, 0, 0}, s[0], s[0], s[1], 0));
      p.push_back(disk({0, 0, 0}, s[0], 1));
      p.push_back(disk({0, 0, s[1]}, s[0], 1));
      break;
    case ShapeKind::Lamp: {
      const double base_r = s[0], pole_r = s[1], pole_h = s[2];
      const double shade_lo = s[3], shade_hi = s[4], shade_h = s[5];
      l.parts = {"base", "pole", "shade"};
      p.push_back(disk({0, 0, 0}, base_r, 0));
      p.push_back(frustum({0, 0, 0}, pole_r, pole_r, pole_h, 1));
      p.push_back(frustum({0, 0, pole_h - 0.5 * shade_h}, shade_lo, shade_hi, shade_h, 2));
      break;
    }
    case ShapeKind::Table: {
      const double w = s[0], d = s[1], top = s[2], leg_h = s[3], leg_r = s[4];
      l.parts = {"top", "leg"};
      box(p, {-0.5 * w, -0.5 * d, leg_h}, {w, d, top}, 0);
      const double inset = 2.0 * leg_r;
      for (int i = 0; i < 4; ++i) {
        const double x = (i & 1 ? 0.5 * w - inset : -0.5 * w + inset);
        const double y = (i & 2 ? 0.5 * d - inset : -0.5 * d + inset);
        p.push_back(frustum({x, y, 0}, leg_r, leg_r, leg_h, 1));
      }
      break;
    }
    case ShapeKind::Cross: {
      const double len = s[0], wid = s[1], th = s[2];
      l.parts = {"slab"};
      box(p, {-0.5 * len, -0.5 * th, 0}, {len, th, wid}, 0);
      box(p, {-0.5 * th, -0.5 * len, 0}, {th, len, wid}, 0);
      break;
    }
  }
  return l;
}

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename N>
N parse_number(const std::string& tok, const char* what, std::size_t line) {
  N out{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw ParseError(std::string("invalid ") + what + ": '" + tok + "'", line);
  }
  if constexpr (std::is_floating_point_v<N>) {
    if (!std::isfinite(out)) throw ParseError(std::string("non-finite ") + what, line);
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

const char* to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Box: return "box";
    case ShapeKind::Cylinder: return "cylinder";
    case ShapeKind::Lamp: return "lamp";
    case ShapeKind::Table: return "table";
    case ShapeKind::Cross: return "cross";
  }
  return "?";
}

ShapeKind parse_shape_kind(const std::string& name) {
  for (auto k : kAllShapeKinds) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown shape kind '" + name + "'");
}

std::vector<double> default_size(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Box: return {1.0, 1.0, 1.0};
    case ShapeKind::Cylinder: return {0.5, 1.2};
    case ShapeKind::Lamp: return {0.35, 0.025, 1.0, 0.45, 0.25, 0.35};
    case ShapeKind::Table: return {1.2, 0.8, 0.06, 0.8, 0.015};
    case ShapeKind::Cross: return {1.0, 0.3, 0.08};
  }
  return {};
}

ShapeSpec varied_spec(ShapeKind kind, std::size_t n, std::uint64_t seed) {
  ShapeSpec s{kind, n, seed, default_size(kind)};
  Rng rng(seed ^ 0x5851F42D4C957F2DULL);
  for (auto& v : s.size) v *= rng.uniform(0.8, 1.25);
  return s;
}

SynthShape make_shape_labeled(const ShapeSpec& spec) {
  if (spec.n < 64) throw std::invalid_argument("make_shape: n must be >= 64");
  const auto size = spec.size.empty() ? default_size(spec.kind) : spec.size;
  if (size.size() != param_count(spec.kind)) {
    throw std::invalid_argument(std::string("make_shape: ") + to_string(spec.kind) + " takes " +
                                std::to_string(param_count(spec.kind)) + " size parameters");
  }
  for (double v : size) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("make_shape: size parameters must be positive");
    }
  }
  const Layout l = layout(spec.kind, size);
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& p : l.patches) cumulative.push_back(total += p.area);

  Rng rng(spec.seed);
  SynthShape out;
  out.part_names = l.parts;
  out.cloud.points.reserve(spec.n);
  out.part.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double pick = rng.uniform() * total;
    std::size_t k = 0;
    while (k + 1 < cumulative.size() && pick >= cumulative[k]) ++k;
    const double a = rng.uniform();
    const double b = rng.uniform();
    out.cloud.points.push_back(l.patches[k].sample(a, b));
    out.part.push_back(l.patches[k].part);
  }
  out.cloud = normalize_to_unit_cube(out.cloud).first;
  return out;
}

PointCloud make_shape(const ShapeSpec& spec) { return make_shape_labeled(spec).cloud; }

EdgeParams synth_edge_params(std::size_t n) { return {std::min<std::size_t>(100, n / 8), 5.0}; }

SynthPlan parse_synth_plan(const std::string& text) {
  SynthPlan plan;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
    const std::string key = trim(s.substr(0, eq));
    const auto vals = split_ws(s.substr(eq + 1));
    if (vals.empty()) throw ParseError("missing value for '" + key + "'", line);
    if (key == "resolution") {
      plan.resolution = parse_number<int>(vals[0], "resolution", line);
      if (plan.resolution < 2 || (plan.resolution & (plan.resolution - 1)) != 0) {
        throw ParseError("resolution must be a power of two", line);
      }
    } else if (key == "ratio") {
      plan.ratio = parse_number<double>(vals[0], "ratio", line);
      if (!(plan.ratio > 0.0 && plan.ratio < 1.0)) throw ParseError("ratio must lie in (0, 1)", line);
    } else if (key == "shape") {
      if (vals.size() < 3) throw ParseError("shape needs: kind n seed [size...]", line);
      ShapeSpec spec;
      try {
        spec.kind = parse_shape_kind(vals[0]);
      } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), line);
      }
      spec.n = parse_number<std::size_t>(vals[1], "point count", line);
      spec.seed = parse_number<std::uint64_t>(vals[2], "seed", line);
      for (std::size_t i = 3; i < vals.size(); ++i) {
        spec.size.push_back(parse_number<double>(vals[i], "size", line));
      }
      if (spec.n < 64) throw ParseError("point count must be >= 64", line);
      if (!spec.size.empty() && spec.size.size() != param_count(spec.kind)) {
        throw ParseError(std::string(to_string(spec.kind)) + " takes " +
                             std::to_string(param_count(spec.kind)) + " size parameters",
                         line);
      }
      plan.specs.push_back(std::move(spec));
    } else if (key == "generate") {
      if (vals.size() != 3) throw ParseError("generate needs: count n base_seed", line);
      const auto count = parse_number<std::size_t>(vals[0], "count", line);
      const auto n = parse_number<std::size_t>(vals[1], "point count", line);
      const auto base = parse_number<std::uint64_t>(vals[2], "seed", line);
      if (n < 64) throw ParseError("point count must be >= 64", line);
      constexpr std::size_t kinds = std::size(kAllShapeKinds);
      for (std::size_t i = 0; i < count; ++i) {
        plan.specs.push_back(varied_spec(kAllShapeKinds[i % kinds], n, base + i));
      }
    } else {
      throw ParseError("unknown key '" + key + "'", line);
    }
  }
  if (plan.specs.empty()) throw ParseError("plan lists no shapes", 0);
  return plan;
}

SynthPlan load_synth_plan(const std::filesystem::path& path) {
  return parse_synth_plan(read_file(path));
}

std::filesystem::path sample_dir(const std::filesystem::path& dir, std::size_t id) {
  char name[32];
  std::snprintf(name, sizeof name, "sample_%04zu", id);
  return dir / name;
}

std::vector<ManifestRow> make_dataset(const SynthPlan& plan, const std::filesystem::path& out_dir) {
  const GridSpec spec(plan.resolution);
  std::filesystem::create_directories(out_dir);
  std::vector<ManifestRow> rows;
  for (std::size_t id = 0; id < plan.specs.size(); ++id) {
    const auto& s = plan.specs[id];
    const PointCloud complete = make_shape(s);
    const PointCloud partial = occlude_by_viewpoint(complete, OcclusionSpec{s.seed, plan.ratio});
    const PointCloud edges = extract_edges(complete, synth_edge_params(s.n)).edges;

    GridFeature grids(4, plan.resolution);
    const std::size_t cells = spec.cells();
    const auto g = density_target(complete, spec);
    std::copy(g.occupancy.begin(), g.occupancy.end(), grids.data.begin());
    std::copy(g.density.begin(), g.density.end(), grids.data.begin() + cells);
    if (!edges.empty()) {
      const auto ge = density_target(edges, spec);
      std::copy(ge.occupancy.begin(), ge.occupancy.end(), grids.data.begin() + 2 * cells);
      std::copy(ge.density.begin(), ge.density.end(), grids.data.begin() + 3 * cells);
    }

    const auto dir = sample_dir(out_dir, id);
    std::filesystem::create_directories(dir);
    save_ply(dir / "complete.ply", complete);
    save_ply(dir / "partial.ply", partial);
    save_ply(dir / "edges.ply", edges);
    save_grid(dir / "grids.bin", grids);
    rows.push_back({id, s.kind, s.seed, s.n, plan.ratio});
  }
  write_file(out_dir / "manifest.csv", format_manifest(rows));
  return rows;
}

std::string format_manifest(const std::vector<ManifestRow>& rows) {
  std::string out = "id,kind,seed,n,ratio\n";
  for (const auto& r : rows) {
    out += std::to_string(r.id) + "," + to_string(r.kind) + "," + std::to_string(r.seed) + "," +
           std::to_string(r.n) + "," + format_real(r.ratio) + "\n";
  }
  return out;
}

std::vector<ManifestRow> parse_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  std::vector<ManifestRow> rows;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (line == 1) {
      if (s != "id,kind,seed,n,ratio") throw ParseError("unexpected manifest header '" + s + "'", line);
      continue;
    }
    std::vector<std::string> f;
    std::istringstream fields(s);
    for (std::string tok; std::getline(fields, tok, ',');) f.push_back(tok);
    if (f.size() != 5) throw ParseError("expected 5 manifest fields", line);
    ManifestRow r;
    r.id = parse_number<std::size_t>(f[0], "id", line);
    try {
      r.kind = parse_shape_kind(f[1]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line);
    }
    r.seed = parse_number<std::uint64_t>(f[2], "seed", line);
    r.n = parse_number<std::size_t>(f[3], "n", line);
    r.ratio = parse_number<double>(f[4], "ratio", line);
    rows.push_back(r);
  }
  return rows;
}

std::vector<ManifestRow> load_manifest(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.csv";
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("no manifest.csv in " + dir.string());
  }
  return parse_manifest(read_file(path));
}

}  // namespace voxedge
