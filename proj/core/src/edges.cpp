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

#include "voxedge/edges.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace voxedge {
namespace {

constexpr double kDuplicateTolerance = 1e-12;

std::uint8_t classify(const PointCloud& pc, std::size_t query,
                      const std::vector<std::size_t>& neighbors, double lambda) {
  Point3 centroid;
  double min_d2 = -1.0;
  for (auto j : neighbors) {
    centroid = centroid + pc[j];
    const double d2 = squared_distance(pc[j], pc[query]);
    if (min_d2 < 0.0 || d2 < min_d2) min_d2 = d2;
  }
  centroid = (1.0 / static_cast<double>(neighbors.size())) * centroid;
  const double disp = distance(centroid, pc[query]);
  const double v = std::sqrt(min_d2);
  if (v == 0.0) return disp > kDuplicateTolerance ? 1 : 0;
  return disp > lambda * v ? 1 : 0;
}

}  // namespace

void EdgeParams::validate() const {
  if (k < 2) throw std::invalid_argument("EdgeParams: k must be >= 2");
  if (!(lambda > 0.0)) throw std::invalid_argument("EdgeParams: lambda must be positive");
}

EdgeResult extract_edges(const PointCloud& pc, const EdgeParams& params) {
  params.validate();
  if (pc.size() <= params.k) {
    throw std::invalid_argument("extract_edges: need more than k=" + std::to_string(params.k) +
                                " points, got " + std::to_string(pc.size()));
  }
  const KnnIndex index(pc);
  EdgeResult out;
  out.mask.resize(pc.size());
  for (std::size_t i = 0; i < pc.size(); ++i) {
    // k + 1 candidates, then drop the query itself wherever it landed; it
    // need not be first when duplicates of it carry a lower index.
    auto nb = index.query(pc[i], params.k + 1);
    const auto self = std::find(nb.begin(), nb.end(), i);
    if (self != nb.end()) {
      nb.erase(self);
    } else {
      nb.pop_back();
    }
    out.mask[i] = classify(pc, i, nb, params.lambda);
    if (out.mask[i]) out.edges.points.push_back(pc[i]);
  }
  return out;
}

std::vector<std::uint8_t> extract_edges_bruteforce(const PointCloud& pc, const EdgeParams& params) {
  params.validate();
  const std::size_t n = pc.size();
  if (n <= params.k) {
    throw std::invalid_argument("extract_edges_bruteforce: need more than k points");
  }
  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = squared_distance(pc[i], pc[j]);
  }
  std::vector<std::uint8_t> mask(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist[i * n + a] < dist[i * n + b]; });
    order.resize(params.k);
    mask[i] = classify(pc, i, order, params.lambda);
  }
  return mask;
}

}  // namespace voxedge
