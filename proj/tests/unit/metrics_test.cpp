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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "test_support.hpp"
#include "voxedge/errors.hpp"
#include "voxedge/metrics.hpp"

namespace voxedge {
namespace {

using testing::random_cloud;

std::vector<double> nn_oracle(const PointCloud& from, const PointCloud& to) {
  std::vector<double> out;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) best = std::min(best, squared_distance(p, q));
    out.push_back(best);
  }
  return out;
}

double chamfer_oracle(const PointCloud& p, const PointCloud& q) {
  double a = 0, b = 0;
  for (double v : nn_oracle(p, q)) a += v;
  for (double v : nn_oracle(q, p)) b += v;
  return a / p.size() + b / q.size();
}

double sharp_oracle(const PointCloud& p, const PointCloud& q) {
  auto side = [](const std::vector<double>& d2) {
    double s = 0;
    for (double v : d2) s += std::pow(std::sqrt(v), 5);
    return std::pow(s, 0.2) / d2.size();
  };
  return side(nn_oracle(p, q)) + side(nn_oracle(q, p));
}

TEST(Chamfer, ClosedFormsAndOracle) {
  EXPECT_DOUBLE_EQ(chamfer(PointCloud({{0, 0, 0}}), PointCloud({{1, 0, 0}})), 2.0);
  EXPECT_DOUBLE_EQ(chamfer_sharp(PointCloud({{0, 0, 0}}), PointCloud({{1, 0, 0}})), 2.0);
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto p = random_cloud(s, 50);
    const auto q = random_cloud(s + 100, 73);
    EXPECT_NEAR(chamfer(p, q), chamfer_oracle(p, q), 1e-12);
    EXPECT_NEAR(chamfer_sharp(p, q), sharp_oracle(p, q), 1e-12);
    EXPECT_DOUBLE_EQ(chamfer(p, p), 0.0);
    EXPECT_NEAR(chamfer(p, q), chamfer(q, p), 1e-15);
  }
  EXPECT_THROW(chamfer(PointCloud{}, random_cloud(1, 3)), std::invalid_argument);
}

TEST(Chamfer, ScalesQuadraticallyAndIgnoresOrder) {
  const auto p = random_cloud(7, 40);
  const auto q = random_cloud(8, 40);
  PointCloud p2, q2, rp;
  rp.points.assign(p.points.rbegin(), p.points.rend());
  for (const auto& x : p) p2.points.push_back({3 * x[0], 3 * x[1], 3 * x[2]});
  for (const auto& x : q) q2.points.push_back({3 * x[0], 3 * x[1], 3 * x[2]});
  EXPECT_NEAR(chamfer(p2, q2), 9 * chamfer(p, q), 1e-12);
  EXPECT_NEAR(fidelity(p2, q2), 3 * fidelity(p, q), 1e-12);
  EXPECT_NEAR(chamfer(rp, q), chamfer(p, q), 1e-15);
  EXPECT_NEAR(chamfer_sharp(rp, q), chamfer_sharp(p, q), 1e-15);
}

TEST(ChamferSharp, OutlierDominates) {
  auto p = random_cloud(3, 400, 0.0, 0.01);
  const auto q = random_cloud(4, 400, 0.0, 0.01);
  p.points[0] = {1, 0, 0};
  const double one = chamfer_sharp(p, q);
  p.points[0] = {10, 0, 0};
  const double ten = chamfer_sharp(p, q);
  // The p -> q side is close to the outlier distance over N.
  EXPECT_NEAR((ten - one) * 400, 9.0, 0.1);
}

TEST(Bce, ClosedForms) {
  const std::vector<double> half(27, 0.5), gt(27, 1.0), zeros(27, 0.0);
  EXPECT_NEAR(bce_grid(half, gt), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_grid(gt, gt), -std::log(1 - kBceEpsilon), 1e-12);
  EXPECT_NEAR(bce_grid(zeros, gt), -std::log(kBceEpsilon), 1e-9);
  EXPECT_THROW(bce_grid(half, std::vector<double>(8)), std::invalid_argument);
}

TEST(DensityMse, ClosedForms) {
  std::vector<double> a(64), b(64);
  Rng rng(1);
  double oracle = 0;
  for (std::size_t i = 0; i < 64; ++i) {
    a[i] = rng.uniform();
    b[i] = rng.uniform();
    oracle += (a[i] - b[i]) * (a[i] - b[i]);
  }
  EXPECT_NEAR(density_mse(a, b), oracle / 64, 1e-15);
  EXPECT_EQ(density_mse(a, a), 0.0);
  auto c = a;
  for (auto& v : c) v += 1;
  EXPECT_NEAR(density_mse(c, a), 1.0, 1e-12);
}

TEST(Locality, HingeInCellWidths) {
  const GridSpec spec(8);
  const std::uint32_t cell = static_cast<std::uint32_t>(spec.flat(3, 3, 3));
  const Point3 c = spec.cell_center(cell);
  EXPECT_EQ(locality_loss(PointCloud({c}), std::vector<std::uint32_t>{cell}, spec), 0.0);
  const double far = 2 * std::sqrt(3.0) / 8;
  EXPECT_NEAR(locality_loss(PointCloud({{c[0] + far, c[1], c[2]}}), std::vector<std::uint32_t>{cell}, spec),
              std::sqrt(3.0), 1e-12);
  Rng rng(2);
  PointCloud inside;
  std::vector<std::uint32_t> cells;
  for (int i = 0; i < 50; ++i) {
    inside.points.push_back({c[0] + rng.uniform(-1, 1) / 8, c[1] + rng.uniform(-1, 1) / 8, c[2] + rng.uniform(-1, 1) / 8});
    cells.push_back(cell);
  }
  EXPECT_EQ(locality_loss(inside, cells, spec), 0.0);
  EXPECT_THROW(locality_loss(inside, std::vector<std::uint32_t>{cell}, spec), std::invalid_argument);
}

TEST(TotalLoss, DefaultWeightsAndLinearity) {
  const LossParts ones{1, 1, 1, 1, 1, 1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(total_loss(ones, LossWeights{}), 1e4 * 2 + 300 + 100 * 2 + 1e10 * 2 + 0.3 * 2);
  EXPECT_EQ(total_loss(LossParts{}, LossWeights{}), 0.0);
  const LossWeights pcn = LossWeights::pcn();
  LossParts only_sharp{};
  only_sharp.cd_sharp = 5;
  only_sharp.lo = 7;
  EXPECT_EQ(total_loss(only_sharp, pcn), 0.0);

  const LossWeights w{2, 3, 5, 7, 11};
  double LossParts::*fields[] = {&LossParts::cd, &LossParts::cd_edge, &LossParts::cd_sharp,
                                 &LossParts::bce_p, &LossParts::bce_e, &LossParts::ld,
                                 &LossParts::ld_e, &LossParts::lo, &LossParts::lo_e};
  const double coeff[] = {2, 2, 3, 5, 5, 7, 7, 11, 11};
  for (std::size_t i = 0; i < 9; ++i) {
    LossParts a{}, b{};
    a.*fields[i] = 1.5;
    b.*fields[i] = 4.0;
    EXPECT_DOUBLE_EQ(total_loss(b, w) - total_loss(a, w), coeff[i] * 2.5);
  }
}

TEST(TotalLoss, NanNamesTerm) {
  LossParts p{};
  p.ld_e = std::nan("");
  try {
    total_loss(p, LossWeights{});
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_EQ(e.term(), "ld_e");
  }
}

TEST(Fidelity, ClosedForms) {
  EXPECT_DOUBLE_EQ(fidelity(PointCloud({{0, 0, 0}}), PointCloud({{3, 4, 0}})), 5.0);
  const auto p = random_cloud(1, 30);
  auto sup = p;
  sup.points.push_back({9, 9, 9});
  EXPECT_EQ(fidelity(p, sup), 0.0);
}

GaussianStats gaussian(std::vector<double> mean, std::vector<double> cov) {
  GaussianStats g;
  g.mean = std::move(mean);
  g.covariance = std::move(cov);
  return g;
}

TEST(Fpd, ScalarAndDiagonalClosedForms) {
  EXPECT_NEAR(fpd(gaussian({1.0}, {4.0}), gaussian({-2.0}, {9.0})), 9.0 + 1.0, 1e-8);
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> m1(4), m2(4), c1(16, 0.0), c2(16, 0.0);
    double oracle = 0;
    for (std::size_t d = 0; d < 4; ++d) {
      m1[d] = rng.uniform(-1, 1);
      m2[d] = rng.uniform(-1, 1);
      const double a = rng.uniform(0.1, 3), b = rng.uniform(0.1, 3);
      c1[d * 5] = a;
      c2[d * 5] = b;
      oracle += (m1[d] - m2[d]) * (m1[d] - m2[d]) + (std::sqrt(a) - std::sqrt(b)) * (std::sqrt(a) - std::sqrt(b));
    }
    EXPECT_NEAR(fpd(gaussian(m1, c1), gaussian(m2, c2)), oracle, 1e-8);
  }
}

TEST(Fpd, SymmetricAndZeroOnSelf) {
  Rng rng(6);
  std::vector<double> rows(200 * 3), rows2(200 * 3);
  for (auto& v : rows) v = rng.uniform();
  for (auto& v : rows2) v = rng.uniform(-1, 2);
  const auto x = GaussianStats::fit(rows, 3);
  const auto y = GaussianStats::fit(rows2, 3);
  EXPECT_NEAR(fpd(x, x), 0.0, 1e-8);
  EXPECT_NEAR(fpd(x, y), fpd(y, x), 1e-8);
  EXPECT_GT(fpd(x, y), 0.0);
  EXPECT_THROW(fpd(x, gaussian({0, 0, 0}, {-1, 0, 0, 0, 1, 0, 0, 0, 1})), std::invalid_argument);
}

TEST(Registration, FormulaAsWritten) {
  const Quaternion id{1, 0, 0, 0};
  const double h = std::sqrt(0.5);
  const Quaternion z90{h, 0, 0, h};
  EXPECT_NEAR(registration_errors(id, z90, {0, 0, 0}, {0, 0, 0}).rotation, std::numbers::pi, 1e-15);
  const auto same = registration_errors(z90, z90, {1, 2, 3}, {1, 2, 3});
  EXPECT_EQ(same.rotation, 0.0);
  EXPECT_EQ(same.translation, 0.0);
  EXPECT_EQ(registration_errors(z90, {-h, 0, 0, -h}, {0, 0, 0}, {0, 3, 4}).rotation, 0.0);
  EXPECT_DOUBLE_EQ(registration_errors(id, id, {0, 0, 0}, {0, 3, 4}).translation, 5.0);
  EXPECT_THROW(registration_errors({1, 1, 0, 0}, id, {}, {}), std::invalid_argument);
}

}  // namespace
}  // namespace voxedge
