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

#include "voxedge/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "voxedge/errors.hpp"

namespace voxedge {

LossWeights LossWeights::profile(const std::string& name) {
  if (name == "completion3d" || name == "default") return completion3d();
  if (name == "pcn") return pcn();
  throw ConfigError("unknown loss profile '" + name + "' (expected completion3d or pcn)");
}

NearestResult nearest_neighbors(const PointCloud& from, const PointCloud& to) {
  if (to.empty()) throw std::invalid_argument("nearest_neighbors: empty target cloud");
  const KnnIndex index(to);
  NearestResult r;
  r.index.resize(from.size());
  r.squared_distance.resize(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) {
    const auto [j, d2] = index.nearest(from[i]);
    r.index[i] = static_cast<std::uint32_t>(j);
    r.squared_distance[i] = d2;
  }
  return r;
}

namespace {

void require_nonempty(const PointCloud& p, const PointCloud& q, const char* what) {
  if (p.empty() || q.empty()) throw std::invalid_argument(std::string(what) + ": empty cloud");
}

double sharp_term(const std::vector<double>& d2) {
  double s = 0.0;
  for (double v : d2) {
    const double d = std::sqrt(v);
    s += d * d * d * d * d;
  }
  return std::pow(s, 0.2) / static_cast<double>(d2.size());
}

}  // namespace

double chamfer(const PointCloud& p, const PointCloud& q) {
  require_nonempty(p, q, "chamfer");
  const auto pq = nearest_neighbors(p, q);
  const auto qp = nearest_neighbors(q, p);
  double a = 0.0;
  for (double v : pq.squared_distance) a += v;
  double b = 0.0;
  for (double v : qp.squared_distance) b += v;
  return a / static_cast<double>(p.size()) + b / static_cast<double>(q.size());
}

double chamfer_sharp(const PointCloud& p, const PointCloud& q) {
  require_nonempty(p, q, "chamfer_sharp");
  return sharp_term(nearest_neighbors(p, q).squared_distance) +
         sharp_term(nearest_neighbors(q, p).squared_distance);
}

double bce_grid(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size() || pred.empty()) {
    throw std::invalid_argument("bce_grid: shape mismatch");
  }
  double s = 0.0;
  for (std::size_t c = 0; c < pred.size(); ++c) {
    const double p = std::clamp(pred[c], kBceEpsilon, 1.0 - kBceEpsilon);
    s += gt[c] * std::log(p) + (1.0 - gt[c]) * std::log(1.0 - p);
  }
  return -s / static_cast<double>(pred.size());
}

double density_mse(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size() || pred.empty()) {
    throw std::invalid_argument("density_mse: shape mismatch");
  }
  double s = 0.0;
  for (std::size_t c = 0; c < pred.size(); ++c) {
    const double d = pred[c] - gt[c];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

double locality_loss(const PointCloud& points, std::span<const std::uint32_t> cell_assignment,
                     const GridSpec& spec) {
  if (cell_assignment.size() != points.size()) {
    throw std::invalid_argument("locality_loss: every point needs a generating cell");
  }
  const double r = spec.resolution;
  const double limit = std::sqrt(3.0);
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (cell_assignment[i] >= spec.cells()) {
      throw std::invalid_argument("locality_loss: unknown cell assignment for point " +
                                  std::to_string(i));
    }
    const double d = distance(points[i], spec.cell_center(cell_assignment[i])) * r;
    s += std::max(d - limit, 0.0);
  }
  return s;
}

double total_loss(const LossParts& p, const LossWeights& w) {
  const std::pair<const char*, double> named[] = {
      {"cd", p.cd},     {"cd_edge", p.cd_edge}, {"cd_sharp", p.cd_sharp},
      {"bce_p", p.bce_p}, {"bce_e", p.bce_e},   {"ld", p.ld},
      {"ld_e", p.ld_e}, {"lo", p.lo},           {"lo_e", p.lo_e}};
  for (const auto& [name, v] : named) {
    if (!std::isfinite(v)) throw NumericError(name, "non-finite loss term");
  }
  return w.cd * (p.cd + p.cd_edge) + w.cd_sharp * p.cd_sharp + w.bce * (p.bce_p + p.bce_e) +
         w.density * (p.ld + p.ld_e) + w.locality * (p.lo + p.lo_e);
}

double fidelity(const PointCloud& input, const PointCloud& output) {
  require_nonempty(input, output, "fidelity");
  const auto nn = nearest_neighbors(input, output);
  double s = 0.0;
  for (double v : nn.squared_distance) s += std::sqrt(v);
  return s / static_cast<double>(input.size());
}

GaussianStats GaussianStats::fit(std::span<const double> rows, std::size_t dim) {
  if (dim == 0 || rows.size() % dim != 0 || rows.size() / dim < 2) {
    throw std::invalid_argument("GaussianStats::fit: need at least two feature rows");
  }
  const std::size_t n = rows.size() / dim;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
      rows.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  const Eigen::RowVectorXd mu = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mu;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  GaussianStats g;
  g.mean.assign(mu.data(), mu.data() + dim);
  g.covariance.resize(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) g.covariance[i * dim + j] = cov(i, j);
  }
  return g;
}

namespace {

constexpr double kPsdTolerance = 1e-10;

Eigen::MatrixXd checked_covariance(const GaussianStats& g, const char* which) {
  const auto d = static_cast<Eigen::Index>(g.dim());
  if (g.covariance.size() != g.dim() * g.dim()) {
    throw std::invalid_argument(std::string("fpd: covariance of ") + which + " is not d x d");
  }
  Eigen::MatrixXd s(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) s(i, j) = g.covariance[i * d + j];
  }
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > kPsdTolerance) {
    throw std::invalid_argument(std::string("fpd: covariance of ") + which + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.eigenvalues().minCoeff() < -kPsdTolerance) {
    throw std::invalid_argument(std::string("fpd: covariance of ") + which +
                                " is not positive semi-definite");
  }
  return s;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double fpd(const GaussianStats& x, const GaussianStats& y) {
  if (x.dim() == 0 || x.dim() != y.dim()) throw std::invalid_argument("fpd: dimension mismatch");
  const Eigen::MatrixXd sx = checked_covariance(x, "X");
  const Eigen::MatrixXd sy = checked_covariance(y, "Y");
  double mean_term = 0.0;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    const double d = x.mean[i] - y.mean[i];
    mean_term += d * d;
  }
  const Eigen::MatrixXd rx = psd_sqrt(sx);
  Eigen::MatrixXd inner = rx * sy * rx;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner, Eigen::EigenvaluesOnly);
  const double root_trace = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return mean_term + sx.trace() + sy.trace() - 2.0 * root_trace;
}

RegistrationErrors registration_errors(const Quaternion& q1, const Quaternion& q2,
                                       const Point3& t1, const Point3& t2) {
  auto norm = [](const Quaternion& q) {
    return std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  };
  if (std::abs(norm(q1) - 1.0) > 1e-6 || std::abs(norm(q2) - 1.0) > 1e-6) {
    throw std::invalid_argument("registration_errors: quaternions must be unit-norm");
  }
  const double dot = q1[0] * q2[0] + q1[1] * q2[1] + q1[2] * q2[2] + q1[3] * q2[3];
  RegistrationErrors e;
  e.rotation = 2.0 * std::acos(std::clamp(2.0 * dot * dot - 1.0, -1.0, 1.0));
  e.translation = distance(t1, t2);
  return e;
}

}  // namespace voxedge
