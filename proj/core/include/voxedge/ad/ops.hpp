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
#include <span>
#include <vector>

#include "voxedge/ad/tape.hpp"

// Differentiable primitives. Feature tensors are channels-first without a
// batch axis: [C, D, H, W] for grids and [C, N] for per-point features.
// Every function records one node on the tape and throws
// std::invalid_argument on shape mismatch.
namespace voxedge::ad {

template <typename T> Var add(Tape<T>& t, Var a, Var b);
template <typename T> Var sub(Tape<T>& t, Var a, Var b);
template <typename T> Var mul(Tape<T>& t, Var a, Var b);
template <typename T> Var scale(Tape<T>& t, Var a, T s);
template <typename T> Var add_scalar(Tape<T>& t, Var a, T s);

template <typename T> Var relu(Tape<T>& t, Var x);
template <typename T> Var sigmoid(Tape<T>& t, Var x);
template <typename T> Var tanh(Tape<T>& t, Var x);
template <typename T> Var softplus(Tape<T>& t, Var x);

template <typename T> Var reshape(Tape<T>& t, Var x, Shape shape);
template <typename T> Var reduce_sum(Tape<T>& t, Var x);
template <typename T> Var reduce_mean(Tape<T>& t, Var x);

/// Concatenation along axis 0; trailing extents must agree.
template <typename T> Var concat(Tape<T>& t, const std::vector<Var>& parts);
/// Rows [begin, end) along axis 0.
template <typename T> Var slice(Tape<T>& t, Var x, std::size_t begin, std::size_t end);

/// x [N, in] (or [in]), w [out, in], b [out] -> [N, out] (or [out]).
template <typename T> Var linear(Tape<T>& t, Var x, Var w, Var b);

/// 1x1 convolution over any trailing spatial shape: x [Ci, ...],
/// w [Co, Ci], b [Co] -> [Co, ...].
template <typename T> Var pointwise(Tape<T>& t, Var x, Var w, Var b);

struct ConvOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t dilation = 1;
};

/// Cross-correlation. x [Ci, D, H, W], w [Co, Ci, k, k, k], b [Co].
template <typename T> Var conv3d(Tape<T>& t, Var x, Var w, Var b, ConvOptions opt);

/// Transposed convolution (gradient of conv3d w.r.t. its input).
/// x [Ci, D, H, W], w [Ci, Co, k, k, k], b [Co]; output extent
/// (D - 1) * stride - 2 * padding + k.
template <typename T> Var tconv3d(Tape<T>& t, Var x, Var w, Var b, ConvOptions opt);

/// Kernel 2, stride 2. Spatial extents must be even.
template <typename T> Var max_pool3d(Tape<T>& t, Var x);

inline constexpr double kNormEpsilon = 1e-5;

/// Per-channel standardization over all non-channel axes, then gain * xhat + bias.
template <typename T> Var instance_norm(Tape<T>& t, Var x, Var gain, Var bias);

/// Running statistics for batch_norm; updated in place during training.
template <typename T>
struct BatchNormState {
  Parameter<T>* running_mean = nullptr;
  Parameter<T>* running_var = nullptr;
  double momentum = 0.9;
};

/// Batch normalization over every axis but the channel axis 0. In training
/// mode batch statistics are used and the running averages are updated as
/// running = momentum * running + (1 - momentum) * batch; otherwise the
/// running averages normalize.
template <typename T>
Var batch_norm(Tape<T>& t, Var x, Var gain, Var bias, BatchNormState<T> state, bool training);

/// Channel-wise re-statistics: sigma[c] * (x - mean_c(x)) / std_c(x) + mu[c].
template <typename T> Var adain_modulate(Tape<T>& t, Var x, Var mu, Var sigma);

/// Full AdaIN: projects latent z [L] through w [2C, L], b [2C] to C means and
/// C raw scales, passes scales through softplus, then adain_modulate.
template <typename T> Var adain(Tape<T>& t, Var x, Var z, Var w, Var b);

/// Columns of x [C, S] selected by idx -> [C, M]. Backward scatter-adds.
template <typename T>
Var gather_columns(Tape<T>& t, Var x, std::vector<std::uint32_t> idx);

/// Per-point features x [C, N] averaged into cells -> [C, R, R, R]; empty
/// cells are zero.
template <typename T>
Var aggregate_mean(Tape<T>& t, Var x, std::vector<std::uint32_t> cells, std::size_t resolution);

/// Softmax over the entries where mask != 0; other entries are exactly 0.
template <typename T>
Var masked_softmax(Tape<T>& t, Var x, std::vector<std::uint8_t> mask);

/// Mean binary cross-entropy against constant targets; pred clamped to
/// [1e-7, 1 - 1e-7] (zero gradient where clamped).
template <typename T> Var bce(Tape<T>& t, Var pred, std::span<const T> target);

/// Mean squared error against constant targets.
template <typename T> Var mse(Tape<T>& t, Var pred, std::span<const T> target);

/// Chamfer terms between predicted points p [3, N] and constant targets
/// q [3, M] (row-major coordinate rows).
template <typename T> Var chamfer(Tape<T>& t, Var p, std::span<const T> q);
template <typename T> Var chamfer_sharp(Tape<T>& t, Var p, std::span<const T> q);

/// Hinge sum over points of max(|p - center| * R - sqrt(3), 0) with
/// constant centers [3, N].
template <typename T>
Var locality(Tape<T>& t, Var p, std::span<const T> centers, std::size_t resolution);

}  // namespace voxedge::ad
