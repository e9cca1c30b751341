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

#include "voxedge/ad/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

namespace voxedge::ad {
namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<Mat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const Mat<T>>;

// Eigen's vectorized sum() splits work by buffer alignment, so the same
// values can round differently from one allocation to the next. Bias
// gradients before batch norm are pure rounding noise that Adam amplifies
// to full steps, so these sums run in a fixed order.
template <typename T, typename G>
void add_row_sums(const G& g, NdArray<T>& out, std::size_t rows) {
  for (std::size_t o = 0; o < rows; ++o) {
    T acc = 0;
    for (Eigen::Index j = 0; j < g.cols(); ++j) acc += g(static_cast<Eigen::Index>(o), j);
    out[o] += acc;
  }
}

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  throw std::invalid_argument(std::string(op) + ": " + detail);
}

void require_same_shape(const char* op, const Shape& a, const Shape& b) {
  if (a != b) shape_error(op, "shapes " + shape_string(a) + " and " + shape_string(b) + " differ");
}

template <typename T>
void accumulate(Tape<T>& t, Var v, const NdArray<T>& g) {
  if (!t.requires_grad(v)) return;
  auto& dst = t.grad(v);
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

template <typename T, typename F>
Var unary(Tape<T>& t, Var x, F&& forward_fn, BackwardFn<T> back) {
  const auto& xv = t.value(x);
  NdArray<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = forward_fn(xv[i]);
  return t.record(std::move(out), {x}, std::move(back));
}

// Geometry of a 3D sliding window: input extents, kernel, stride, padding,
// dilation and the resulting output extents.
struct Window {
  std::size_t channels;
  std::size_t in[3];
  std::size_t k;
  std::size_t stride;
  std::size_t pad;
  std::size_t dil;
  std::size_t out[3];

  std::size_t in_size() const { return in[0] * in[1] * in[2]; }
  std::size_t out_size() const { return out[0] * out[1] * out[2]; }
  std::size_t taps() const { return k * k * k; }
};

Window make_window(const char* op, std::size_t channels, const std::size_t in[3], std::size_t k,
                   const ConvOptions& opt) {
  if (opt.stride == 0 || opt.dilation == 0 || k == 0) shape_error(op, "zero stride/dilation/kernel");
  Window w{channels, {in[0], in[1], in[2]}, k, opt.stride, opt.padding, opt.dilation, {0, 0, 0}};
  for (int d = 0; d < 3; ++d) {
    const auto span = static_cast<long long>(in[d] + 2 * opt.padding) -
                      static_cast<long long>(opt.dilation * (k - 1)) - 1;
    if (span < 0) shape_error(op, "kernel larger than padded input");
    w.out[d] = static_cast<std::size_t>(span) / opt.stride + 1;
  }
  return w;
}

// cols[(c * k^3 + tap), out_pos] = x[c, in_pos(out_pos, tap)] or 0 if padded.
template <typename T>
void im2col(const T* x, const Window& w, T* cols) {
  const std::size_t k = w.k;
  const std::size_t P = w.out_size();
  for (std::size_t c = 0; c < w.channels; ++c) {
    const T* xc = x + c * w.in_size();
    for (std::size_t kd = 0; kd < k; ++kd) {
      for (std::size_t kh = 0; kh < k; ++kh) {
        for (std::size_t kw = 0; kw < k; ++kw) {
          T* row = cols + ((c * k + kd) * k * k + kh * k + kw) * P;
          for (std::size_t od = 0; od < w.out[0]; ++od) {
            const long long id = static_cast<long long>(od * w.stride + kd * w.dil) -
                                 static_cast<long long>(w.pad);
            for (std::size_t oh = 0; oh < w.out[1]; ++oh) {
              const long long ih = static_cast<long long>(oh * w.stride + kh * w.dil) -
                                   static_cast<long long>(w.pad);
              T* dst = row + (od * w.out[1] + oh) * w.out[2];
              if (id < 0 || id >= static_cast<long long>(w.in[0]) || ih < 0 ||
                  ih >= static_cast<long long>(w.in[1])) {
                std::fill(dst, dst + w.out[2], T(0));
                continue;
              }
              const T* src = xc + (static_cast<std::size_t>(id) * w.in[1] +
                                   static_cast<std::size_t>(ih)) * w.in[2];
              for (std::size_t ow = 0; ow < w.out[2]; ++ow) {
                const long long iw = static_cast<long long>(ow * w.stride + kw * w.dil) -
                                     static_cast<long long>(w.pad);
                dst[ow] = (iw < 0 || iw >= static_cast<long long>(w.in[2]))
                              ? T(0)
                              : src[static_cast<std::size_t>(iw)];
              }
            }
          }
        }
      }
    }
  }
}

// Adjoint of im2col: x[c, in_pos] += cols[...].
template <typename T>
void col2im(const T* cols, const Window& w, T* x) {
  const std::size_t k = w.k;
  const std::size_t P = w.out_size();
  for (std::size_t c = 0; c < w.channels; ++c) {
    T* xc = x + c * w.in_size();
    for (std::size_t kd = 0; kd < k; ++kd) {
      for (std::size_t kh = 0; kh < k; ++kh) {
        for (std::size_t kw = 0; kw < k; ++kw) {
          const T* row = cols + ((c * k + kd) * k * k + kh * k + kw) * P;
          for (std::size_t od = 0; od < w.out[0]; ++od) {
            const long long id = static_cast<long long>(od * w.stride + kd * w.dil) -
                                 static_cast<long long>(w.pad);
            if (id < 0 || id >= static_cast<long long>(w.in[0])) continue;
            for (std::size_t oh = 0; oh < w.out[1]; ++oh) {
              const long long ih = static_cast<long long>(oh * w.stride + kh * w.dil) -
                                   static_cast<long long>(w.pad);
              if (ih < 0 || ih >= static_cast<long long>(w.in[1])) continue;
              const T* src = row + (od * w.out[1] + oh) * w.out[2];
              T* dst = xc + (static_cast<std::size_t>(id) * w.in[1] +
                             static_cast<std::size_t>(ih)) * w.in[2];
              for (std::size_t ow = 0; ow < w.out[2]; ++ow) {
                const long long iw = static_cast<long long>(ow * w.stride + kw * w.dil) -
                                     static_cast<long long>(w.pad);
                if (iw >= 0 && iw < static_cast<long long>(w.in[2])) {
                  dst[static_cast<std::size_t>(iw)] += src[ow];
                }
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
struct ChannelStats {
  std::vector<T> mean;
  std::vector<T> inv_std;
};

// Mean and 1/sqrt(var + eps) per channel of x viewed as [C, S]; sums in
// double so float and double paths agree closely.
template <typename T>
ChannelStats<T> channel_stats(const NdArray<T>& x, std::size_t C, std::size_t S) {
  ChannelStats<T> st{std::vector<T>(C), std::vector<T>(C)};
  for (std::size_t c = 0; c < C; ++c) {
    const T* p = x.data() + c * S;
    double m = 0.0;
    for (std::size_t i = 0; i < S; ++i) m += p[i];
    m /= static_cast<double>(S);
    double v = 0.0;
    for (std::size_t i = 0; i < S; ++i) v += (p[i] - m) * (p[i] - m);
    v /= static_cast<double>(S);
    st.mean[c] = static_cast<T>(m);
    st.inv_std[c] = static_cast<T>(1.0 / std::sqrt(v + kNormEpsilon));
  }
  return st;
}

// Shared normalization kernel for instance norm, batch norm (training mode)
// and AdaIN: y = gain * (x - mean) * inv_std + bias.
template <typename T>
Var normalize_affine(Tape<T>& t, Var x, Var gain, Var bias, const char* op) {
  const auto& xv = t.value(x);
  if (xv.rank() < 2) shape_error(op, "input needs a channel axis and at least one more axis");
  const std::size_t C = xv.dim(0);
  const std::size_t S = xv.size() / C;
  if (t.value(gain).size() != C || t.value(bias).size() != C) {
    shape_error(op, "gain/bias must have " + std::to_string(C) + " entries");
  }
  auto st = std::make_shared<ChannelStats<T>>(channel_stats(xv, C, S));
  auto xhat = std::make_shared<NdArray<T>>(xv.shape());
  NdArray<T> out(xv.shape());
  const auto& g = t.value(gain);
  const auto& b = t.value(bias);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < S; ++i) {
      const T h = (xv[c * S + i] - st->mean[c]) * st->inv_std[c];
      (*xhat)[c * S + i] = h;
      out[c * S + i] = g[c] * h + b[c];
    }
  }
  return t.record(std::move(out), {x, gain, bias},
                  [x, gain, bias, C, S, st, xhat](Tape<T>& tp, const NdArray<T>& gy) {
                    const auto& gv = tp.value(gain);
                    NdArray<T> dg(tp.value(gain).shape());
                    NdArray<T> db(tp.value(bias).shape());
                    NdArray<T> dx(tp.value(x).shape());
                    for (std::size_t c = 0; c < C; ++c) {
                      double sum_dy = 0.0;
                      double sum_dy_h = 0.0;
                      for (std::size_t i = 0; i < S; ++i) {
                        sum_dy += gy[c * S + i];
                        sum_dy_h += static_cast<double>(gy[c * S + i]) * (*xhat)[c * S + i];
                      }
                      dg[c] = static_cast<T>(sum_dy_h);
                      db[c] = static_cast<T>(sum_dy);
                      // dxhat = gy * g; dx = inv_std/S * (S dxhat - sum dxhat - xhat sum dxhat xhat)
                      const double k = gv[c] * st->inv_std[c] / static_cast<double>(S);
                      for (std::size_t i = 0; i < S; ++i) {
                        dx[c * S + i] = static_cast<T>(
                            k * (static_cast<double>(S) * gy[c * S + i] - sum_dy -
                                 (*xhat)[c * S + i] * sum_dy_h));
                      }
                    }
                    accumulate(tp, x, dx);
                    accumulate(tp, gain, dg);
                    accumulate(tp, bias, db);
                  });
}

template <typename T>
std::size_t nearest_index(const T* pts, std::size_t n, T x, T y, T z, T& best_d2) {
  std::size_t best = 0;
  best_d2 = std::numeric_limits<T>::infinity();
  const T* px = pts;
  const T* py = pts + n;
  const T* pz = pts + 2 * n;
  for (std::size_t j = 0; j < n; ++j) {
    const T dx = px[j] - x;
    const T dy = py[j] - y;
    const T dz = pz[j] - z;
    const T d2 = dx * dx + dy * dy + dz * dz;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = j;
    }
  }
  return best;
}

struct NearestPairs {
  std::vector<std::uint32_t> p_to_q;
  std::vector<std::uint32_t> q_to_p;
  std::vector<double> d2_p;
  std::vector<double> d2_q;
};

template <typename T>
void note_pairs(Tape<T>& t, const NearestPairs& nn) {
  for (auto j : nn.p_to_q) t.note_branch(j);
  for (auto i : nn.q_to_p) t.note_branch(i);
}

template <typename T>
NearestPairs nearest_pairs(const NdArray<T>& p, std::span<const T> q, const char* op) {
  if (p.rank() != 2 || p.dim(0) != 3) shape_error(op, "points must be [3, N]");
  if (q.empty() || q.size() % 3 != 0) shape_error(op, "targets must be [3, M] with M >= 1");
  const std::size_t n = p.dim(1);
  const std::size_t m = q.size() / 3;
  NearestPairs r{std::vector<std::uint32_t>(n), std::vector<std::uint32_t>(m),
                 std::vector<double>(n), std::vector<double>(m)};
  for (std::size_t i = 0; i < n; ++i) {
    T d2;
    r.p_to_q[i] = static_cast<std::uint32_t>(
        nearest_index(q.data(), m, p[i], p[n + i], p[2 * n + i], d2));
    r.d2_p[i] = d2;
  }
  for (std::size_t j = 0; j < m; ++j) {
    T d2;
    r.q_to_p[j] =
        static_cast<std::uint32_t>(nearest_index(p.data(), n, q[j], q[m + j], q[2 * m + j], d2));
    r.d2_q[j] = d2;
  }
  return r;
}

}  // namespace

template <typename T>
Var add(Tape<T>& t, Var a, Var b) {
  require_same_shape("add", t.shape(a), t.shape(b));
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  NdArray<T> out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape<T>& tp, const NdArray<T>& g) {
    accumulate(tp, a, g);
    accumulate(tp, b, g);
  });
}

template <typename T>
Var sub(Tape<T>& t, Var a, Var b) {
  require_same_shape("sub", t.shape(a), t.shape(b));
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  NdArray<T> out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape<T>& tp, const NdArray<T>& g) {
    accumulate(tp, a, g);
    if (!tp.requires_grad(b)) return;
    auto& gb = tp.grad(b);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
  });
}

template <typename T>
Var mul(Tape<T>& t, Var a, Var b) {
  require_same_shape("mul", t.shape(a), t.shape(b));
  const auto& av = t.value(a);
  const auto& bv = t.value(b);
  NdArray<T> out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape<T>& tp, const NdArray<T>& g) {
    const auto& av = tp.value(a);
    const auto& bv = tp.value(b);
    if (tp.requires_grad(a)) {
      auto& ga = tp.grad(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (tp.requires_grad(b)) {
      auto& gb = tp.grad(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

template <typename T>
Var scale(Tape<T>& t, Var a, T s) {
  return unary<T>(t, a, [s](T v) { return s * v; }, [a, s](Tape<T>& tp, const NdArray<T>& g) {
    if (!tp.requires_grad(a)) return;
    auto& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

template <typename T>
Var add_scalar(Tape<T>& t, Var a, T s) {
  return unary<T>(t, a, [s](T v) { return v + s; },
                  [a](Tape<T>& tp, const NdArray<T>& g) { accumulate(tp, a, g); });
}

template <typename T>
Var relu(Tape<T>& t, Var x) {
  for (T v : t.value(x).values()) t.note_branch(v > T(0));
  return unary<T>(t, x, [](T v) { return v > T(0) ? v : T(0); },
                  [x](Tape<T>& tp, const NdArray<T>& g) {
                    if (!tp.requires_grad(x)) return;
                    const auto& xv = tp.value(x);
                    auto& gx = tp.grad(x);
                    for (std::size_t i = 0; i < g.size(); ++i) {
                      if (xv[i] > T(0)) gx[i] += g[i];
                    }
                  });
}

template <typename T>
Var sigmoid(Tape<T>& t, Var x) {
  const auto& xv = t.value(x);
  NdArray<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const T v = xv[i];
    out[i] = v >= T(0) ? T(1) / (T(1) + std::exp(-v)) : std::exp(v) / (T(1) + std::exp(v));
  }
  auto y = std::make_shared<NdArray<T>>(out);
  return t.record(std::move(out), {x}, [x, y](Tape<T>& tp, const NdArray<T>& g) {
    if (!tp.requires_grad(x)) return;
    auto& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (*y)[i] * (T(1) - (*y)[i]);
  });
}

template <typename T>
Var tanh(Tape<T>& t, Var x) {
  const auto& xv = t.value(x);
  NdArray<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = std::tanh(xv[i]);
  auto y = std::make_shared<NdArray<T>>(out);
  return t.record(std::move(out), {x}, [x, y](Tape<T>& tp, const NdArray<T>& g) {
    if (!tp.requires_grad(x)) return;
    auto& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (T(1) - (*y)[i] * (*y)[i]);
  });
}

template <typename T>
Var softplus(Tape<T>& t, Var x) {
  return unary<T>(
      t, x, [](T v) { return std::max(v, T(0)) + std::log1p(std::exp(-std::abs(v))); },
      [x](Tape<T>& tp, const NdArray<T>& g) {
        if (!tp.requires_grad(x)) return;
        const auto& xv = tp.value(x);
        auto& gx = tp.grad(x);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const T v = xv[i];
          const T s = v >= T(0) ? T(1) / (T(1) + std::exp(-v)) : std::exp(v) / (T(1) + std::exp(v));
          gx[i] += g[i] * s;
        }
      });
}

template <typename T>
Var reshape(Tape<T>& t, Var x, Shape shape) {
  const auto& xv = t.value(x);
  if (shape_size(shape) != xv.size()) {
    shape_error("reshape", shape_string(xv.shape()) + " -> " + shape_string(shape));
  }
  return t.record(xv.reshaped(std::move(shape)), {x}, [x](Tape<T>& tp, const NdArray<T>& g) {
    if (!tp.requires_grad(x)) return;
    auto& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

template <typename T>
Var reduce_sum(Tape<T>& t, Var x) {
  const auto& xv = t.value(x);
  double s = 0.0;
  for (auto v : xv.values()) s += v;
  return t.record(NdArray<T>::scalar(static_cast<T>(s)), {x},
                  [x](Tape<T>& tp, const NdArray<T>& g) {
                    if (!tp.requires_grad(x)) return;
                    auto& gx = tp.grad(x);
                    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[0];
                  });
}

template <typename T>
Var reduce_mean(Tape<T>& t, Var x) {
  const auto n = static_cast<T>(t.value(x).size());
  return scale(t, reduce_sum(t, x), T(1) / n);
}

template <typename T>
Var concat(Tape<T>& t, const std::vector<Var>& parts) {
  if (parts.empty()) shape_error("concat", "no inputs");
  Shape tail(t.shape(parts[0]).begin() + 1, t.shape(parts[0]).end());
  std::size_t rows = 0;
  for (auto p : parts) {
    const auto& s = t.shape(p);
    if (s.empty() || Shape(s.begin() + 1, s.end()) != tail) {
      shape_error("concat", "trailing extents differ: " + shape_string(s));
    }
    rows += s[0];
  }
  Shape out_shape = tail;
  out_shape.insert(out_shape.begin(), rows);
  NdArray<T> out(out_shape);
  std::size_t off = 0;
  std::vector<std::size_t> offsets;
  for (auto p : parts) {
    const auto& v = t.value(p);
    offsets.push_back(off);
    std::copy(v.data(), v.data() + v.size(), out.data() + off);
    off += v.size();
  }
  return t.record(std::move(out), parts, [parts, offsets](Tape<T>& tp, const NdArray<T>& g) {
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (!tp.requires_grad(parts[k])) continue;
      auto& gp = tp.grad(parts[k]);
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[offsets[k] + i];
    }
  });
}

template <typename T>
Var slice(Tape<T>& t, Var x, std::size_t begin, std::size_t end) {
  const auto& xv = t.value(x);
  if (xv.rank() < 1 || begin >= end || end > xv.dim(0)) {
    shape_error("slice", "rows [" + std::to_string(begin) + ", " + std::to_string(end) +
                             ") of " + shape_string(xv.shape()));
  }
  const std::size_t row = xv.size() / xv.dim(0);
  Shape s = xv.shape();
  s[0] = end - begin;
  NdArray<T> out(s, std::vector<T>(xv.data() + begin * row, xv.data() + end * row));
  return t.record(std::move(out), {x}, [x, begin, row](Tape<T>& tp, const NdArray<T>& g) {
    if (!tp.requires_grad(x)) return;
    auto& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[begin * row + i] += g[i];
  });
}

template <typename T>
Var linear(Tape<T>& t, Var x, Var w, Var b) {
  const auto& xv = t.value(x);
  const auto& wv = t.value(w);
  if (wv.rank() != 2) shape_error("linear", "weight must be [out, in]");
  const std::size_t out_f = wv.dim(0);
  const std::size_t in_f = wv.dim(1);
  const bool vec = xv.rank() == 1;
  if ((vec && xv.dim(0) != in_f) || (!vec && (xv.rank() != 2 || xv.dim(1) != in_f))) {
    shape_error("linear", "input " + shape_string(xv.shape()) + " vs weight " +
                              shape_string(wv.shape()));
  }
  if (t.value(b).size() != out_f) shape_error("linear", "bias must have out entries");
  const std::size_t n = vec ? 1 : xv.dim(0);
  NdArray<T> out(vec ? Shape{out_f} : Shape{n, out_f});
  ConstMatMap<T> X(xv.data(), n, in_f);
  ConstMatMap<T> W(wv.data(), out_f, in_f);
  MatMap<T> Y(out.data(), n, out_f);
  Y.noalias() = X * W.transpose();
  const auto& bv = t.value(b);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t o = 0; o < out_f; ++o) Y(i, o) += bv[o];
  }
  return t.record(std::move(out), {x, w, b}, [x, w, b, n, in_f, out_f](Tape<T>& tp,
                                                                      const NdArray<T>& g) {
    ConstMatMap<T> G(g.data(), n, out_f);
    if (tp.requires_grad(x)) {
      MatMap<T> GX(tp.grad(x).data(), n, in_f);
      GX.noalias() += G * ConstMatMap<T>(tp.value(w).data(), out_f, in_f);
    }
    if (tp.requires_grad(w)) {
      MatMap<T> GW(tp.grad(w).data(), out_f, in_f);
      GW.noalias() += G.transpose() * ConstMatMap<T>(tp.value(x).data(), n, in_f);
    }
    if (tp.requires_grad(b)) {
      auto& gb = tp.grad(b);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t o = 0; o < out_f; ++o) gb[o] += G(i, o);
      }
    }
  });
}

template <typename T>
Var pointwise(Tape<T>& t, Var x, Var w, Var b) {
  const auto& xv = t.value(x);
  const auto& wv = t.value(w);
  if (wv.rank() != 2 || xv.rank() < 2 || xv.dim(0) != wv.dim(1)) {
    shape_error("pointwise", "input " + shape_string(xv.shape()) + " vs weight " +
                                 shape_string(wv.shape()));
  }
  const std::size_t ci = wv.dim(1);
  const std::size_t co = wv.dim(0);
  if (t.value(b).size() != co) shape_error("pointwise", "bias must have out entries");
  const std::size_t S = xv.size() / ci;
  Shape s = xv.shape();
  s[0] = co;
  NdArray<T> out(s);
  MatMap<T> Y(out.data(), co, S);
  Y.noalias() = ConstMatMap<T>(wv.data(), co, ci) * ConstMatMap<T>(xv.data(), ci, S);
  const auto& bv = t.value(b);
  for (std::size_t o = 0; o < co; ++o) Y.row(o).array() += bv[o];
  return t.record(std::move(out), {x, w, b}, [x, w, b, ci, co, S](Tape<T>& tp,
                                                                 const NdArray<T>& g) {
    ConstMatMap<T> G(g.data(), co, S);
    if (tp.requires_grad(x)) {
      MatMap<T> GX(tp.grad(x).data(), ci, S);
      GX.noalias() += ConstMatMap<T>(tp.value(w).data(), co, ci).transpose() * G;
    }
    if (tp.requires_grad(w)) {
      MatMap<T> GW(tp.grad(w).data(), co, ci);
      GW.noalias() += G * ConstMatMap<T>(tp.value(x).data(), ci, S).transpose();
    }
    if (tp.requires_grad(b)) {
      auto& gb = tp.grad(b);
      add_row_sums(G, gb, co);
    }
  });
}

template <typename T>
Var conv3d(Tape<T>& t, Var x, Var w, Var b, ConvOptions opt) {
  const auto& xv = t.value(x);
  const auto& wv = t.value(w);
  if (xv.rank() != 4 || wv.rank() != 5 || wv.dim(1) != xv.dim(0) || wv.dim(2) != wv.dim(3) ||
      wv.dim(3) != wv.dim(4)) {
    shape_error("conv3d", "input " + shape_string(xv.shape()) + " vs weight " +
                              shape_string(wv.shape()));
  }
  const std::size_t co = wv.dim(0);
  if (t.value(b).size() != co) shape_error("conv3d", "bias must have Co entries");
  const std::size_t in[3] = {xv.dim(1), xv.dim(2), xv.dim(3)};
  const Window win = make_window("conv3d", xv.dim(0), in, wv.dim(2), opt);
  const std::size_t K = win.channels * win.taps();
  const std::size_t P = win.out_size();
  auto cols = std::make_shared<std::vector<T>>(K * P);
  im2col(xv.data(), win, cols->data());
  NdArray<T> out(Shape{co, win.out[0], win.out[1], win.out[2]});
  MatMap<T> Y(out.data(), co, P);
  Y.noalias() = ConstMatMap<T>(wv.data(), co, K) * ConstMatMap<T>(cols->data(), K, P);
  const auto& bv = t.value(b);
  for (std::size_t o = 0; o < co; ++o) Y.row(o).array() += bv[o];
  return t.record(std::move(out), {x, w, b}, [x, w, b, win, cols, co, K, P](Tape<T>& tp,
                                                                           const NdArray<T>& g) {
    ConstMatMap<T> G(g.data(), co, P);
    if (tp.requires_grad(w)) {
      MatMap<T> GW(tp.grad(w).data(), co, K);
      GW.noalias() += G * ConstMatMap<T>(cols->data(), K, P).transpose();
    }
    if (tp.requires_grad(b)) {
      auto& gb = tp.grad(b);
      add_row_sums(G, gb, co);
    }
    if (tp.requires_grad(x)) {
      Mat<T> dcols = ConstMatMap<T>(tp.value(w).data(), co, K).transpose() * G;
      col2im(dcols.data(), win, tp.grad(x).data());
    }
  });
}

template <typename T>
Var tconv3d(Tape<T>& t, Var x, Var w, Var b, ConvOptions opt) {
  const auto& xv = t.value(x);
  const auto& wv = t.value(w);
  if (xv.rank() != 4 || wv.rank() != 5 || wv.dim(0) != xv.dim(0) || wv.dim(2) != wv.dim(3) ||
      wv.dim(3) != wv.dim(4)) {
    shape_error("tconv3d", "input " + shape_string(xv.shape()) + " vs weight " +
                               shape_string(wv.shape()));
  }
  if (opt.dilation != 1) shape_error("tconv3d", "dilation is not supported");
  const std::size_t ci = xv.dim(0);
  const std::size_t co = wv.dim(1);
  const std::size_t k = wv.dim(2);
  if (t.value(b).size() != co) shape_error("tconv3d", "bias must have Co entries");
  std::size_t out_ext[3];
  for (int d = 0; d < 3; ++d) {
    const auto e = static_cast<long long>((xv.dim(d + 1) - 1) * opt.stride + k) -
                   static_cast<long long>(2 * opt.padding);
    if (e <= 0) shape_error("tconv3d", "non-positive output extent");
    out_ext[d] = static_cast<std::size_t>(e);
  }
  // The output grid is the input of the adjoint convolution.
  const Window win = make_window("tconv3d", co, out_ext, k, opt);
  for (int d = 0; d < 3; ++d) {
    if (win.out[d] != xv.dim(d + 1)) shape_error("tconv3d", "inconsistent stride arithmetic");
  }
  const std::size_t K = co * win.taps();
  const std::size_t P = win.out_size();
  Mat<T> cols = ConstMatMap<T>(wv.data(), ci, K).transpose() * ConstMatMap<T>(xv.data(), ci, P);
  NdArray<T> out(Shape{co, out_ext[0], out_ext[1], out_ext[2]});
  col2im(cols.data(), win, out.data());
  const auto& bv = t.value(b);
  const std::size_t so = win.in_size();
  for (std::size_t o = 0; o < co; ++o) {
    for (std::size_t i = 0; i < so; ++i) out[o * so + i] += bv[o];
  }
  return t.record(std::move(out), {x, w, b}, [x, w, b, win, ci, co, K, P, so](
                                                  Tape<T>& tp, const NdArray<T>& g) {
    std::vector<T> gcols(K * P);
    im2col(g.data(), win, gcols.data());
    ConstMatMap<T> GC(gcols.data(), K, P);
    if (tp.requires_grad(x)) {
      MatMap<T> GX(tp.grad(x).data(), ci, P);
      GX.noalias() += ConstMatMap<T>(tp.value(w).data(), ci, K) * GC;
    }
    if (tp.requires_grad(w)) {
      MatMap<T> GW(tp.grad(w).data(), ci, K);
      GW.noalias() += ConstMatMap<T>(tp.value(x).data(), ci, P) * GC.transpose();
    }
    if (tp.requires_grad(b)) {
      auto& gb = tp.grad(b);
      for (std::size_t o = 0; o < co; ++o) {
        double s = 0.0;
        for (std::size_t i = 0; i < so; ++i) s += g[o * so + i];
        gb[o] += static_cast<T>(s);
      }
    }
  });
}

template <typename T>
Var max_pool3d(Tape<T>& t, Var x) {
  const auto& xv = t.value(x);
  if (xv.rank() != 4 || xv.dim(1) % 2 || xv.dim(2) % 2 || xv.dim(3) % 2) {
    shape_error("max_pool3d", "needs [C, D, H, W] with even spatial extents, got " +
                                  shape_string(xv.shape()));
  }
  const std::size_t C = xv.dim(0), D = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
  const std::size_t d2 = D / 2, h2 = H / 2, w2 = W / 2;
  NdArray<T> out(Shape{C, d2, h2, w2});
  auto arg = std::make_shared<std::vector<std::uint32_t>>(out.size());
  std::size_t o = 0;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < d2; ++i) {
      for (std::size_t j = 0; j < h2; ++j) {
        for (std::size_t k = 0; k < w2; ++k, ++o) {
          std::size_t best = 0;
          T bv = -std::numeric_limits<T>::infinity();
          for (std::size_t a = 0; a < 8; ++a) {
            const std::size_t idx = ((c * D + 2 * i + (a >> 2)) * H + 2 * j + ((a >> 1) & 1)) * W +
                                    2 * k + (a & 1);
            if (xv[idx] > bv) {
              bv = xv[idx];
              best = idx;
            }
          }
          out[o] = bv;
          (*arg)[o] = static_cast<std::uint32_t>(best);
          t.note_branch(best);
        }
      }
    }
  }
  return t.record(std::move(out), {x}, [x, arg](Tape<T>& tp, const NdArray<T>& g) {
    if (!tp.requires_grad(x)) return;
    auto& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[(*arg)[i]] += g[i];
  });
}

template <typename T>
Var instance_norm(Tape<T>& t, Var x, Var gain, Var bias) {
  return normalize_affine(t, x, gain, bias, "instance_norm");
}

template <typename T>
Var batch_norm(Tape<T>& t, Var x, Var gain, Var bias, BatchNormState<T> state, bool training) {
  const auto& xv = t.value(x);
  if (xv.rank() < 2) shape_error("batch_norm", "input needs a channel axis");
  const std::size_t C = xv.dim(0);
  const std::size_t S = xv.size() / C;
  if (state.running_mean == nullptr || state.running_var == nullptr ||
      state.running_mean->value.size() != C || state.running_var->value.size() != C) {
    shape_error("batch_norm", "running statistics must have " + std::to_string(C) + " entries");
  }
  if (training) {
    const auto st = channel_stats(xv, C, S);
    const auto m = static_cast<T>(state.momentum);
    for (std::size_t c = 0; c < C; ++c) {
      const T var = T(1) / (st.inv_std[c] * st.inv_std[c]) - static_cast<T>(kNormEpsilon);
      auto& rm = state.running_mean->value[c];
      auto& rv = state.running_var->value[c];
      rm = m * rm + (T(1) - m) * st.mean[c];
      rv = m * rv + (T(1) - m) * std::max(var, T(0));
    }
    return normalize_affine(t, x, gain, bias, "batch_norm");
  }
  std::vector<T> mean(C);
  std::vector<T> inv(C);
  for (std::size_t c = 0; c < C; ++c) {
    mean[c] = state.running_mean->value[c];
    inv[c] = static_cast<T>(1.0 / std::sqrt(state.running_var->value[c] + kNormEpsilon));
  }
  const auto& g = t.value(gain);
  const auto& b = t.value(bias);
  NdArray<T> out(xv.shape());
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < S; ++i) {
      out[c * S + i] = g[c] * (xv[c * S + i] - mean[c]) * inv[c] + b[c];
    }
  }
  return t.record(std::move(out), {x, gain, bias},
                  [x, gain, bias, C, S, mean, inv](Tape<T>& tp, const NdArray<T>& gy) {
                    const auto& xv = tp.value(x);
                    const auto& gv = tp.value(gain);
                    for (std::size_t c = 0; c < C; ++c) {
                      double sdy = 0.0;
                      double sdyh = 0.0;
                      for (std::size_t i = 0; i < S; ++i) {
                        sdy += gy[c * S + i];
                        sdyh += gy[c * S + i] * (xv[c * S + i] - mean[c]) * inv[c];
                      }
                      if (tp.requires_grad(x)) {
                        auto& gx = tp.grad(x);
                        for (std::size_t i = 0; i < S; ++i) gx[c * S + i] += gy[c * S + i] * gv[c] * inv[c];
                      }
                      if (tp.requires_grad(gain)) tp.grad(gain)[c] += static_cast<T>(sdyh);
                      if (tp.requires_grad(bias)) tp.grad(bias)[c] += static_cast<T>(sdy);
                    }
                  });
}

template <typename T>
Var adain_modulate(Tape<T>& t, Var x, Var mu, Var sigma) {
  return normalize_affine(t, x, sigma, mu, "adain");
}

template <typename T>
Var adain(Tape<T>& t, Var x, Var z, Var w, Var b) {
  const std::size_t C = t.value(x).dim(0);
  if (t.value(w).rank() != 2 || t.value(w).dim(0) != 2 * C) {
    shape_error("adain", "projection must produce 2C = " + std::to_string(2 * C) + " values");
  }
  Var y = linear(t, z, w, b);
  Var mu = slice(t, y, 0, C);
  Var sigma = softplus(t, slice(t, y, C, 2 * C));
  return adain_modulate(t, x, mu, sigma);
}

template <typename T>
Var gather_columns(Tape<T>& t, Var x, std::vector<std::uint32_t> idx) {
  const auto& xv = t.value(x);
  if (xv.rank() < 2 || idx.empty()) shape_error("gather_columns", "needs [C, S] input and indices");
  const std::size_t C = xv.dim(0);
  const std::size_t S = xv.size() / C;
  const std::size_t M = idx.size();
  NdArray<T> out(Shape{C, M});
  for (auto i : idx) {
    if (i >= S) shape_error("gather_columns", "index out of range");
  }
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t m = 0; m < M; ++m) out[c * M + m] = xv[c * S + idx[m]];
  }
  return t.record(std::move(out), {x}, [x, idx = std::move(idx), C, S, M](Tape<T>& tp,
                                                                          const NdArray<T>& g) {
    if (!tp.requires_grad(x)) return;
    auto& gx = tp.grad(x);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t m = 0; m < M; ++m) gx[c * S + idx[m]] += g[c * M + m];
    }
  });
}

template <typename T>
Var aggregate_mean(Tape<T>& t, Var x, std::vector<std::uint32_t> cells, std::size_t resolution) {
  const auto& xv = t.value(x);
  if (xv.rank() != 2 || xv.dim(1) != cells.size()) {
    shape_error("aggregate_mean", "features must be [C, N] with one cell per point");
  }
  const std::size_t C = xv.dim(0);
  const std::size_t N = cells.size();
  const std::size_t R3 = resolution * resolution * resolution;
  auto count = std::make_shared<std::vector<std::uint32_t>>(R3, 0);
  for (auto c : cells) {
    if (c >= R3) shape_error("aggregate_mean", "cell index out of range");
    ++(*count)[c];
  }
  NdArray<T> out(Shape{C, resolution, resolution, resolution});
  for (std::size_t c = 0; c < C; ++c) {
    T* row = out.data() + c * R3;
    for (std::size_t i = 0; i < N; ++i) row[cells[i]] += xv[c * N + i];
    for (std::size_t k = 0; k < R3; ++k) {
      if ((*count)[k] > 0) row[k] /= static_cast<T>((*count)[k]);
    }
  }
  return t.record(std::move(out), {x}, [x, cells = std::move(cells), count, C, N, R3](
                                           Tape<T>& tp, const NdArray<T>& g) {
    if (!tp.requires_grad(x)) return;
    auto& gx = tp.grad(x);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t i = 0; i < N; ++i) {
        gx[c * N + i] += g[c * R3 + cells[i]] / static_cast<T>((*count)[cells[i]]);
      }
    }
  });
}

template <typename T>
Var masked_softmax(Tape<T>& t, Var x, std::vector<std::uint8_t> mask) {
  const auto& xv = t.value(x);
  if (mask.size() != xv.size()) shape_error("masked_softmax", "mask size mismatch");
  T mx = -std::numeric_limits<T>::infinity();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    if (mask[i]) mx = std::max(mx, xv[i]);
  }
  if (!std::isfinite(static_cast<double>(mx))) shape_error("masked_softmax", "empty mask");
  NdArray<T> out(xv.shape());
  double z = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    if (mask[i]) {
      out[i] = std::exp(xv[i] - mx);
      z += out[i];
    }
  }
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = static_cast<T>(out[i] / z);
  auto y = std::make_shared<NdArray<T>>(out);
  return t.record(std::move(out), {x}, [x, y](Tape<T>& tp, const NdArray<T>& g) {
    if (!tp.requires_grad(x)) return;
    double dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dot += static_cast<double>(g[i]) * (*y)[i];
    auto& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      gx[i] += static_cast<T>((*y)[i] * (g[i] - dot));
    }
  });
}

template <typename T>
Var bce(Tape<T>& t, Var pred, std::span<const T> target) {
  const auto& pv = t.value(pred);
  if (pv.size() != target.size()) shape_error("bce", "target size mismatch");
  const double eps = 1e-7;
  double s = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double p = std::clamp(static_cast<double>(pv[i]), eps, 1.0 - eps);
    t.note_branch(p != static_cast<double>(pv[i]));
    s += target[i] * std::log(p) + (1.0 - target[i]) * std::log(1.0 - p);
  }
  const double n = static_cast<double>(pv.size());
  std::vector<T> tgt(target.begin(), target.end());
  return t.record(NdArray<T>::scalar(static_cast<T>(-s / n)), {pred},
                  [pred, tgt = std::move(tgt), n, eps](Tape<T>& tp, const NdArray<T>& g) {
                    if (!tp.requires_grad(pred)) return;
                    const auto& pv = tp.value(pred);
                    auto& gp = tp.grad(pred);
                    for (std::size_t i = 0; i < pv.size(); ++i) {
                      const double p = pv[i];
                      if (p < eps || p > 1.0 - eps) continue;
                      gp[i] += static_cast<T>(g[0] * -(tgt[i] / p - (1.0 - tgt[i]) / (1.0 - p)) / n);
                    }
                  });
}

template <typename T>
Var mse(Tape<T>& t, Var pred, std::span<const T> target) {
  const auto& pv = t.value(pred);
  if (pv.size() != target.size()) shape_error("mse", "target size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double d = static_cast<double>(pv[i]) - target[i];
    s += d * d;
  }
  const double n = static_cast<double>(pv.size());
  std::vector<T> tgt(target.begin(), target.end());
  return t.record(NdArray<T>::scalar(static_cast<T>(s / n)), {pred},
                  [pred, tgt = std::move(tgt), n](Tape<T>& tp, const NdArray<T>& g) {
                    if (!tp.requires_grad(pred)) return;
                    const auto& pv = tp.value(pred);
                    auto& gp = tp.grad(pred);
                    for (std::size_t i = 0; i < pv.size(); ++i) {
                      gp[i] += static_cast<T>(2.0 * g[0] * (static_cast<double>(pv[i]) - tgt[i]) / n);
                    }
                  });
}

template <typename T>
Var chamfer(Tape<T>& t, Var p, std::span<const T> q) {
  const auto& pv = t.value(p);
  auto nn = std::make_shared<NearestPairs>(nearest_pairs(pv, q, "chamfer"));
  note_pairs(t, *nn);
  const std::size_t n = pv.dim(1);
  const std::size_t m = q.size() / 3;
  double a = 0.0;
  for (double v : nn->d2_p) a += v;
  double b = 0.0;
  for (double v : nn->d2_q) b += v;
  const double value = a / static_cast<double>(n) + b / static_cast<double>(m);
  std::vector<T> qc(q.begin(), q.end());
  return t.record(NdArray<T>::scalar(static_cast<T>(value)), {p},
                  [p, nn, qc = std::move(qc), n, m](Tape<T>& tp, const NdArray<T>& g) {
                    if (!tp.requires_grad(p)) return;
                    const auto& pv = tp.value(p);
                    auto& gp = tp.grad(p);
                    const double ga = 2.0 * g[0] / static_cast<double>(n);
                    const double gb = 2.0 * g[0] / static_cast<double>(m);
                    for (std::size_t i = 0; i < n; ++i) {
                      const std::size_t j = nn->p_to_q[i];
                      for (std::size_t d = 0; d < 3; ++d) {
                        gp[d * n + i] += static_cast<T>(ga * (pv[d * n + i] - qc[d * m + j]));
                      }
                    }
                    for (std::size_t j = 0; j < m; ++j) {
                      const std::size_t i = nn->q_to_p[j];
                      for (std::size_t d = 0; d < 3; ++d) {
                        gp[d * n + i] += static_cast<T>(gb * (pv[d * n + i] - qc[d * m + j]));
                      }
                    }
                  });
}

template <typename T>
Var chamfer_sharp(Tape<T>& t, Var p, std::span<const T> q) {
  const auto& pv = t.value(p);
  auto nn = std::make_shared<NearestPairs>(nearest_pairs(pv, q, "chamfer_sharp"));
  note_pairs(t, *nn);
  const std::size_t n = pv.dim(1);
  const std::size_t m = q.size() / 3;
  auto fifth_sum = [](const std::vector<double>& d2) {
    double s = 0.0;
    for (double v : d2) s += v * v * std::sqrt(v);
    return s;
  };
  const double sa = fifth_sum(nn->d2_p);
  const double sb = fifth_sum(nn->d2_q);
  const double value = std::pow(sa, 0.2) / static_cast<double>(n) +
                       std::pow(sb, 0.2) / static_cast<double>(m);
  std::vector<T> qc(q.begin(), q.end());
  return t.record(NdArray<T>::scalar(static_cast<T>(value)), {p},
                  [p, nn, qc = std::move(qc), n, m, sa, sb](Tape<T>& tp, const NdArray<T>& g) {
                    if (!tp.requires_grad(p)) return;
                    const auto& pv = tp.value(p);
                    auto& gp = tp.grad(p);
                    // d/dp (1/N) S^(1/5) = (1/N) S^(-4/5) d^3 (p - q)
                    const double ka = sa > 0.0 ? g[0] * std::pow(sa, -0.8) / static_cast<double>(n) : 0.0;
                    const double kb = sb > 0.0 ? g[0] * std::pow(sb, -0.8) / static_cast<double>(m) : 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                      const std::size_t j = nn->p_to_q[i];
                      const double d3 = nn->d2_p[i] * std::sqrt(nn->d2_p[i]);
                      for (std::size_t d = 0; d < 3; ++d) {
                        gp[d * n + i] += static_cast<T>(ka * d3 * (pv[d * n + i] - qc[d * m + j]));
                      }
                    }
                    for (std::size_t j = 0; j < m; ++j) {
                      const std::size_t i = nn->q_to_p[j];
                      const double d3 = nn->d2_q[j] * std::sqrt(nn->d2_q[j]);
                      for (std::size_t d = 0; d < 3; ++d) {
                        gp[d * n + i] += static_cast<T>(kb * d3 * (pv[d * n + i] - qc[d * m + j]));
                      }
                    }
                  });
}

template <typename T>
Var locality(Tape<T>& t, Var p, std::span<const T> centers, std::size_t resolution) {
  const auto& pv = t.value(p);
  if (pv.rank() != 2 || pv.dim(0) != 3 || centers.size() != pv.size()) {
    shape_error("locality", "points and centers must both be [3, N]");
  }
  const std::size_t n = pv.dim(1);
  const double r = static_cast<double>(resolution);
  const double limit = std::sqrt(3.0);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const double d = pv[k * n + i] - centers[k * n + i];
      d2 += d * d;
    }
    const double excess = std::sqrt(d2) * r - limit;
    t.note_branch(excess > 0.0);
    s += std::max(excess, 0.0);
  }
  std::vector<T> c(centers.begin(), centers.end());
  return t.record(NdArray<T>::scalar(static_cast<T>(s)), {p},
                  [p, c = std::move(c), n, r, limit](Tape<T>& tp, const NdArray<T>& g) {
                    if (!tp.requires_grad(p)) return;
                    const auto& pv = tp.value(p);
                    auto& gp = tp.grad(p);
                    for (std::size_t i = 0; i < n; ++i) {
                      double d2 = 0.0;
                      for (std::size_t k = 0; k < 3; ++k) {
                        const double d = pv[k * n + i] - c[k * n + i];
                        d2 += d * d;
                      }
                      const double dist = std::sqrt(d2);
                      if (dist * r - limit <= 0.0) continue;
                      for (std::size_t k = 0; k < 3; ++k) {
                        gp[k * n + i] += static_cast<T>(g[0] * r * (pv[k * n + i] - c[k * n + i]) / dist);
                      }
                    }
                  });
}

#define VOXEDGE_INSTANTIATE_OPS(T)                                                           template Var add<T>(Tape<T>&, Var, Var);                                                   template Var sub<T>(Tape<T>&, Var, Var);                                                   template Var mul<T>(Tape<T>&, Var, Var);                                                   template Var scale<T>(Tape<T>&, Var, T);                                                   template Var add_scalar<T>(Tape<T>&, Var, T);                                              template Var relu<T>(Tape<T>&, Var);                                                       template Var sigmoid<T>(Tape<T>&, Var);                                                    template Var tanh<T>(Tape<T>&, Var);                                                       template Var softplus<T>(Tape<T>&, Var);                                                   template Var reshape<T>(Tape<T>&, Var, Shape);                                             template Var reduce_sum<T>(Tape<T>&, Var);                                                 template Var reduce_mean<T>(Tape<T>&, Var);                                                template Var concat<T>(Tape<T>&, const std::vector<Var>&);                                 template Var slice<T>(Tape<T>&, Var, std::size_t, std::size_t);                            template Var linear<T>(Tape<T>&, Var, Var, Var);                                           template Var pointwise<T>(Tape<T>&, Var, Var, Var);                                        template Var conv3d<T>(Tape<T>&, Var, Var, Var, ConvOptions);                              template Var tconv3d<T>(Tape<T>&, Var, Var, Var, ConvOptions);                             template Var max_pool3d<T>(Tape<T>&, Var);                                                 template Var instance_norm<T>(Tape<T>&, Var, Var, Var);                                    template Var batch_norm<T>(Tape<T>&, Var, Var, Var, BatchNormState<T>, bool);              template Var adain_modulate<T>(Tape<T>&, Var, Var, Var);                                   template Var adain<T>(Tape<T>&, Var, Var, Var, Var);                                       template Var gather_columns<T>(Tape<T>&, Var, std::vector<std::uint32_t>);                 template Var aggregate_mean<T>(Tape<T>&, Var, std::vector<std::uint32_t>, std::size_t);    template Var masked_softmax<T>(Tape<T>&, Var, std::vector<std::uint8_t>);                  template Var bce<T>(Tape<T>&, Var, std::span<const T>);                                    template Var mse<T>(Tape<T>&, Var, std::span<const T>);                                    template Var chamfer<T>(Tape<T>&, Var, std::span<const T>);                                template Var chamfer_sharp<T>(Tape<T>&, Var, std::span<const T>);                          template Var locality<T>(Tape<T>&, Var, std::span<const T>, std::size_t);

VOXEDGE_INSTANTIATE_OPS(float)
VOXEDGE_INSTANTIATE_OPS(double)

#undef VOXEDGE_INSTANTIATE_OPS

}  // namespace voxedge::ad
