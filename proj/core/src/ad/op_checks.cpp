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

#include "voxedge/ad/op_checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include "voxedge/ad/ops.hpp"
#include "voxedge/rng.hpp"

namespace voxedge::ad {

namespace {

using D = double;

NdArray<D> random_array(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  NdArray<D> a(std::move(shape));
  for (auto& v : a.storage()) v = rng.uniform(lo, hi);
  return a;
}

// Values bounded away from zero so relu and hinge kinks stay out of reach of
// the finite-difference step.
NdArray<D> away_from_zero(Rng& rng, Shape shape) {
  NdArray<D> a(std::move(shape));
  for (auto& v : a.storage()) {
    const double m = rng.uniform(0.1, 1.0);
    v = rng.uniform() < 0.5 ? -m : m;
  }
  return a;
}

// Sum of y weighted by fixed random coefficients.
Var fold(Tape<D>& t, Var y, std::uint64_t seed) {
  Rng rng(seed);
  NdArray<D> w(t.shape(y));
  for (auto& v : w.storage()) v = rng.uniform(0.5, 1.5);
  return reduce_sum(t, mul(t, y, t.constant(std::move(w))));
}

std::size_t draw(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); }

struct Case {
  std::vector<NdArray<D>> inputs;
  TapeFn fn;
};

using Builder = std::function<Case(Rng&)>;

struct Entry {
  std::string name;
  Builder build;
};

std::vector<Entry> registry() {
  std::vector<Entry> r;
  auto binary = [&r](std::string name, Var (*op)(Tape<D>&, Var, Var)) {
    r.push_back({std::move(name), [op](Rng& rng) {
                   const Shape s{draw(rng, 1, 4), draw(rng, 1, 5)};
                   const std::uint64_t k = rng.next_u64();
                   return Case{{random_array(rng, s), random_array(rng, s)},
                               [op, k](Tape<D>& t, std::span<const Var> v) { return fold(t, op(t, v[0], v[1]), k); }};
                 }});
  };
  auto unary = [&r](std::string name, Var (*op)(Tape<D>&, Var), bool kinked) {
    r.push_back({std::move(name), [op, kinked](Rng& rng) {
                   const Shape s{draw(rng, 1, 3), draw(rng, 1, 4), draw(rng, 1, 3)};
                   const std::uint64_t k = rng.next_u64();
                   auto x = kinked ? away_from_zero(rng, s) : random_array(rng, s, -3.0, 3.0);
                   return Case{{std::move(x)},
                               [op, k](Tape<D>& t, std::span<const Var> v) { return fold(t, op(t, v[0]), k); }};
                 }});
  };
  binary("add", add<D>);
  binary("sub", sub<D>);
  binary("mul", mul<D>);
  unary("relu", relu<D>, true);
  unary("sigmoid", sigmoid<D>, false);
  unary("tanh", tanh<D>, false);
  unary("softplus", softplus<D>, false);
  r.push_back({"scale", [](Rng& rng) {
                 const double s = rng.uniform(-2.0, 2.0);
                 const auto k = rng.next_u64();
                 return Case{{random_array(rng, {draw(rng, 1, 6)})},
                             [s, k](Tape<D>& t, std::span<const Var> v) { return fold(t, scale(t, v[0], s), k); }};
               }});
  r.push_back({"add_scalar", [](Rng& rng) {
                 const double s = rng.uniform(-2.0, 2.0);
                 const auto k = rng.next_u64();
                 return Case{{random_array(rng, {draw(rng, 1, 6)})},
                             [s, k](Tape<D>& t, std::span<const Var> v) { return fold(t, add_scalar(t, v[0], s), k); }};
               }});
  r.push_back({"reshape", [](Rng& rng) {
                 const std::size_t a = draw(rng, 1, 4), b = draw(rng, 1, 4);
                 const auto k = rng.next_u64();
                 return Case{{random_array(rng, {a, b})}, [a, b, k](Tape<D>& t, std::span<const Var> v) {
                               return fold(t, reshape(t, v[0], Shape{b, a}), k);
                             }};
               }});
  r.push_back({"reduce_sum", [](Rng& rng) {
                 return Case{{random_array(rng, {draw(rng, 1, 4), draw(rng, 1, 4)})},
                             [](Tape<D>& t, std::span<const Var> v) {
                               Var s = reduce_sum(t, v[0]);
                               return mul(t, s, s);
                             }};
               }});
  r.push_back({"reduce_mean", [](Rng& rng) {
                 return Case{{random_array(rng, {draw(rng, 1, 4), draw(rng, 1, 4)})},
                             [](Tape<D>& t, std::span<const Var> v) {
                               Var s = reduce_mean(t, v[0]);
                               return mul(t, s, s);
                             }};
               }});
  r.push_back({"concat", [](Rng& rng) {
                 const std::size_t c = draw(rng, 1, 3);
                 const auto k = rng.next_u64();
                 return Case{{random_array(rng, {draw(rng, 1, 3), c}), random_array(rng, {draw(rng, 1, 3), c})},
                             [k](Tape<D>& t, std::span<const Var> v) {
                               return fold(t, concat(t, std::vector<Var>{v[0], v[1]}), k);
                             }};
               }});
  r.push_back({"slice", [](Rng& rng) {
                 const std::size_t n = draw(rng, 2, 6);
                 const std::size_t b = rng.below(n - 1);
                 const std::size_t e = b + 1 + rng.below(n - b - 1);
                 const auto k = rng.next_u64();
                 return Case{{random_array(rng, {n, draw(rng, 1, 3)})}, [b, e, k](Tape<D>& t, std::span<const Var> v) {
                               return fold(t, slice(t, v[0], b, e), k);
                             }};
               }});
  r.push_back({"linear", [](Rng& rng) {
                 const std::size_t n = draw(rng, 1, 4), in = draw(rng, 1, 5), out = draw(rng, 1, 4);
                 const auto k = rng.next_u64();
                 return Case{{random_array(rng, {n, in}), random_array(rng, {out, in}), random_array(rng, {out})},
                             [k](Tape<D>& t, std::span<const Var> v) { return fold(t, linear(t, v[0], v[1], v[2]), k); }};
               }});
  r.push_back({"pointwise", [](Rng& rng) {
                 const std::size_t c = draw(rng, 1, 4), o = draw(rng, 1, 4), s = draw(rng, 1, 3);
                 const auto k = rng.next_u64();
                 return Case{{random_array(rng, {c, s, s, s}), random_array(rng, {o, c}), random_array(rng, {o})},
                             [k](Tape<D>& t, std::span<const Var> v) { return fold(t, pointwise(t, v[0], v[1], v[2]), k); }};
               }});
  r.push_back({"conv3d", [](Rng& rng) {
                 const std::size_t ci = draw(rng, 1, 3), co = draw(rng, 1, 3);
                 const std::size_t kk = draw(rng, 1, 3);
                 ConvOptions opt{draw(rng, 1, 2), rng.below(kk + 1), draw(rng, 1, 2)};
                 const std::size_t span = opt.dilation * (kk - 1) + 1;
                 const std::size_t s = std::max<std::size_t>(span, draw(rng, 2, 5));
                 const auto k = rng.next_u64();
                 return Case{{random_array(rng, {ci, s, s, s}), random_array(rng, {co, ci, kk, kk, kk}),
                              random_array(rng, {co})},
                             [opt, k](Tape<D>& t, std::span<const Var> v) {
                               return fold(t, conv3d(t, v[0], v[1], v[2], opt), k);
                             }};
               }});
  r.push_back({"tconv3d", [](Rng& rng) {
                 const std::size_t ci = draw(rng, 1, 3), co = draw(rng, 1, 3), s = draw(rng, 1, 3);
                 const std::size_t kk = draw(rng, 2, 4);
                 const ConvOptions opt{draw(rng, 1, 2), rng.below((kk - 1) / 2 + 1), 1};
                 const auto k = rng.next_u64();
                 return Case{{random_array(rng, {ci, s, s, s}), random_array(rng, {ci, co, kk, kk, kk}),
                              random_array(rng, {co})},
                             [opt, k](Tape<D>& t, std::span<const Var> v) {
                               return fold(t, tconv3d(t, v[0], v[1], v[2], opt), k);
                             }};
               }});
  r.push_back({"max_pool3d", [](Rng& rng) {
                 const std::size_t c = draw(rng, 1, 3), s = 2 * draw(rng, 1, 2);
                 // A shuffled ladder with spacing 0.05 keeps every window's
                 // maximum unique.
                 NdArray<D> x(Shape{c, s, s, s});
                 for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.05 * static_cast<double>(i);
                 auto& st = x.storage();
                 for (std::size_t i = st.size(); i > 1; --i) std::swap(st[i - 1], st[rng.below(i)]);
                 const auto k = rng.next_u64();
                 return Case{{std::move(x)}, [k](Tape<D>& t, std::span<const Var> v) { return fold(t, max_pool3d(t, v[0]), k); }};
               }});
  r.push_back({"instance_norm", [](Rng& rng) {
                 const std::size_t c = draw(rng, 1, 3), s = draw(rng, 2, 3);
                 const auto k = rng.next_u64();
                 return Case{{random_array(rng, {c, s, s, s}), random_array(rng, {c}, 0.5, 1.5), random_array(rng, {c})},
                             [k](Tape<D>& t, std::span<const Var> v) {
                               return fold(t, instance_norm(t, v[0], v[1], v[2]), k);
                             }};
               }});
  for (bool training : {true, false}) {
    r.push_back({training ? "batch_norm(train)" : "batch_norm(eval)", [training](Rng& rng) {
                   const std::size_t c = draw(rng, 1, 3), n = draw(rng, 3, 8);
                   const auto k = rng.next_u64();
                   auto mean = std::make_shared<Parameter<D>>(Parameter<D>{"rm", random_array(rng, {c}), {}, false});
                   auto var = std::make_shared<Parameter<D>>(Parameter<D>{"rv", random_array(rng, {c}, 0.5, 2.0), {}, false});
                   return Case{{random_array(rng, {c, n}), random_array(rng, {c}, 0.5, 1.5), random_array(rng, {c})},
                               [k, mean, var, training](Tape<D>& t, std::span<const Var> v) {
                                 BatchNormState<D> st{mean.get(), var.get(), 0.9};
                                 return fold(t, batch_norm(t, v[0], v[1], v[2], st, training), k);
                               }};
                 }});
  }
  r.push_back({"adain_modulate", [](Rng& rng) {
                 const std::size_t c = draw(rng, 1, 3), s = draw(rng, 2, 3);
                 const auto k = rng.next_u64();
                 return Case{{random_array(rng, {c, s, s, s}), random_array(rng, {c}), random_array(rng, {c}, 0.5, 1.5)},
                             [k](Tape<D>& t, std::span<const Var> v) {
                               return fold(t, adain_modulate(t, v[0], v[1], v[2]), k);
                             }};
               }});
  r.push_back({"adain", [](Rng& rng) {
                 const std::size_t c = draw(rng, 1, 3), s = draw(rng, 2, 3), z = draw(rng, 1, 5);
                 const auto k = rng.next_u64();
                 return Case{{random_array(rng, {c, s, s, s}), random_array(rng, {z}), random_array(rng, {2 * c, z}),
                              random_array(rng, {2 * c})},
                             [k](Tape<D>& t, std::span<const Var> v) {
                               return fold(t, adain(t, v[0], v[1], v[2], v[3]), k);
                             }};
               }});
  r.push_back({"gather_columns", [](Rng& rng) {
                 const std::size_t c = draw(rng, 1, 3), s = draw(rng, 2, 6), m = draw(rng, 1, 8);
                 std::vector<std::uint32_t> idx(m);
                 for (auto& i : idx) i = static_cast<std::uint32_t>(rng.below(s));
                 const auto k = rng.next_u64();
                 return Case{{random_array(rng, {c, s})}, [idx, k](Tape<D>& t, std::span<const Var> v) {
                               return fold(t, gather_columns(t, v[0], idx), k);
                             }};
               }});
  r.push_back({"aggregate_mean", [](Rng& rng) {
                 const std::size_t c = draw(rng, 1, 3), n = draw(rng, 1, 12), res = 2;
                 std::vector<std::uint32_t> cells(n);
                 for (auto& i : cells) i = static_cast<std::uint32_t>(rng.below(res * res * res));
                 const auto k = rng.next_u64();
                 return Case{{random_array(rng, {c, n})}, [cells, k](Tape<D>& t, std::span<const Var> v) {
                               return fold(t, aggregate_mean(t, v[0], cells, 2), k);
                             }};
               }});
  r.push_back({"masked_softmax", [](Rng& rng) {
                 const std::size_t n = draw(rng, 2, 10);
                 std::vector<std::uint8_t> mask(n);
                 for (auto& m : mask) m = rng.uniform() < 0.6;
                 mask[rng.below(n)] = 1;
                 const auto k = rng.next_u64();
                 return Case{{random_array(rng, {n}, -2.0, 2.0)}, [mask, k](Tape<D>& t, std::span<const Var> v) {
                               return fold(t, masked_softmax(t, v[0], mask), k);
                             }};
               }});
  r.push_back({"bce", [](Rng& rng) {
                 const std::size_t n = draw(rng, 1, 10);
                 auto tgt = std::make_shared<std::vector<D>>(n);
                 for (auto& v : *tgt) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
                 return Case{{random_array(rng, {n}, 0.05, 0.95)}, [tgt](Tape<D>& t, std::span<const Var> v) {
                               return bce(t, v[0], std::span<const D>(*tgt));
                             }};
               }});
  r.push_back({"mse", [](Rng& rng) {
                 const std::size_t n = draw(rng, 1, 10);
                 auto tgt = std::make_shared<std::vector<D>>(n);
                 for (auto& v : *tgt) v = rng.uniform();
                 return Case{{random_array(rng, {n})}, [tgt](Tape<D>& t, std::span<const Var> v) {
                               return mse(t, v[0], std::span<const D>(*tgt));
                             }};
               }});
  auto cloud_loss = [&r](std::string name, Var (*op)(Tape<D>&, Var, std::span<const D>)) {
    r.push_back({std::move(name), [op](Rng& rng) {
                   const std::size_t n = draw(rng, 2, 12), m = draw(rng, 2, 12);
                   auto q = std::make_shared<std::vector<D>>(3 * m);
                   for (auto& v : *q) v = rng.uniform();
                   return Case{{random_array(rng, {3, n}, 0.0, 1.0)}, [op, q](Tape<D>& t, std::span<const Var> v) {
                                 return op(t, v[0], std::span<const D>(*q));
                               }};
                 }});
  };
  cloud_loss("chamfer", chamfer<D>);
  cloud_loss("chamfer_sharp", chamfer_sharp<D>);
  r.push_back({"locality", [](Rng& rng) {
                 const std::size_t n = draw(rng, 2, 10), res = 4;
                 const double w = 1.0 / res;
                 auto centers = std::make_shared<std::vector<D>>(3 * n);
                 for (auto& v : *centers) v = rng.uniform();
                 // Per-axis offsets of 0.1 to 0.5 or 2.2 to 3 cell widths put
                 // every point clearly inside or outside the sqrt(3) hinge.
                 NdArray<D> p(Shape{3, n});
                 for (std::size_t i = 0; i < n; ++i) {
                   const bool outside = rng.uniform() < 0.5;
                   for (std::size_t d = 0; d < 3; ++d) {
                     const double mag = outside ? rng.uniform(2.2, 3.0) : rng.uniform(0.1, 0.5);
                     p[d * n + i] = (*centers)[d * n + i] + (rng.uniform() < 0.5 ? -mag : mag) * w;
                   }
                 }
                 return Case{{std::move(p)}, [centers](Tape<D>& t, std::span<const Var> v) {
                               return locality(t, v[0], std::span<const D>(*centers), 4);
                             }};
               }});
  return r;
}

}  // namespace

std::vector<OpCheckReport> check_all_ops(std::uint64_t seed, std::size_t instances) {
  std::vector<OpCheckReport> out;
  const auto entries = registry();
  for (std::size_t e = 0; e < entries.size(); ++e) {
    OpCheckReport rep;
    rep.op = entries[e].name;
    Rng rng(seed * 1000003ULL + e);
    for (std::size_t i = 0; i < instances; ++i) {
      const Case c = entries[e].build(rng);
      std::string shapes;
      for (const auto& in : c.inputs) shapes += (shapes.empty() ? "" : " ") + shape_string(in.shape());
      rep.shapes.push_back(shapes);
      const auto res = grad_check(c.fn, c.inputs);
      rep.max_rel_error = std::max(rep.max_rel_error, res.max_rel_error);
      rep.coordinates += res.coordinates;
    }
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace voxedge::ad
