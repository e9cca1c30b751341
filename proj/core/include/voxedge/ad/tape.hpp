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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "voxedge/ad/ndarray.hpp"

namespace voxedge::ad {

/// Named trainable array with a gradient buffer of identical shape.
/// Non-trainable parameters (batch-norm running statistics) are stored and
/// checkpointed but never updated by the optimizer.
template <typename T>
struct Parameter {
  std::string name;
  NdArray<T> value;
  NdArray<T> grad;
  bool trainable = true;
};

/// Owns parameters with stable addresses, in registration order.
template <typename T>
class ParameterStore {
 public:
  Parameter<T>& add(std::string name, NdArray<T> value, bool trainable = true) {
    if (find(name) != nullptr) throw std::invalid_argument("duplicate parameter '" + name + "'");
    auto p = std::make_unique<Parameter<T>>();
    p->name = std::move(name);
    p->grad = NdArray<T>(value.shape());
    p->value = std::move(value);
    p->trainable = trainable;
    params_.push_back(std::move(p));
    return *params_.back();
  }

  Parameter<T>* find(const std::string& name) {
    for (auto& p : params_) {
      if (p->name == name) return p.get();
    }
    return nullptr;
  }
  const Parameter<T>* find(const std::string& name) const {
    return const_cast<ParameterStore*>(this)->find(name);
  }

  Parameter<T>& at(const std::string& name) {
    auto* p = find(name);
    if (!p) throw std::out_of_range("no parameter named '" + name + "'");
    return *p;
  }

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad() {
    for (auto& p : params_) p->grad.fill(T(0));
  }

  std::size_t trainable_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) {
      if (p->trainable) n += p->value.size();
    }
    return n;
  }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
};

struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

template <typename T>
class Tape;

template <typename T>
using BackwardFn = std::function<void(Tape<T>&, const NdArray<T>& out_grad)>;

/// Reverse-mode graph. Nodes are appended in evaluation order, so the node
/// list is already topologically sorted; backward walks it once in reverse.
template <typename T>
class Tape {
 public:
  Var constant(NdArray<T> value) { return push(std::move(value), false, nullptr, {}); }

  /// Leaf that receives a gradient (inputs to a gradient check).
  Var input(NdArray<T> value) { return push(std::move(value), true, nullptr, {}); }

  /// Leaf bound to a parameter; backward adds into param.grad when the
  /// parameter is trainable.
  Var param(Parameter<T>& p) { return push(p.value, p.trainable, &p, {}); }

  Var record(NdArray<T> value, std::vector<Var> inputs, BackwardFn<T> fn) {
    bool needs = false;
    for (auto v : inputs) needs = needs || nodes_.at(v.id).requires_grad;
    return push(std::move(value), needs, nullptr, needs ? std::move(fn) : BackwardFn<T>{});
  }

  const NdArray<T>& value(Var v) const { return nodes_.at(v.id).value; }
  const Shape& shape(Var v) const { return nodes_.at(v.id).value.shape(); }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  /// Gradient buffer of v, allocated on first use. Only meaningful after
  /// backward for nodes that requires_grad.
  NdArray<T>& grad(Var v) {
    auto& n = nodes_.at(v.id);
    if (n.grad.empty()) n.grad = NdArray<T>(n.value.shape());
    return n.grad;
  }
  bool has_grad(Var v) const { return !nodes_.at(v.id).grad.empty(); }

  std::size_t size() const { return nodes_.size(); }

  /// Piecewise ops (relu masks, pooling argmax, nearest-neighbor choices,
  /// clamps and hinges) fold their branch decisions into this hash. Two
  /// evaluations with equal signatures took the same smooth piece, which
  /// lets finite-difference checks skip coordinates that cross a kink.
  void note_branch(std::uint64_t word) {
    branch_signature_ = (branch_signature_ ^ word) * 0x100000001B3ULL;
  }
  std::uint64_t branch_signature() const { return branch_signature_; }

  /// Seeds d(loss)/d(loss) = 1 and propagates. loss must hold one element.
  void backward(Var loss) {
    if (value(loss).size() != 1) {
      throw std::invalid_argument("backward: loss must be a scalar, got shape " +
                                  shape_string(value(loss).shape()));
    }
    grad(loss).fill(T(1));
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      auto& n = nodes_[i];
      if (!n.requires_grad || n.grad.empty()) continue;
      if (n.backward) n.backward(*this, n.grad);
      if (n.param != nullptr && n.param->trainable) {
        auto& g = n.param->grad;
        for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
      }
    }
  }

 private:
  struct Node {
    NdArray<T> value;
    NdArray<T> grad;
    bool requires_grad = false;
    Parameter<T>* param = nullptr;
    BackwardFn<T> backward;
  };

  Var push(NdArray<T> value, bool requires_grad, Parameter<T>* param, BackwardFn<T> fn) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.param = param;
    n.backward = std::move(fn);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
  }

  std::vector<Node> nodes_;
  std::uint64_t branch_signature_ = 0xCBF29CE484222325ULL;
};

}  // namespace voxedge::ad
