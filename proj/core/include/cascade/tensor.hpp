// Copyright 2026 The Cascade Authors
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

#include <functional>
#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "cascade/common.hpp"

namespace cascade {

// Dense row-major tensor plus a define-by-run reverse-mode tape.
//
// Values live on graph nodes; gradients do not. A backward() call returns a
// GradMap keyed by node, so parameter nodes can be shared read-only across
// concurrently evaluated graphs and each evaluation owns its own gradient
// buffers. The training step merges per-item maps in a fixed order.

template <class S>
class GradMap;

template <class S>
struct Node {
  std::vector<int> shape;
  std::vector<S> value;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node<S>>> parents;
  // Receives d(loss)/d(this) and accumulates into the parents' entries.
  std::function<void(const std::vector<S>&, GradMap<S>&)> backprop;

  size_t numel() const { return value.size(); }
};

template <class S>
using NodePtr = std::shared_ptr<Node<S>>;

template <class S>
class GradMap {
 public:
  // Returns the gradient buffer for `n`, zero-initialized on first access.
  std::vector<S>& get(const Node<S>* n) {
    auto it = m_.find(n);
    if (it == m_.end()) {
      it = m_.emplace(n, std::vector<S>(n->numel(), S(0))).first;
    }
    return it->second;
  }

  const std::vector<S>* find(const Node<S>* n) const {
    auto it = m_.find(n);
    return it == m_.end() ? nullptr : &it->second;
  }

  bool contains(const Node<S>* n) const { return m_.count(n) != 0; }

 private:
  std::unordered_map<const Node<S>*, std::vector<S>> m_;
};

template <class S>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape) {
    return from(std::move(shape), {}, false);
  }

  static Tensor full(std::vector<int> shape, S v) {
    auto t = zeros(std::move(shape));
    for (auto& x : t.n_->value) x = v;
    return t;
  }

  static Tensor scalar_of(S v) { return full({1}, v); }

  // Plain value (no gradient tracking).
  static Tensor from(std::vector<int> shape, std::vector<S> data,
                     bool check = true) {
    auto n = std::make_shared<Node<S>>();
    size_t numel = 1;
    for (int d : shape) {
      if (d < 0) throw ShapeError("negative dimension in shape " + shape_str(shape));
      numel *= static_cast<size_t>(d);
    }
    if (check && !data.empty() && data.size() != numel) {
      throw ShapeError("data length " + std::to_string(data.size()) +
                       " does not match shape " + shape_str(shape));
    }
    n->shape = std::move(shape);
    n->value = data.empty() ? std::vector<S>(numel, S(0)) : std::move(data);
    if (n->value.size() != numel) n->value.resize(numel, S(0));
    return Tensor(std::move(n));
  }

  // Trainable leaf.
  static Tensor param(std::vector<int> shape, std::vector<S> data = {}) {
    auto t = from(std::move(shape), std::move(data));
    t.n_->requires_grad = true;
    return t;
  }

  static Tensor uniform_param(std::vector<int> shape, Rng& rng, double lo,
                              double hi) {
    auto t = param(std::move(shape));
    for (auto& x : t.n_->value) x = static_cast<S>(rng.uniform(lo, hi));
    return t;
  }

  bool defined() const { return n_ != nullptr; }
  const std::vector<int>& shape() const { return n_->shape; }
  int dim(int i) const { return n_->shape.at(static_cast<size_t>(i)); }
  int rank() const { return static_cast<int>(n_->shape.size()); }
  size_t numel() const { return n_->numel(); }
  bool requires_grad() const { return n_ && n_->requires_grad; }

  const std::vector<S>& data() const { return n_->value; }
  // Mutation is reserved for leaves (parameter updates, input buffers);
  // rewriting an interior node would desynchronize the tape.
  std::vector<S>& mutable_data() {
    if (n_->backprop) throw StateError("cannot mutate a non-leaf tensor");
    return n_->value;
  }

  S scalar() const {
    if (numel() != 1) {
      throw ShapeError("scalar() on tensor of shape " + shape_str(shape()));
    }
    return n_->value[0];
  }

  const NodePtr<S>& node() const { return n_; }

  explicit Tensor(NodePtr<S> n) : n_(std::move(n)) {}

 private:
  NodePtr<S> n_;
};

// Builds an op result node. `backprop` may be empty for inference-only paths.
template <class S>
Tensor<S> make_op(
    std::vector<int> shape, std::vector<S> value,
    std::vector<NodePtr<S>> parents,
    std::function<void(const std::vector<S>&, GradMap<S>&)> backprop) {
  auto n = std::make_shared<Node<S>>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  bool rg = false;
  for (const auto& p : parents) rg = rg || p->requires_grad;
  n->requires_grad = rg;
  if (rg) {
    n->parents = std::move(parents);
    n->backprop = std::move(backprop);
  }
  return Tensor<S>(std::move(n));
}

// Reverse-mode sweep from a scalar root. Returns gradients for every node
// that received one; look up parameters by node pointer.
template <class S>
GradMap<S> backward(const Tensor<S>& root, S seed = S(1)) {
  if (root.numel() != 1) {
    throw ShapeError("backward() root must be scalar, got shape " +
                     shape_str(root.shape()));
  }
  GradMap<S> gm;
  Node<S>* root_node = root.node().get();
  gm.get(root_node)[0] = seed;
  if (!root_node->requires_grad) return gm;

  // Iterative post-order topological sort over the requires_grad subgraph.
  std::vector<Node<S>*> order;
  std::unordered_set<Node<S>*> visited;
  std::vector<std::pair<Node<S>*, size_t>> stack;
  stack.emplace_back(root_node, 0);
  visited.insert(root_node);
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node<S>* p = node->parents[idx++].get();
      if (p->requires_grad && visited.insert(p).second) {
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<S>* n = *it;
    if (!n->backprop) continue;
    const std::vector<S>* g = gm.find(n);
    if (!g) continue;
    n->backprop(*g, gm);
  }
  return gm;
}

}  // namespace cascade
