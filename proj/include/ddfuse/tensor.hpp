// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense NCHW tensor with a dynamic reverse-mode gradient tape.
//
// A BasicTensor is a cheap handle onto a shared graph node. Values produced by
// operations are never modified afterwards; only leaf parameters are mutated,
// and only by the optimizer.
#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ddfuse/errors.hpp"

namespace ddfuse {

struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  [[nodiscard]] constexpr std::size_t numel() const noexcept { return n * c * h * w; }
  [[nodiscard]] constexpr std::size_t plane() const noexcept { return h * w; }

  friend constexpr bool operator==(const Shape&, const Shape&) = default;

  [[nodiscard]] std::string str() const {
    return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " + std::to_string(h) + ", " +
           std::to_string(w) + ")";
  }
};

namespace detail {

inline bool& grad_mode_flag() noexcept {
  thread_local bool enabled = true;
  return enabled;
}

template <std::floating_point T>
struct Node {
  using BackwardFn = std::function<void(Node&)>;

  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn backward;  // empty for leaves

  [[nodiscard]] bool is_leaf() const noexcept { return !backward; }

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
  }

  /// Gradient buffer of input `i`, or an empty span when that input is constant.
  std::span<T> input_grad(std::size_t i) {
    Node& in = *inputs[i];
    if (!in.requires_grad) return {};
    in.ensure_grad();
    return in.grad;
  }

  [[nodiscard]] std::span<const T> input_value(std::size_t i) const { return inputs[i]->value; }
};

}  // namespace detail

/// Whether operations currently record onto the gradient tape (per thread).
inline bool grad_enabled() noexcept { return detail::grad_mode_flag(); }

/// Disables tape recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard() noexcept : previous_(detail::grad_mode_flag()) { detail::grad_mode_flag() = false; }
  ~NoGradGuard() { detail::grad_mode_flag() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <std::floating_point T>
class BasicTensor {
 public:
  using value_type = T;
  using NodeType = detail::Node<T>;
  using NodePtr = std::shared_ptr<NodeType>;
  using BackwardFn = typename NodeType::BackwardFn;

  BasicTensor() = default;

  static BasicTensor zeros(Shape shape, bool requires_grad = false) {
    return full(shape, T(0), requires_grad);
  }

  static BasicTensor full(Shape shape, T fill, bool requires_grad = false) {
    return from_vector(shape, std::vector<T>(shape.numel(), fill), requires_grad);
  }

  static BasicTensor from_vector(Shape shape, std::vector<T> values, bool requires_grad = false) {
    if (values.size() != shape.numel()) {
      throw ShapeError("tensor data length " + std::to_string(values.size()) +
                       " does not match shape " + shape.str());
    }
    auto node = std::make_shared<NodeType>();
    node->shape = shape;
    node->value = std::move(values);
    node->requires_grad = requires_grad;
    return BasicTensor(std::move(node));
  }

  static BasicTensor scalar(T v, bool requires_grad = false) {
    return from_vector({1, 1, 1, 1}, {v}, requires_grad);
  }

  /// Builds the output of a differentiable operation. The backward closure is
  /// kept only when recording is enabled and some input requires a gradient.
  static BasicTensor make_result(Shape shape, std::vector<T> values,
                                 std::initializer_list<const BasicTensor*> inputs,
                                 BackwardFn backward) {
    auto node = std::make_shared<NodeType>();
    node->shape = shape;
    node->value = std::move(values);
    const bool needs =
        grad_enabled() && std::any_of(inputs.begin(), inputs.end(),
                                      [](const BasicTensor* t) { return t->requires_grad(); });
    if (needs) {
      node->requires_grad = true;
      node->inputs.reserve(inputs.size());
      for (const BasicTensor* t : inputs) node->inputs.push_back(t->node_);
      node->backward = std::move(backward);
    }
    return BasicTensor(std::move(node));
  }

  [[nodiscard]] bool defined() const noexcept { return node_ != nullptr; }
  [[nodiscard]] const Shape& shape() const { return node_->shape; }
  [[nodiscard]] std::size_t numel() const { return node_->value.size(); }
  [[nodiscard]] bool requires_grad() const { return node_ && node_->requires_grad; }
  [[nodiscard]] bool is_leaf() const { return node_->is_leaf(); }

  [[nodiscard]] std::span<const T> data() const { return node_->value; }

  /// Writable view of a leaf's values; used by optimizers and loaders.
  [[nodiscard]] std::span<T> mutable_data() {
    if (!node_->is_leaf()) throw ContractError("only leaf tensors may be mutated in place");
    return node_->value;
  }

  /// Accumulated gradient; empty until a backward pass reaches this tensor.
  [[nodiscard]] std::span<const T> grad() const { return node_->grad; }
  [[nodiscard]] std::span<T> mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  [[nodiscard]] bool has_grad() const { return node_->grad.size() == node_->value.size(); }

  void zero_grad() {
    if (has_grad()) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
  }

  [[nodiscard]] T item() const {
    if (numel() != 1) throw ContractError("item() on non-scalar tensor of shape " + shape().str());
    return node_->value[0];
  }

  [[nodiscard]] T at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    const Shape& s = shape();
    return node_->value[((n * s.c + c) * s.h + h) * s.w + w];
  }

  /// Copy of the values with no tape history.
  [[nodiscard]] BasicTensor detach() const { return from_vector(shape(), node_->value, false); }

  /// Deep copy, keeping the requires_grad flag but no history or gradient.
  [[nodiscard]] BasicTensor clone() const {
    return from_vector(shape(), node_->value, requires_grad());
  }

  [[nodiscard]] bool same_node(const BasicTensor& other) const noexcept {
    return node_ == other.node_;
  }

  /// Reverse-mode pass from this scalar. Leaf gradients accumulate across calls.
  void backward() const {
    if (!defined() || numel() != 1) {
      throw ContractError("backward() requires a scalar loss, got shape " +
                          (defined() ? shape().str() : std::string("<undefined>")));
    }
    if (!node_->requires_grad) return;

    std::vector<NodeType*> order;
    {
      std::unordered_set<NodeType*> visited;
      std::vector<std::pair<NodeType*, std::size_t>> stack;
      stack.emplace_back(node_.get(), 0);
      visited.insert(node_.get());
      while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
          NodeType* child = node->inputs[next++].get();
          if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
        } else {
          order.push_back(node);
          stack.pop_back();
        }
      }
    }

    for (NodeType* n : order) {
      if (!n->is_leaf()) n->grad.assign(n->value.size(), T(0));
    }
    node_->ensure_grad();
    node_->grad[0] += T(1);

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      NodeType* n = *it;
      if (n->is_leaf()) continue;
      n->backward(*n);
      std::vector<T>().swap(n->grad);
    }
  }

  [[nodiscard]] const NodePtr& node() const noexcept { return node_; }

 private:
  explicit BasicTensor(NodePtr node) : node_(std::move(node)) {}

  NodePtr node_;
};

using Tensor = BasicTensor<float>;

template <std::floating_point T>
bool all_finite(const BasicTensor<T>& t) {
  return std::all_of(t.data().begin(), t.data().end(), [](T v) { return std::isfinite(v); });
}

}  // namespace ddfuse
