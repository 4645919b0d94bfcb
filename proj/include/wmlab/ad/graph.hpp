#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "wmlab/core/tensor.hpp"

namespace wmlab::ad {

namespace detail {
inline uint64_t next_node_id() {
  static uint64_t counter = 0;
  return ++counter;
}
}  // namespace detail

// Define-by-run reverse-mode graph. Creation order is a topological order,
// so backward just walks ids downwards. Single-threaded by design.
template <typename T>
struct Node {
  Tensor<T> val;
  Tensor<T> grad;  // allocated on first accumulation
  bool requires_grad = false;
  uint64_t id = 0;
  std::vector<std::shared_ptr<Node<T>>> parents;
  std::function<void(Node<T>&)> backprop;  // pulls this->grad into parents

  void accum_grad(const Tensor<T>& g) {
    if (grad.empty()) grad = Tensor<T>(val.n(), val.c(), val.h(), val.w());
    for (size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
  }
  Tensor<T>& grad_buf() {
    if (grad.empty()) grad = Tensor<T>(val.n(), val.c(), val.h(), val.w());
    return grad;
  }
};

template <typename T>
using Var = std::shared_ptr<Node<T>>;

template <typename T>
Var<T> leaf(Tensor<T> value, bool requires_grad = false) {
  auto n = std::make_shared<Node<T>>();
  n->val = std::move(value);
  n->requires_grad = requires_grad;
  n->id = detail::next_node_id();
  return n;
}

template <typename T>
Var<T> constant(Tensor<T> value) {
  return leaf(std::move(value), false);
}

// Value passes through, gradient does not.
template <typename T>
Var<T> stop_gradient(const Var<T>& x) {
  return leaf(x->val, false);
}

template <typename T>
Var<T> make_node(Tensor<T> value, std::vector<Var<T>> parents,
                 std::function<void(Node<T>&)> backprop) {
  auto n = std::make_shared<Node<T>>();
  n->val = std::move(value);
  n->parents = std::move(parents);
  for (const auto& p : n->parents)
    if (p->requires_grad) n->requires_grad = true;
  if (n->requires_grad) n->backprop = std::move(backprop);
  n->id = detail::next_node_id();
  return n;
}

// Backward from a scalar root. Leaves keep their accumulated grads until the
// caller consumes them; interior grads are freed as the sweep passes.
template <typename T>
void backward(const Var<T>& root) {
  check(root->val.size() == 1, "backward: root must be scalar, got " + root->val.shape_str());
  if (!root->requires_grad) return;

  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<Node<T>*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    Node<T>* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(order.begin(), order.end(),
            [](const Node<T>* a, const Node<T>* b) { return a->id > b->id; });

  root->grad_buf().fill(T(1));
  for (Node<T>* n : order) {
    if (n->backprop && !n->grad.empty()) n->backprop(*n);
    if (!n->parents.empty()) n->grad = Tensor<T>();  // interior grad no longer needed
  }
}

}  // namespace wmlab::ad
