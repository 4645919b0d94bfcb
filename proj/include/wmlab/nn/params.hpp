#pragma once

#include <string>
#include <vector>

#include "wmlab/ad/graph.hpp"
#include "wmlab/ad/ops.hpp"
#include "wmlab/core/rng.hpp"

namespace wmlab::nn {

template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
};

template <typename T>
struct ParamStore {
  std::vector<Param<T>> params;

  size_t add(std::string name, Tensor<T> t) {
    params.push_back({std::move(name), std::move(t)});
    return params.size() - 1;
  }
  size_t count() const { return params.size(); }
  size_t scalar_count() const {
    size_t n = 0;
    for (const auto& p : params) n += p.value.size();
    return n;
  }
};

// Fresh graph leaves over the store's current values, one per step.
template <typename T>
struct Binding {
  std::vector<ad::Var<T>> leaves;
  bool trainable = false;

  static Binding bind(const ParamStore<T>& store, bool trainable) {
    Binding b;
    b.trainable = trainable;
    b.leaves.reserve(store.params.size());
    for (const auto& p : store.params) b.leaves.push_back(ad::leaf(p.value, trainable));
    return b;
  }
};

template <typename T>
Tensor<T> he_normal(RandomSource& rng, int out_c, int in_c, int k) {
  Tensor<T> t(out_c, in_c, k, k);
  double std = std::sqrt(2.0 / (static_cast<double>(in_c) * k * k));
  for (size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.normal(0.0, std));
  return t;
}

// Convolution layer descriptor; parameters live in the owning store.
template <typename T>
struct ConvSpec {
  size_t w_idx = 0, b_idx = 0;
  int stride = 1, pad = 1;

  static ConvSpec make(ParamStore<T>& s, RandomSource& rng, const std::string& name, int in_c,
                       int out_c, int k, int stride, int pad, bool zero_init = false) {
    ConvSpec c;
    c.stride = stride;
    c.pad = pad;
    Tensor<T> w = zero_init ? Tensor<T>(out_c, in_c, k, k) : he_normal<T>(rng, out_c, in_c, k);
    c.w_idx = s.add(name + ".w", std::move(w));
    c.b_idx = s.add(name + ".b", Tensor<T>(1, out_c, 1, 1));
    return c;
  }

  ad::Var<T> operator()(const Binding<T>& b, const ad::Var<T>& x) const {
    return ad::conv2d(x, b.leaves[w_idx], b.leaves[b_idx], stride, pad);
  }
};

}  // namespace wmlab::nn
