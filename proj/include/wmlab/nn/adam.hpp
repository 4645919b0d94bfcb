#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "wmlab/nn/model.hpp"

namespace wmlab::nn {

// Adaptive-moment optimizer, one instance per model.
template <typename T>
class Adam {
 public:
  explicit Adam(const ParamStore<T>& store, double lr = 1e-3, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
    st_.reserve(store.count());
    for (const auto& p : store.params)
      st_.push_back({Tensor<T>(p.value.n(), p.value.c(), p.value.h(), p.value.w()),
                     Tensor<T>(p.value.n(), p.value.c(), p.value.h(), p.value.w())});
  }

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

  // Consumes the gradients accumulated on the binding's leaves.
  void step(ParamStore<T>& store, const Binding<T>& b) {
    ++t_;
    const T c1 = static_cast<T>(1.0 / (1.0 - std::pow(b1_, t_)));
    const T c2 = static_cast<T>(1.0 / (1.0 - std::pow(b2_, t_)));
    const T lr = static_cast<T>(lr_), b1 = static_cast<T>(b1_), b2 = static_cast<T>(b2_);
    const T eps = static_cast<T>(eps_);
    for (size_t i = 0; i < store.count(); ++i) {
      const auto& g = b.leaves[i]->grad;
      if (g.empty()) continue;  // parameter not touched by this graph
      auto& m = st_[i].m;
      auto& v = st_[i].v;
      auto& p = store.params[i].value;
      for (size_t k = 0; k < p.size(); ++k) {
        m[k] = b1 * m[k] + (T(1) - b1) * g[k];
        v[k] = b2 * v[k] + (T(1) - b2) * g[k] * g[k];
        p[k] -= lr * (m[k] * c1) / (std::sqrt(v[k] * c2) + eps);
      }
    }
  }

  struct Snapshot {
    std::vector<Tensor<T>> m, v;
    int64_t t;
    double lr;
  };
  Snapshot snapshot() const {
    Snapshot s;
    s.t = t_;
    s.lr = lr_;
    for (const auto& st : st_) {
      s.m.push_back(st.m);
      s.v.push_back(st.v);
    }
    return s;
  }
  void restore(const Snapshot& s) {
    t_ = s.t;
    lr_ = s.lr;
    for (size_t i = 0; i < st_.size(); ++i) {
      st_[i].m = s.m[i];
      st_[i].v = s.v[i];
    }
  }

 private:
  struct State {
    Tensor<T> m, v;
  };
  std::vector<State> st_;
  int64_t t_ = 0;
  double lr_, b1_, b2_, eps_;
};

// Decay-on-plateau with restore: when no improvement is seen for `patience`
// steps, parameters and optimizer state roll back to the best point and the
// learning rate shrinks. Best-so-far loss is monotone by construction.
template <typename T>
class PlateauGuard {
 public:
  PlateauGuard(double factor, int patience, double min_lr = 1e-6)
      : factor_(factor), patience_(patience), min_lr_(min_lr) {}

  // Returns true when a decay-and-restore was triggered.
  template <typename SnapshotFn, typename RestoreFn, typename ScaleLrFn>
  bool observe(double loss, SnapshotFn snap, RestoreFn restore, ScaleLrFn scale_lr) {
    if (loss < best_) {
      best_ = loss;
      since_ = 0;
      snap();
      return false;
    }
    if (++since_ < patience_) return false;
    since_ = 0;
    restore();
    scale_lr(factor_);
    ++decays_;
    return true;
  }

  double best() const { return best_; }
  int decays() const { return decays_; }

 private:
  double factor_;
  int patience_;
  double min_lr_;
  double best_ = std::numeric_limits<double>::infinity();
  int since_ = 0;
  int decays_ = 0;
};

}  // namespace wmlab::nn
