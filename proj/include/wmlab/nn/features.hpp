#pragma once

#include "wmlab/nn/params.hpp"

namespace wmlab::nn {

// Frozen convolutional feature pyramid for the perceptual loss. Weights are
// fixed from a constant seed, so the same features are extracted for the
// whole lifetime of the artifact; the tap defaults to the third pooling
// stage.
template <typename T>
class FeatureExtractor {
 public:
  explicit FeatureExtractor(int tap_layer = 3, uint64_t seed = 0xFEA715EEDull)
      : tap_(tap_layer) {
    check(tap_ >= 1 && tap_ <= 3, "FeatureExtractor: tap layer must be 1..3");
    RandomSource rng(seed);
    c1_ = ConvSpec<T>::make(store_, rng, "f1", 3, 8, 3, 1, 1);
    c2_ = ConvSpec<T>::make(store_, rng, "f2", 8, 16, 3, 1, 1);
    c3_ = ConvSpec<T>::make(store_, rng, "f3", 16, 24, 3, 1, 1);
  }

  int tap_layer() const { return tap_; }

  // Always bound frozen; gradients flow to the input only.
  ad::Var<T> features(const ad::Var<T>& x) const {
    Binding<T> b = Binding<T>::bind(store_, false);
    auto f = ad::avgpool2(ad::leaky_relu(c1_(b, x)));
    if (tap_ == 1) return f;
    f = ad::avgpool2(ad::leaky_relu(c2_(b, f)));
    if (tap_ == 2) return f;
    return ad::avgpool2(ad::leaky_relu(c3_(b, f)));
  }

 private:
  ParamStore<T> store_;
  ConvSpec<T> c1_, c2_, c3_;
  int tap_;
};

}  // namespace wmlab::nn
