#pragma once

#include <string>
#include <variant>
#include <vector>

#include "wmlab/nn/params.hpp"

namespace wmlab::nn {

struct ArchConfig {
  int in_ch = 3;
  int out_ch = 3;
  int base = 16;
  int blocks = 4;  // residual blocks (res16) / stack depth (convstack)
};

// Encoder-decoder with skip connections, two downsampling levels.
// Head is zero-initialized so residual-style uses start as the identity.
template <typename T>
struct SkipUNet {
  ConvSpec<T> enc0, dn1a, dn1b, dn2a, dn2b, up1a, up1b, up2a, up2b, head;

  SkipUNet() = default;
  SkipUNet(ParamStore<T>& s, RandomSource& rng, const ArchConfig& c) {
    int B = c.base;
    enc0 = ConvSpec<T>::make(s, rng, "enc0", c.in_ch, B, 3, 1, 1);
    dn1a = ConvSpec<T>::make(s, rng, "dn1a", B, 2 * B, 3, 2, 1);
    dn1b = ConvSpec<T>::make(s, rng, "dn1b", 2 * B, 2 * B, 3, 1, 1);
    dn2a = ConvSpec<T>::make(s, rng, "dn2a", 2 * B, 4 * B, 3, 2, 1);
    dn2b = ConvSpec<T>::make(s, rng, "dn2b", 4 * B, 4 * B, 3, 1, 1);
    up1a = ConvSpec<T>::make(s, rng, "up1a", 4 * B, 2 * B, 3, 1, 1);
    up1b = ConvSpec<T>::make(s, rng, "up1b", 4 * B, 2 * B, 3, 1, 1);
    up2a = ConvSpec<T>::make(s, rng, "up2a", 2 * B, B, 3, 1, 1);
    up2b = ConvSpec<T>::make(s, rng, "up2b", 2 * B, B, 3, 1, 1);
    head = ConvSpec<T>::make(s, rng, "head", B, c.out_ch, 3, 1, 1, /*zero_init=*/true);
  }

  ad::Var<T> forward(const Binding<T>& b, const ad::Var<T>& x) const {
    using namespace ad;
    auto f0 = leaky_relu(enc0(b, x));
    auto f1 = leaky_relu(dn1b(b, leaky_relu(dn1a(b, f0))));
    auto f2 = leaky_relu(dn2b(b, leaky_relu(dn2a(b, f1))));
    auto u1 = leaky_relu(up1a(b, upsample_nearest2(f2)));
    auto g1 = leaky_relu(up1b(b, concat_channels(u1, f1)));
    auto u2 = leaky_relu(up2a(b, upsample_nearest2(g1)));
    auto g0 = leaky_relu(up2b(b, concat_channels(u2, f0)));
    return head(b, g0);
  }
};

// Two-stage retrieval net: a feature stage, then a refinement stage that sees
// the input again next to the stage-one features.
template <typename T>
struct CeilNet {
  ConvSpec<T> s1a, s1b, s1c, s2a, s2b, head;
  int feat_ch = 0;

  CeilNet() = default;
  CeilNet(ParamStore<T>& s, RandomSource& rng, const ArchConfig& c) {
    int B = c.base;
    feat_ch = B;
    s1a = ConvSpec<T>::make(s, rng, "s1a", c.in_ch, B, 3, 1, 1);
    s1b = ConvSpec<T>::make(s, rng, "s1b", B, B, 3, 1, 1);
    s1c = ConvSpec<T>::make(s, rng, "s1c", B, B, 3, 1, 1);
    s2a = ConvSpec<T>::make(s, rng, "s2a", c.in_ch + B, B, 3, 1, 1);
    s2b = ConvSpec<T>::make(s, rng, "s2b", B, B, 3, 1, 1);
    head = ConvSpec<T>::make(s, rng, "head", B, c.out_ch, 3, 1, 1);
  }

  ad::Var<T> forward(const Binding<T>& b, const ad::Var<T>& x) const {
    using namespace ad;
    auto f = leaky_relu(s1c(b, leaky_relu(s1b(b, leaky_relu(s1a(b, x))))));
    auto g = leaky_relu(s2a(b, concat_channels(x, f)));
    g = leaky_relu(s2b(b, g));
    return head(b, g);
  }
};

// Patch discriminator: strided convs down to a logit map.
template <typename T>
struct PatchCritic {
  ConvSpec<T> c1, c2, head;

  PatchCritic() = default;
  PatchCritic(ParamStore<T>& s, RandomSource& rng, const ArchConfig& c) {
    int B = c.base;
    c1 = ConvSpec<T>::make(s, rng, "c1", c.in_ch, B, 3, 2, 1);
    c2 = ConvSpec<T>::make(s, rng, "c2", B, 2 * B, 3, 2, 1);
    head = ConvSpec<T>::make(s, rng, "head", 2 * B, 1, 3, 1, 1);
  }

  ad::Var<T> forward(const Binding<T>& b, const ad::Var<T>& x) const {
    using namespace ad;
    auto f = leaky_relu(c1(b, x));
    f = leaky_relu(c2(b, f));
    return head(b, f);
  }
};

// Plain stack of convolutions (the overwriting retriever).
template <typename T>
struct ConvStack {
  std::vector<ConvSpec<T>> body;
  ConvSpec<T> head;

  ConvStack() = default;
  ConvStack(ParamStore<T>& s, RandomSource& rng, const ArchConfig& c) {
    int B = c.base, in = c.in_ch;
    for (int i = 0; i < c.blocks; ++i) {
      body.push_back(ConvSpec<T>::make(s, rng, "b" + std::to_string(i), in, B, 3, 1, 1));
      in = B;
    }
    head = ConvSpec<T>::make(s, rng, "head", in, c.out_ch, 3, 1, 1);
  }

  ad::Var<T> forward(const Binding<T>& b, const ad::Var<T>& x) const {
    auto f = x;
    for (const auto& cv : body) f = ad::leaky_relu(cv(b, f));
    return head(b, f);
  }
};

// Residual conv net. Second conv of each block and the head are
// zero-initialized, so with the caller's global input skip the whole
// network starts as the identity map.
template <typename T>
struct ResNetS {
  ConvSpec<T> stem;
  std::vector<std::pair<ConvSpec<T>, ConvSpec<T>>> blocks;
  ConvSpec<T> head;

  ResNetS() = default;
  ResNetS(ParamStore<T>& s, RandomSource& rng, const ArchConfig& c) {
    int B = c.base;
    stem = ConvSpec<T>::make(s, rng, "stem", c.in_ch, B, 3, 1, 1);
    for (int i = 0; i < c.blocks; ++i) {
      auto a = ConvSpec<T>::make(s, rng, "r" + std::to_string(i) + "a", B, B, 3, 1, 1);
      auto bb = ConvSpec<T>::make(s, rng, "r" + std::to_string(i) + "b", B, B, 3, 1, 1, true);
      blocks.emplace_back(a, bb);
    }
    head = ConvSpec<T>::make(s, rng, "head", B, c.out_ch, 3, 1, 1, true);
  }

  ad::Var<T> forward(const Binding<T>& b, const ad::Var<T>& x) const {
    using namespace ad;
    auto f = leaky_relu(stem(b, x));
    for (const auto& [ca, cb] : blocks) f = add(f, cb(b, leaky_relu(ca(b, f))));
    return head(b, f);
  }
};

}  // namespace wmlab::nn
