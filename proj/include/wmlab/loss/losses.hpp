#pragma once

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wmlab/nn/features.hpp"
#include "wmlab/nn/model.hpp"

namespace wmlab {

// Weight parameters across every objective. Defaults: everything 1 except
// the adversarial weight at 0.01.
struct LossWeights {
  double mse = 1.0;
  double vgg = 1.0;
  double freq = 1.0;
  double adv = 0.01;
  double wm = 1.0;
  double clean = 1.0;
  double cst = 1.0;
  double ow = 1.0;   // overwriting adversarial term
  double def = 1.0;  // defense adversarial term

  std::string to_string() const {
    std::ostringstream os;
    os << "mse=" << mse << " vgg=" << vgg << " freq=" << freq << " adv=" << adv << " wm=" << wm
       << " clean=" << clean << " cst=" << cst << " ow=" << ow << " def=" << def;
    return os.str();
  }
};

enum class Stage { baseline, baseline_adv, overwriter, defense_init, defense_adv };

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::baseline: return "baseline";
    case Stage::baseline_adv: return "baseline_adv";
    case Stage::overwriter: return "overwriter";
    case Stage::defense_init: return "defense_init";
    case Stage::defense_adv: return "defense_adv";
  }
  return "?";
}

inline double term_weight(const std::string& term, const LossWeights& w) {
  auto ends_with = [&](const char* suf) {
    std::string s(suf);
    return term.size() >= s.size() && term.compare(term.size() - s.size(), s.size(), s) == 0;
  };
  if (ends_with("_mse")) return w.mse;
  if (ends_with("_vgg")) return w.vgg;
  if (ends_with("_freq")) return w.freq;
  if (term == "l_adv") return w.adv;
  if (term == "l_wm") return w.wm;
  if (term == "l_clean") return w.clean;
  if (term == "l_cst") return w.cst;
  if (term == "l_ow") return w.ow;
  if (term == "l_def") return w.def;
  if (term == "l_disc") return 1.0;
  throw std::runtime_error("term_weight: unknown loss term '" + term + "'");
}

// Every term value plus the weighted total; total recomposes exactly from
// the recorded entries.
struct LossReport {
  std::string stage;
  std::vector<std::pair<std::string, double>> terms;  // raw (unweighted) values
  LossWeights weights;
  double total = 0;

  double recompose() const {
    double s = 0;
    for (const auto& [k, v] : terms) s += term_weight(k, weights) * v;
    return s;
  }

  std::string log_line(int64_t step) const {
    std::ostringstream os;
    os << stage << "," << step;
    for (const auto& [k, v] : terms) os << "," << k << "=" << v;
    os << ",total=" << total;
    return os.str();
  }
};

inline const std::set<std::string>& stage_required_terms(Stage s) {
  static const std::map<Stage, std::set<std::string>> req = {
      {Stage::baseline, {"l_mse", "l_vgg", "l_adv", "l_wm", "l_clean", "l_cst"}},
      {Stage::baseline_adv, {"l_wm", "l_clean", "l_cst"}},
      {Stage::overwriter,
       {"u_emb_mse", "u_emb_vgg", "u_emb_freq", "u_ret_mse", "u_ret_vgg", "u_ret_freq"}},
      {Stage::defense_init,
       {"u_emb_mse", "u_emb_vgg", "u_emb_freq", "u_ret_mse", "u_ret_vgg", "u_ret_freq", "l_ow",
        "l_mse", "l_vgg", "l_freq", "l_adv", "l_wm", "l_clean", "l_cst", "l_disc", "l_def"}},
      {Stage::defense_adv, {"l_wm", "l_clean", "l_cst", "l_def"}}};
  return req.at(s);
}

// Weighted composition for one training stage. Extra terms are carried
// through; missing required terms are an error naming the term.
inline LossReport compose_stage_loss(Stage stage,
                                     const std::vector<std::pair<std::string, double>>& terms,
                                     const LossWeights& w = {}) {
  for (const auto& need : stage_required_terms(stage)) {
    bool found = false;
    for (const auto& [k, v] : terms)
      if (k == need) found = true;
    if (!found)
      throw std::runtime_error(std::string("compose_stage_loss: stage ") + stage_name(stage) +
                               " is missing required term '" + need + "'");
  }
  LossReport r;
  r.stage = stage_name(stage);
  r.terms = terms;
  r.weights = w;
  r.total = r.recompose();
  return r;
}

// ---------------------------------------------------------------------------
// graph-level loss terms

namespace loss {

using ad::Var;

template <typename T>
Var<T> pixel_mse(const Var<T>& x, const Var<T>& y) {
  check(x->val.same_shape(y->val),
        "pixel_mse: shape mismatch " + x->val.shape_str() + " vs " + y->val.shape_str());
  return ad::mse(x, y);
}

template <typename T>
Var<T> perceptual(const nn::FeatureExtractor<T>& fx, const Var<T>& x, const Var<T>& y) {
  check(x->val.same_shape(y->val), "perceptual_loss: shape mismatch");
  return ad::mse(fx.features(x), fx.features(y));
}

// Focal frequency loss: squared spectral distance, weighted per frequency by
// its own normalized error magnitude (alpha = 1). The weight is part of the
// function, so gradients see it too.
template <typename T>
Var<T> focal_frequency(const Var<T>& x, const Var<T>& y) {
  check(x->val.same_shape(y->val), "focal_frequency_loss: shape mismatch");
  using namespace ad;
  const int C = x->val.c();
  auto d = sub(dft2d(x), dft2d(y));
  auto dre = slice_channels(d, 0, C);
  auto dim = slice_channels(d, C, C);
  auto mag2 = add(square(dre), square(dim));
  auto mag = sqrt_val(affine(mag2, T(1), T(1e-24)));
  auto peak = affine(max_per_plane(mag), T(1), T(1e-24));
  auto wgt = mul_per_plane(mag, reciprocal(peak));
  return mean_all(mul(wgt, mag2));
}

constexpr double kLogEps = 1e-7;

// Discriminator convention: D(x) = sigmoid(logits) is the probability that x
// is a clean cover. Mean two-class log loss; 0.5 everywhere gives ln 2.
template <typename T>
Var<T> discriminator(const Var<T>& cover_logits, const Var<T>& container_logits) {
  using namespace ad;
  auto real_term = scale(mean_all(log_clamped(sigmoid(cover_logits), T(kLogEps))), T(-1));
  auto fake_term = scale(
      mean_all(log_clamped(affine(sigmoid(container_logits), T(-1), T(1)), T(kLogEps))), T(-1));
  return scale(add(real_term, fake_term), T(0.5));
}

// Embedder side: push containers toward the cover class.
template <typename T>
Var<T> adversarial_embed(const Var<T>& container_logits) {
  using namespace ad;
  return scale(mean_all(log_clamped(sigmoid(container_logits), T(kLogEps))), T(-1));
}

// Broadcast one (1,C,H,W) target across a batch.
template <typename T>
Var<T> tile_to(const Var<T>& single, const Var<T>& like) {
  const auto& s = single->val;
  const auto& l = like->val;
  check(s.n() == 1 && s.c() == l.c() && s.h() == l.h() && s.w() == l.w(),
        "tile_to: incompatible target " + s.shape_str() + " for " + l.shape_str());
  if (l.n() == 1) return single;
  Tensor<T> out(l.n(), l.c(), l.h(), l.w());
  const size_t sample = s.size();
  for (int n = 0; n < l.n(); ++n) std::copy(s.data(), s.data() + sample, out.data() + n * sample);
  return ad::make_node<T>(std::move(out), {single}, [sample](ad::Node<T>& nd) {
    auto& p = nd.parents[0];
    if (!p->requires_grad) return;
    auto& g = p->grad_buf();
    for (int n = 0; n < nd.val.n(); ++n)
      for (size_t i = 0; i < sample; ++i) g[i] += nd.grad[n * sample + i];
  });
}

// l_wm over retrieved batches; the surrogate half is optional (absent before
// any surrogate exists).
template <typename T>
Var<T> watermark_retrieval(const Var<T>& retrieved_bp, const Var<T>* retrieved_bpp,
                           const Var<T>& w) {
  auto t = ad::mse(retrieved_bp, tile_to(w, retrieved_bp));
  if (retrieved_bpp) t = ad::add(t, ad::mse(*retrieved_bpp, tile_to(w, *retrieved_bpp)));
  return t;
}

// l_clean: MSE against the black null image, one term per clean source.
template <typename T>
Var<T> clean_retrieval(const std::vector<Var<T>>& retrieved_cleans) {
  check(!retrieved_cleans.empty(), "clean_retrieval_loss: no clean sources");
  Var<T> total;
  for (const auto& r : retrieved_cleans) {
    auto z = ad::constant(Tensor<T>(r->val.n(), r->val.c(), r->val.h(), r->val.w()));
    auto t = ad::mse(r, z);
    total = total ? ad::add(total, t) : t;
  }
  return total;
}

// l_cst: mean squared distance over all unordered pairs in the batch.
template <typename T>
Var<T> consistency(const Var<T>& retrieved, bool* single_warned = nullptr) {
  const int B = retrieved->val.n();
  if (B < 2) {
    if (single_warned) *single_warned = true;
    return ad::constant(Tensor<T>::scalar(T(0)));
  }
  std::vector<Var<T>> pairs;
  for (int i = 0; i < B; ++i)
    for (int j = i + 1; j < B; ++j)
      pairs.push_back(ad::mse(ad::slice_batch(retrieved, i, 1), ad::slice_batch(retrieved, j, 1)));
  return ad::weighted_sum(pairs, std::vector<T>(pairs.size(), T(1) / T(pairs.size())));
}

// The two faces of the minimax on overwritten containers.
template <typename T>
Var<T> overwrite_adversarial(const Var<T>& retrieved_bu) {
  auto z = ad::constant(
      Tensor<T>(retrieved_bu->val.n(), retrieved_bu->val.c(), retrieved_bu->val.h(),
                retrieved_bu->val.w()));
  return ad::mse(retrieved_bu, z);
}

template <typename T>
Var<T> defense_adversarial(const Var<T>& retrieved_bu, const Var<T>& w) {
  return ad::mse(retrieved_bu, tile_to(w, retrieved_bu));
}

}  // namespace loss

// ---------------------------------------------------------------------------
// image-level wrappers (the operational surface used by tests and tools)

template <typename T = double>
double pixel_mse(const std::vector<Image>& x, const std::vector<Image>& y) {
  auto a = ad::constant(batch_to_tensor<T>(x));
  auto b = ad::constant(batch_to_tensor<T>(y));
  return static_cast<double>(loss::pixel_mse(a, b)->val.item());
}

template <typename T = double>
double perceptual_loss(const std::vector<Image>& x, const std::vector<Image>& y,
                       const nn::FeatureExtractor<T>& fx) {
  auto a = ad::constant(batch_to_tensor<T>(x));
  auto b = ad::constant(batch_to_tensor<T>(y));
  return static_cast<double>(loss::perceptual(fx, a, b)->val.item());
}

template <typename T = double>
double focal_frequency_loss(const std::vector<Image>& x, const std::vector<Image>& y) {
  auto a = ad::constant(batch_to_tensor<T>(x));
  auto b = ad::constant(batch_to_tensor<T>(y));
  return static_cast<double>(loss::focal_frequency(a, b)->val.item());
}

template <typename T = double>
double focal_frequency_loss(const Image& x, const Image& y) {
  return focal_frequency_loss<T>(std::vector<Image>{x}, std::vector<Image>{y});
}

}  // namespace wmlab
