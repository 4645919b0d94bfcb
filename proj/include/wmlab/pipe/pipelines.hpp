#pragma once

#include <chrono>
#include <cmath>
#include <functional>

#include "wmlab/data/dataset.hpp"
#include "wmlab/eval/metrics.hpp"
#include "wmlab/nn/adam.hpp"
#include "wmlab/pipe/config.hpp"

namespace wmlab {

// ---------------------------------------------------------------------------
// shared helpers

inline std::vector<int> shuffled_indices(int n, RandomSource& rng) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(i + 1)]);
  return order;
}

inline void ensure_finite(double v, const std::string& stage, int64_t step) {
  check(std::isfinite(v),
        stage + ": training diverged (non-finite loss) at step " + std::to_string(step));
}

struct StageInfo {
  std::string stage;
  double elapsed_sec = 0;
  int64_t steps = 0;
  double final_loss = 0;
  int lr_decays = 0;
};

class StageTimer {
 public:
  StageTimer() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

// Models trained together in one stage share plateau bookkeeping: on decay,
// every model and optimizer rolls back to the joint best point.
template <typename T>
class TrainerGroup {
 public:
  TrainerGroup(double lr, double decay_factor, int patience)
      : lr_(lr), factor_(decay_factor), patience_(patience) {}

  size_t add(nn::Model<T>* m) {
    models_.push_back(m);
    opts_.emplace_back(m->store, lr_);
    return models_.size() - 1;
  }
  nn::Adam<T>& opt(size_t i) { return opts_[i]; }
  nn::Model<T>& model(size_t i) { return *models_[i]; }
  int decays() const { return decays_; }
  double best() const { return best_; }

  // Track the stage total; returns true when a decay+restore fired.
  bool observe(double loss) {
    if (loss < best_) {
      best_ = loss;
      since_ = 0;
      take_snapshot();
      return false;
    }
    if (++since_ < patience_) return false;
    since_ = 0;
    restore_snapshot();
    for (auto& o : opts_) o.set_lr(o.lr() * factor_);
    ++decays_;
    return true;
  }

  // Leave the models at the best observed point.
  void finish() {
    if (best_ < std::numeric_limits<double>::infinity()) restore_snapshot();
  }

 private:
  void take_snapshot() {
    snap_params_.clear();
    snap_opts_.clear();
    for (size_t i = 0; i < models_.size(); ++i) {
      std::vector<Tensor<T>> ps;
      for (const auto& p : models_[i]->store.params) ps.push_back(p.value);
      snap_params_.push_back(std::move(ps));
      snap_opts_.push_back(opts_[i].snapshot());
    }
  }
  void restore_snapshot() {
    if (snap_params_.empty()) return;
    for (size_t i = 0; i < models_.size(); ++i) {
      for (size_t k = 0; k < snap_params_[i].size(); ++k)
        models_[i]->store.params[k].value = snap_params_[i][k];
      double keep_lr = opts_[i].lr();
      opts_[i].restore(snap_opts_[i]);
      opts_[i].set_lr(keep_lr);
    }
  }

  std::vector<nn::Model<T>*> models_;
  std::vector<nn::Adam<T>> opts_;
  std::vector<std::vector<Tensor<T>>> snap_params_;
  std::vector<typename nn::Adam<T>::Snapshot> snap_opts_;
  double lr_, factor_;
  int patience_;
  double best_ = std::numeric_limits<double>::infinity();
  int since_ = 0;
  int decays_ = 0;
};

inline std::vector<Image> take_batch(const std::vector<Image>& pool,
                                     const std::vector<int>& order, size_t start, int bs,
                                     int crop, RandomSource& rng) {
  std::vector<Image> out;
  out.reserve(bs);
  for (int i = 0; i < bs; ++i) {
    const Image& im = pool[order[(start + i) % order.size()]];
    out.push_back(im.h == crop && im.w == crop ? im : random_crop(im, crop, rng));
  }
  return out;
}

// Chunked inference over an image list to keep graphs small.
template <typename Fn>
std::vector<Image> map_chunked(const std::vector<Image>& in, int chunk, Fn fn) {
  std::vector<Image> out;
  out.reserve(in.size());
  for (size_t i = 0; i < in.size(); i += chunk) {
    std::vector<Image> part(in.begin() + i, in.begin() + std::min(in.size(), i + chunk));
    auto r = fn(part);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

template <typename T>
std::vector<Image> embed_images(const nn::Model<T>& E, const std::vector<Image>& covers,
                                const WatermarkAsset& w, int chunk = 16) {
  return map_chunked(covers, chunk, [&](const std::vector<Image>& b) { return nn::embed(E, b, w); });
}

template <typename T>
std::vector<Image> retrieve_images(const nn::Model<T>& R, const std::vector<Image>& xs,
                                   int chunk = 16) {
  return map_chunked(xs, chunk, [&](const std::vector<Image>& b) { return nn::retrieve(R, b); });
}

template <typename T>
std::vector<Image> surrogate_images(const nn::Model<T>& H, const std::vector<Image>& xs,
                                    int chunk = 16) {
  return map_chunked(xs, chunk,
                     [&](const std::vector<Image>& b) { return nn::surrogate_forward(H, b); });
}

// ---------------------------------------------------------------------------
// evaluation

// Averaged metrics for one condition; NCC/SR always, PSNR/SSIM when cover
// pairs exist.
template <typename T>
EvalRow evaluate_condition(const std::string& label, const std::vector<Image>& images,
                           const WatermarkAsset& w, const nn::Model<T>& R,
                           const std::vector<Image>* covers = nullptr) {
  check(!images.empty(), "evaluate_condition: empty image list");
  std::vector<Image> retrieved = retrieve_images(R, images);
  std::vector<double> nccs;
  nccs.reserve(images.size());
  for (const auto& r : retrieved) nccs.push_back(ncc(r, w.image));
  std::optional<double> pm, sm;
  if (covers) {
    check(covers->size() == images.size(), "evaluate_condition: cover/image count mismatch");
    double ps = 0, ss = 0;
    for (size_t i = 0; i < images.size(); ++i) {
      ps += psnr(images[i], (*covers)[i]);
      ss += ssim(images[i], (*covers)[i]);
    }
    pm = ps / images.size();
    sm = ss / images.size();
  }
  return EvalRow::from_samples(label, nccs, pm, sm);
}

// Fraction of retrievals that read as the null image.
template <typename T>
int count_null_retrievals(const nn::Model<T>& R, const std::vector<Image>& clean_inputs,
                          double tau = kNullThreshold) {
  auto retrieved = retrieve_images(R, clean_inputs);
  int nulls = 0;
  for (const auto& r : retrieved)
    if (mean_intensity(r) < tau) ++nulls;
  return nulls;
}

// ---------------------------------------------------------------------------
// stage: baseline watermarking (embedder + retriever + critic)

template <typename T>
struct BaselineResult {
  nn::Model<T> embedder, retriever, critic;
  StageInfo info;
};

template <typename T>
nn::Model<T> make_role_model(nn::Role role, const Preset& ps, uint64_t seed) {
  nn::ArchConfig c;
  switch (role) {
    case nn::Role::embedder:
    case nn::Role::ow_embedder:
      c = {6, 3, ps.unet_base, 0};
      return nn::make_model<T>(role, nn::Arch::skipunet, c, seed);
    case nn::Role::retriever:
      c = {3, 3, ps.ceil_base, 0};
      return nn::make_model<T>(role, nn::Arch::ceil, c, seed);
    case nn::Role::ow_retriever:
      c = {3, 3, ps.stack_base, 3};
      return nn::make_model<T>(role, nn::Arch::convstack, c, seed);
    case nn::Role::discriminator:
      c = {3, 1, ps.disc_base, 0};
      return nn::make_model<T>(role, nn::Arch::patchcritic, c, seed);
    case nn::Role::surrogate:
      c = {3, 3, ps.unet_base, 0};
      return nn::make_model<T>(role, nn::Arch::skipunet, c, seed);
  }
  throw std::logic_error("make_role_model: bad role");
}

template <typename T>
nn::Model<T> make_surrogate_model(const Preset& ps, nn::Arch arch, uint64_t seed) {
  if (arch == nn::Arch::skipunet)
    return nn::make_model<T>(nn::Role::surrogate, arch, {3, 3, ps.unet_base, 0}, seed);
  return nn::make_model<T>(nn::Role::surrogate, arch, {3, 3, ps.res_base, ps.res_blocks}, seed);
}

template <typename T>
BaselineResult<T> train_baseline_watermarker(const TrainConfig& cfg, const Preset& ps,
                                             const std::vector<Image>& corpus,
                                             const WatermarkAsset& w,
                                             const nn::FeatureExtractor<T>& fx,
                                             LossLogger& log) {
  cfg.validate();
  check(!w.is_null, "train_baseline_watermarker: cannot train on the null watermark");
  StageTimer timer;
  RandomSource rng = RandomSource(cfg.seed).child(0xBA5E);

  BaselineResult<T> out{make_role_model<T>(nn::Role::embedder, ps, cfg.seed ^ 0xE1),
                        make_role_model<T>(nn::Role::retriever, ps, cfg.seed ^ 0xE2),
                        make_role_model<T>(nn::Role::discriminator, ps, cfg.seed ^ 0xE3),
                        {}};
  auto& E = out.embedder;
  auto& R = out.retriever;
  auto& D = out.critic;

  TrainerGroup<T> group(cfg.lr, cfg.lr_decay, cfg.patience);
  size_t iE = group.add(&E), iR = group.add(&R), iD = group.add(&D);

  const auto wm_t = to_tensor<T>(w.image);
  const int steps_per_epoch =
      std::max<int>(1, static_cast<int>(corpus.size()) / cfg.batch_size);
  int64_t step = 0;
  const std::vector<T> lam = {static_cast<T>(cfg.weights.mse),   static_cast<T>(cfg.weights.vgg),
                              static_cast<T>(cfg.weights.adv),   static_cast<T>(cfg.weights.wm),
                              static_cast<T>(cfg.weights.clean), static_cast<T>(cfg.weights.cst)};

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    RandomSource erng = rng.child(epoch);
    auto order = shuffled_indices(static_cast<int>(corpus.size()), erng);
    for (int bs = 0; bs < steps_per_epoch; ++bs, ++step) {
      auto covers = take_batch(corpus, order, static_cast<size_t>(bs) * cfg.batch_size,
                               cfg.batch_size, cfg.crop_size, erng);
      auto cov = ad::constant(batch_to_tensor<T>(covers));
      auto wm1 = ad::leaf(wm_t, false);

      // embedder/retriever update (critic frozen)
      auto bE = E.bind(true);
      auto bR = R.bind(true);
      auto bDf = D.bind(false);
      auto wm = loss::tile_to(wm1, cov);
      auto container = nn::embed_graph(E, bE, cov, wm);
      auto l_mse = loss::pixel_mse(container, cov);
      auto l_vgg = loss::perceptual(fx, container, cov);
      auto l_adv = loss::adversarial_embed(nn::discriminate_graph(D, bDf, container));
      auto r_bp = nn::retrieve_graph(R, bR, container);
      auto l_wm = loss::watermark_retrieval(r_bp, static_cast<ad::Var<T>*>(nullptr), wm1);
      auto r_cl = nn::retrieve_graph(R, bR, cov);
      auto l_clean = loss::clean_retrieval<T>({r_cl});
      auto l_cst = loss::consistency(r_bp);
      auto total = ad::weighted_sum<T>({l_mse, l_vgg, l_adv, l_wm, l_clean, l_cst}, lam);
      ad::backward(total);
      group.opt(iE).step(E.store, bE);
      group.opt(iR).step(R.store, bR);

      // critic update on the containers just produced
      auto bD = D.bind(true);
      auto cont_c = ad::constant(container->val);
      auto l_disc = loss::discriminator(nn::discriminate_graph(D, bD, cov),
                                        nn::discriminate_graph(D, bD, cont_c));
      ad::backward(l_disc);
      group.opt(iD).step(D.store, bD);

      LossReport rep = compose_stage_loss(
          Stage::baseline,
          {{"l_mse", l_mse->val.item()},
           {"l_vgg", l_vgg->val.item()},
           {"l_adv", l_adv->val.item()},
           {"l_wm", l_wm->val.item()},
           {"l_clean", l_clean->val.item()},
           {"l_cst", l_cst->val.item()},
           {"l_disc", l_disc->val.item()}},
          cfg.weights);
      ensure_finite(rep.total, "baseline", step);
      log.log(rep, step);
      group.observe(rep.total);
    }
  }
  group.finish();
  log.flush();

  out.info = {"baseline", timer.seconds(), step, group.best(), group.decays()};
  for (auto* m : {&E, &R, &D}) {
    m->meta.stage = "baseline";
    m->meta.epoch = cfg.epochs;
    m->meta.seed = cfg.seed;
    m->meta.loss_weights = cfg.weights.to_string();
  }
  return out;
}

// ---------------------------------------------------------------------------
// stage: surrogate distillation (plain regression on (input, target) pairs)

template <typename T>
struct SurrogateResult {
  nn::Model<T> surrogate;
  StageInfo info;
};

template <typename T>
SurrogateResult<T> train_surrogate(const TrainConfig& cfg, const Preset& ps,
                                   const std::vector<Image>& inputs,
                                   const std::vector<Image>& targets, nn::Arch arch,
                                   const std::string& tag, LossLogger& log) {
  cfg.validate();
  check(inputs.size() == targets.size() && !inputs.empty(),
        "train_surrogate: need aligned nonempty input/target sets");
  StageTimer timer;
  RandomSource rng = RandomSource(cfg.seed).child(std::hash<std::string>{}(tag));

  SurrogateResult<T> out{make_surrogate_model<T>(ps, arch, cfg.seed ^ std::hash<std::string>{}(tag)),
                         {}};
  auto& H = out.surrogate;
  TrainerGroup<T> group(cfg.lr, cfg.lr_decay, cfg.patience);
  group.add(&H);

  const int n = static_cast<int>(inputs.size());
  const int steps_per_epoch = std::max(1, n / cfg.batch_size);
  int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    RandomSource erng = rng.child(epoch);
    auto order = shuffled_indices(n, erng);
    for (int bs = 0; bs < steps_per_epoch; ++bs, ++step) {
      std::vector<Image> a, y;
      for (int i = 0; i < cfg.batch_size; ++i) {
        int idx = order[(static_cast<size_t>(bs) * cfg.batch_size + i) % order.size()];
        a.push_back(inputs[idx]);
        y.push_back(targets[idx]);
      }
      auto bH = H.bind(true);
      auto av = ad::constant(batch_to_tensor<T>(a));
      auto yv = ad::constant(batch_to_tensor<T>(y));
      auto pred = nn::surrogate_graph(H, bH, av);
      auto l = loss::pixel_mse(pred, yv);
      ad::backward(l);
      group.opt(0).step(H.store, bH);

      LossReport rep;
      rep.stage = tag;
      rep.terms = {{"l_mse", l->val.item()}};
      rep.weights = cfg.weights;
      rep.total = rep.recompose();
      ensure_finite(rep.total, tag, step);
      log.log(rep, step);
      group.observe(rep.total);
    }
  }
  group.finish();
  log.flush();
  out.info = {tag, timer.seconds(), step, group.best(), group.decays()};
  H.meta.stage = tag;
  H.meta.epoch = cfg.epochs;
  H.meta.seed = cfg.seed;
  H.meta.loss_weights = cfg.weights.to_string();
  return out;
}

// ---------------------------------------------------------------------------
// stage: retriever fine-tuning against surrogate outputs
//
// The clean surrogate batch B0 is mandatory in normal operation; omitting it
// reproduces the overfitting failure and exists only as a test hook.

template <typename T>
struct FinetuneResult {
  nn::Model<T> retriever;
  StageInfo info;
};

template <typename T>
FinetuneResult<T> finetune_retriever(const TrainConfig& cfg, const nn::Model<T>& R_in,
                                     const nn::Model<T>& E, const nn::Model<T>& H_marked,
                                     const nn::Model<T>* H_clean, const PairedDataset& task,
                                     const WatermarkAsset& w, LossLogger& log,
                                     bool include_clean_surrogate = true) {
  cfg.validate();
  if (include_clean_surrogate)
    check(H_clean != nullptr,
          "finetune_retriever: clean surrogate outputs (B0) are mandatory; train the "
          "watermark-free surrogate first");
  StageTimer timer;
  RandomSource rng = RandomSource(cfg.seed).child(0xF17E);

  FinetuneResult<T> out{R_in, {}};
  auto& R = out.retriever;
  TrainerGroup<T> group(cfg.lr, cfg.lr_decay, cfg.patience);
  group.add(&R);

  const auto wm_t = to_tensor<T>(w.image);
  const int n = task.train_size();
  const int steps_per_epoch = std::max(1, n / cfg.batch_size);
  int64_t step = 0;
  const std::vector<T> lam = {static_cast<T>(cfg.weights.wm), static_cast<T>(cfg.weights.clean),
                              static_cast<T>(cfg.weights.cst)};

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    RandomSource erng = rng.child(epoch);
    auto order = shuffled_indices(n, erng);
    for (int bs = 0; bs < steps_per_epoch; ++bs, ++step) {
      std::vector<Image> a_imgs, b_imgs;
      for (int i = 0; i < cfg.batch_size; ++i) {
        int idx = task.train_idx[order[(static_cast<size_t>(bs) * cfg.batch_size + i) % order.size()]];
        auto [ai, bi] = task.sample(idx, erng);
        a_imgs.push_back(std::move(ai));
        b_imgs.push_back(std::move(bi));
      }
      // frozen producers
      auto b_prime = nn::embed(E, b_imgs, w);
      auto b_noisy = nn::surrogate_forward(H_marked, a_imgs);
      std::vector<Image> b_clean0;
      if (include_clean_surrogate) b_clean0 = nn::surrogate_forward(*H_clean, a_imgs);

      auto bR = R.bind(true);
      auto wm1 = ad::leaf(wm_t, false);
      auto r_bp = nn::retrieve_graph(R, bR, ad::constant(batch_to_tensor<T>(b_prime)));
      auto r_bpp = nn::retrieve_graph(R, bR, ad::constant(batch_to_tensor<T>(b_noisy)));
      auto l_wm = loss::watermark_retrieval(r_bp, &r_bpp, wm1);

      std::vector<ad::Var<T>> cleans;
      cleans.push_back(nn::retrieve_graph(R, bR, ad::constant(batch_to_tensor<T>(a_imgs))));
      cleans.push_back(nn::retrieve_graph(R, bR, ad::constant(batch_to_tensor<T>(b_imgs))));
      if (include_clean_surrogate)
        cleans.push_back(nn::retrieve_graph(R, bR, ad::constant(batch_to_tensor<T>(b_clean0))));
      auto l_clean = loss::clean_retrieval(cleans);
      auto l_cst = loss::consistency(ad::concat_batch(r_bp, r_bpp));
      auto total = ad::weighted_sum<T>({l_wm, l_clean, l_cst}, lam);
      ad::backward(total);
      group.opt(0).step(R.store, bR);

      LossReport rep = compose_stage_loss(Stage::baseline_adv,
                                          {{"l_wm", l_wm->val.item()},
                                           {"l_clean", l_clean->val.item()},
                                           {"l_cst", l_cst->val.item()}},
                                          cfg.weights);
      ensure_finite(rep.total, "baseline_adv", step);
      log.log(rep, step);
      group.observe(rep.total);
    }
  }
  group.finish();
  log.flush();
  out.info = {"baseline_adv", timer.seconds(), step, group.best(), group.decays()};
  R.meta.stage = include_clean_surrogate ? "baseline_adv" : "baseline_adv_overfit";
  R.meta.epoch = cfg.epochs;
  R.meta.seed = cfg.seed;
  R.meta.loss_weights = cfg.weights.to_string();
  return out;
}

// ---------------------------------------------------------------------------
// stage: overwriting network (embeds any of the named marks into anything)

template <typename T>
struct OverwriterResult {
  nn::Model<T> ow_embedder, ow_retriever;
  StageInfo info;
};

template <typename T>
OverwriterResult<T> train_overwriter(const TrainConfig& cfg, const Preset& ps,
                                     const std::vector<Image>& corpus,
                                     const std::vector<WatermarkAsset>& secrets,
                                     const nn::FeatureExtractor<T>& fx, LossLogger& log,
                                     const std::string& tag = "overwriter") {
  cfg.validate();
  check(!secrets.empty(), "train_overwriter: need at least one secret asset");
  StageTimer timer;
  RandomSource rng = RandomSource(cfg.seed).child(std::hash<std::string>{}(tag));

  OverwriterResult<T> out{
      make_role_model<T>(nn::Role::ow_embedder, ps, cfg.seed ^ std::hash<std::string>{}(tag) ^ 0xA1),
      make_role_model<T>(nn::Role::ow_retriever, ps, cfg.seed ^ std::hash<std::string>{}(tag) ^ 0xA2),
      {}};
  auto& Eu = out.ow_embedder;
  auto& Ru = out.ow_retriever;
  TrainerGroup<T> group(cfg.lr, cfg.lr_decay, cfg.patience);
  size_t iE = group.add(&Eu), iR = group.add(&Ru);

  std::vector<Tensor<T>> secret_t;
  for (const auto& s : secrets) secret_t.push_back(to_tensor<T>(s.image));

  const int steps_per_epoch =
      std::max<int>(1, static_cast<int>(corpus.size()) / cfg.batch_size);
  int64_t step = 0;
  const std::vector<T> lam = {static_cast<T>(cfg.weights.mse), static_cast<T>(cfg.weights.vgg),
                              static_cast<T>(cfg.weights.freq), static_cast<T>(cfg.weights.mse),
                              static_cast<T>(cfg.weights.vgg), static_cast<T>(cfg.weights.freq)};

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    RandomSource erng = rng.child(epoch);
    auto order = shuffled_indices(static_cast<int>(corpus.size()), erng);
    for (int bs = 0; bs < steps_per_epoch; ++bs, ++step) {
      auto covers = take_batch(corpus, order, static_cast<size_t>(bs) * cfg.batch_size,
                               cfg.batch_size, cfg.crop_size, erng);
      int si = erng.uniform_int(static_cast<int>(secrets.size()));

      auto bE = Eu.bind(true);
      auto bR = Ru.bind(true);
      auto cov = ad::constant(batch_to_tensor<T>(covers));
      auto sec1 = ad::leaf(secret_t[si], false);
      auto sec = loss::tile_to(sec1, cov);
      auto c_u = nn::embed_graph(Eu, bE, cov, sec);
      auto x_r = nn::retrieve_graph(Ru, bR, c_u);

      auto e_mse = loss::pixel_mse(c_u, cov);
      auto e_vgg = loss::perceptual(fx, c_u, cov);
      auto e_freq = loss::focal_frequency(c_u, cov);
      auto r_mse = loss::pixel_mse(x_r, sec);
      auto r_vgg = loss::perceptual(fx, x_r, sec);
      auto r_freq = loss::focal_frequency(x_r, sec);
      auto total = ad::weighted_sum<T>({e_mse, e_vgg, e_freq, r_mse, r_vgg, r_freq}, lam);
      ad::backward(total);
      group.opt(iE).step(Eu.store, bE);
      group.opt(iR).step(Ru.store, bR);

      LossReport rep = compose_stage_loss(Stage::overwriter,
                                          {{"u_emb_mse", e_mse->val.item()},
                                           {"u_emb_vgg", e_vgg->val.item()},
                                           {"u_emb_freq", e_freq->val.item()},
                                           {"u_ret_mse", r_mse->val.item()},
                                           {"u_ret_vgg", r_vgg->val.item()},
                                           {"u_ret_freq", r_freq->val.item()}},
                                          cfg.weights);
      ensure_finite(rep.total, tag, step);
      log.log(rep, step);
      group.observe(rep.total);
    }
  }
  group.finish();
  log.flush();
  out.info = {tag, timer.seconds(), step, group.best(), group.decays()};
  for (auto* m : {&Eu, &Ru}) {
    m->meta.stage = tag;
    m->meta.epoch = cfg.epochs;
    m->meta.seed = cfg.seed;
    m->meta.loss_weights = cfg.weights.to_string();
  }
  return out;
}

// Apply the overwriting attack to already-watermarked containers.
// strength 1 is the plain forward pass; other values scale the overwriting
// residual.
template <typename T>
std::vector<Image> run_overwriting_attack(const nn::Model<T>& Eu,
                                          const std::vector<Image>& containers,
                                          const WatermarkAsset& ow_watermark,
                                          double strength = 1.0, int chunk = 16) {
  check(Eu.role == nn::Role::ow_embedder, "run_overwriting_attack: need an ow_embedder");
  return map_chunked(containers, chunk, [&](const std::vector<Image>& b) {
    auto bind = Eu.bind(false);
    auto cov = ad::constant(batch_to_tensor<T>(b));
    auto sec1 = ad::constant(to_tensor<T>(ow_watermark.image));
    auto outv = nn::embed_graph(Eu, bind, cov, loss::tile_to(sec1, cov));
    if (strength != 1.0) {
      Tensor<T>& v = outv->val;
      const Tensor<T>& c = cov->val;
      for (size_t i = 0; i < v.size(); ++i)
        v[i] = c[i] + static_cast<T>(strength) * (v[i] - c[i]);
    }
    return batch_from_tensor(outv->val, true);
  });
}

}  // namespace wmlab
