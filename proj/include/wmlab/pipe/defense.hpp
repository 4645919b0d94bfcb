#pragma once

#include "wmlab/pipe/pipelines.hpp"

namespace wmlab {

// ---------------------------------------------------------------------------
// stage: defense initial training (joint minimax)
//
// Per batch, three alternating updates realize the two-party game:
// the overwriter maximizes retrieval failure on overwritten containers
// (its gradient alone sees l_ow), then the watermarking side minimizes it
// (l_def routes only into E/R), then the critic takes its own step.

template <typename T>
struct DefenseInitResult {
  nn::Model<T> embedder, retriever, critic, ow_embedder, ow_retriever;
  StageInfo info;
};

template <typename T>
DefenseInitResult<T> train_defense_init(const TrainConfig& cfg, const nn::Model<T>& E0,
                                        const nn::Model<T>& R0, const nn::Model<T>& D0,
                                        const nn::Model<T>& Eu0, const nn::Model<T>& Ru0,
                                        const std::vector<Image>& corpus,
                                        const PairedDataset* task, const WatermarkAsset& w,
                                        const std::vector<WatermarkAsset>& secrets,
                                        const nn::FeatureExtractor<T>& fx, LossLogger& log) {
  cfg.validate();
  check(!secrets.empty(), "train_defense_init: need overwriting secrets");
  StageTimer timer;
  RandomSource rng = RandomSource(cfg.seed).child(0xDEF1);

  DefenseInitResult<T> out{E0, R0, D0, Eu0, Ru0, {}};
  auto& E = out.embedder;
  auto& R = out.retriever;
  auto& D = out.critic;
  auto& Eu = out.ow_embedder;
  auto& Ru = out.ow_retriever;

  TrainerGroup<T> group(cfg.lr, cfg.lr_decay, cfg.patience);
  size_t iE = group.add(&E), iR = group.add(&R), iD = group.add(&D);
  size_t iEu = group.add(&Eu), iRu = group.add(&Ru);

  const auto wm_t = to_tensor<T>(w.image);
  std::vector<Tensor<T>> secret_t;
  for (const auto& s : secrets) secret_t.push_back(to_tensor<T>(s.image));

  const int steps_per_epoch =
      std::max<int>(1, static_cast<int>(corpus.size()) / cfg.batch_size);
  int64_t step = 0;
  const auto& lw = cfg.weights;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    RandomSource erng = rng.child(epoch);
    auto order = shuffled_indices(static_cast<int>(corpus.size()), erng);
    for (int bs = 0; bs < steps_per_epoch; ++bs, ++step) {
      auto covers = take_batch(corpus, order, static_cast<size_t>(bs) * cfg.batch_size,
                               cfg.batch_size, cfg.crop_size, erng);
      int si = erng.uniform_int(static_cast<int>(secrets.size()));
      std::vector<Image> task_a;
      if (task) {
        for (int i = 0; i < cfg.batch_size; ++i) {
          int idx = task->train_idx[erng.uniform_int(task->train_size())];
          task_a.push_back(task->sample(idx, erng).first);
        }
      }

      // --- overwriter update (max player): u-losses + l_ow into Eu/Ru only
      auto b_prime_val = batch_to_tensor<T>(nn::embed(E, covers, w));
      double v_uemb_mse, v_uemb_vgg, v_uemb_freq, v_uret_mse, v_uret_vgg, v_uret_freq, v_low;
      {
        auto bEu = Eu.bind(true);
        auto bRu = Ru.bind(true);
        auto bRf = R.bind(false);
        auto bpc = ad::constant(b_prime_val);
        auto sec = loss::tile_to(ad::leaf(secret_t[si], false), bpc);
        auto b_u = nn::embed_graph(Eu, bEu, bpc, sec);
        auto x_r = nn::retrieve_graph(Ru, bRu, b_u);
        auto e_mse = loss::pixel_mse(b_u, bpc);
        auto e_vgg = loss::perceptual(fx, b_u, bpc);
        auto e_freq = loss::focal_frequency(b_u, bpc);
        auto r_mse = loss::pixel_mse(x_r, sec);
        auto r_vgg = loss::perceptual(fx, x_r, sec);
        auto r_freq = loss::focal_frequency(x_r, sec);
        auto l_ow = loss::overwrite_adversarial(nn::retrieve_graph(R, bRf, b_u));
        auto total_u = ad::weighted_sum<T>(
            {e_mse, e_vgg, e_freq, r_mse, r_vgg, r_freq, l_ow},
            {static_cast<T>(lw.mse), static_cast<T>(lw.vgg), static_cast<T>(lw.freq),
             static_cast<T>(lw.mse), static_cast<T>(lw.vgg), static_cast<T>(lw.freq),
             static_cast<T>(lw.ow)});
        ad::backward(total_u);
        group.opt(iEu).step(Eu.store, bEu);
        group.opt(iRu).step(Ru.store, bRu);
        v_uemb_mse = e_mse->val.item();
        v_uemb_vgg = e_vgg->val.item();
        v_uemb_freq = e_freq->val.item();
        v_uret_mse = r_mse->val.item();
        v_uret_vgg = r_vgg->val.item();
        v_uret_freq = r_freq->val.item();
        v_low = l_ow->val.item();
      }

      // --- watermarking side update (min player): container quality + retrieval
      double v_mse, v_vgg, v_freq, v_adv, v_wm, v_clean, v_cst, v_def;
      Tensor<T> container_val;
      {
        auto bE = E.bind(true);
        auto bR = R.bind(true);
        auto bDf = D.bind(false);
        auto bEuF = Eu.bind(false);
        auto cov = ad::constant(batch_to_tensor<T>(covers));
        auto wm1 = ad::leaf(wm_t, false);
        auto wm = loss::tile_to(wm1, cov);
        auto b_prime = nn::embed_graph(E, bE, cov, wm);
        auto sec = loss::tile_to(ad::leaf(secret_t[si], false), cov);
        auto b_u = nn::embed_graph(Eu, bEuF, b_prime, sec);  // frozen Eu, pass-through grads

        auto l_mse = loss::pixel_mse(b_prime, cov);
        auto l_vgg = loss::perceptual(fx, b_prime, cov);
        auto l_freq = loss::focal_frequency(b_prime, cov);
        auto l_adv = loss::adversarial_embed(nn::discriminate_graph(D, bDf, b_prime));
        auto r_bp = nn::retrieve_graph(R, bR, b_prime);
        auto l_wm = loss::watermark_retrieval(r_bp, static_cast<ad::Var<T>*>(nullptr), wm1);
        std::vector<ad::Var<T>> cleans;
        cleans.push_back(nn::retrieve_graph(R, bR, cov));
        if (!task_a.empty())
          cleans.push_back(nn::retrieve_graph(R, bR, ad::constant(batch_to_tensor<T>(task_a))));
        auto l_clean = loss::clean_retrieval(cleans);
        auto l_cst = loss::consistency(r_bp);
        auto l_def = loss::defense_adversarial(nn::retrieve_graph(R, bR, b_u), wm1);
        auto total_o = ad::weighted_sum<T>(
            {l_mse, l_vgg, l_freq, l_adv, l_wm, l_clean, l_cst, l_def},
            {static_cast<T>(lw.mse), static_cast<T>(lw.vgg), static_cast<T>(lw.freq),
             static_cast<T>(lw.adv), static_cast<T>(lw.wm), static_cast<T>(lw.clean),
             static_cast<T>(lw.cst), static_cast<T>(lw.def)});
        ad::backward(total_o);
        group.opt(iE).step(E.store, bE);
        group.opt(iR).step(R.store, bR);
        v_mse = l_mse->val.item();
        v_vgg = l_vgg->val.item();
        v_freq = l_freq->val.item();
        v_adv = l_adv->val.item();
        v_wm = l_wm->val.item();
        v_clean = l_clean->val.item();
        v_cst = l_cst->val.item();
        v_def = l_def->val.item();
        container_val = b_prime->val;
      }

      // --- critic update
      double v_disc;
      {
        auto bD = D.bind(true);
        auto cov = ad::constant(batch_to_tensor<T>(covers));
        auto l_disc = loss::discriminator(nn::discriminate_graph(D, bD, cov),
                                          nn::discriminate_graph(D, bD, ad::constant(container_val)));
        ad::backward(l_disc);
        group.opt(iD).step(D.store, bD);
        v_disc = l_disc->val.item();
      }

      LossReport rep = compose_stage_loss(Stage::defense_init,
                                          {{"u_emb_mse", v_uemb_mse},
                                           {"u_emb_vgg", v_uemb_vgg},
                                           {"u_emb_freq", v_uemb_freq},
                                           {"u_ret_mse", v_uret_mse},
                                           {"u_ret_vgg", v_uret_vgg},
                                           {"u_ret_freq", v_uret_freq},
                                           {"l_ow", v_low},
                                           {"l_mse", v_mse},
                                           {"l_vgg", v_vgg},
                                           {"l_freq", v_freq},
                                           {"l_adv", v_adv},
                                           {"l_wm", v_wm},
                                           {"l_clean", v_clean},
                                           {"l_cst", v_cst},
                                           {"l_def", v_def},
                                           {"l_disc", v_disc}},
                                          cfg.weights);
      ensure_finite(rep.total, "defense_init", step);
      log.log(rep, step);
      group.observe(rep.total);
    }
  }
  group.finish();
  log.flush();
  out.info = {"defense_init", timer.seconds(), step, group.best(), group.decays()};
  for (auto* m : std::initializer_list<nn::Model<T>*>{&E, &R, &D, &Eu, &Ru}) {
    m->meta.stage = "defense_init";
    m->meta.epoch = cfg.epochs;
    m->meta.seed = cfg.seed;
    m->meta.loss_weights = cfg.weights.to_string();
  }
  return out;
}

// ---------------------------------------------------------------------------
// stage: defense adversarial training — only the retriever moves

template <typename T>
FinetuneResult<T> train_defense_adv(const TrainConfig& cfg, const nn::Model<T>& R_in,
                                    const nn::Model<T>& E, const nn::Model<T>& Eu,
                                    const nn::Model<T>& H_marked, const nn::Model<T>& H_clean,
                                    const PairedDataset& task, const WatermarkAsset& w,
                                    const std::vector<WatermarkAsset>& secrets, LossLogger& log) {
  cfg.validate();
  StageTimer timer;
  RandomSource rng = RandomSource(cfg.seed).child(0xDEF2);

  FinetuneResult<T> out{R_in, {}};
  auto& R = out.retriever;
  TrainerGroup<T> group(cfg.lr, cfg.lr_decay, cfg.patience);
  group.add(&R);

  const auto wm_t = to_tensor<T>(w.image);
  const int n = task.train_size();
  const int steps_per_epoch = std::max(1, n / cfg.batch_size);
  int64_t step = 0;
  const auto& lw = cfg.weights;

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
      const auto& sec = secrets[erng.uniform_int(static_cast<int>(secrets.size()))];

      // all producers frozen: E, Eu, H', H0
      auto b_prime = nn::embed(E, b_imgs, w);
      auto b_noisy = nn::surrogate_forward(H_marked, a_imgs);
      auto b_clean0 = nn::surrogate_forward(H_clean, a_imgs);
      auto b_over = run_overwriting_attack(Eu, b_prime, sec);

      auto bR = R.bind(true);
      auto wm1 = ad::leaf(wm_t, false);
      auto r_bp = nn::retrieve_graph(R, bR, ad::constant(batch_to_tensor<T>(b_prime)));
      auto r_bpp = nn::retrieve_graph(R, bR, ad::constant(batch_to_tensor<T>(b_noisy)));
      auto l_wm = loss::watermark_retrieval(r_bp, &r_bpp, wm1);
      std::vector<ad::Var<T>> cleans;
      cleans.push_back(nn::retrieve_graph(R, bR, ad::constant(batch_to_tensor<T>(a_imgs))));
      cleans.push_back(nn::retrieve_graph(R, bR, ad::constant(batch_to_tensor<T>(b_imgs))));
      cleans.push_back(nn::retrieve_graph(R, bR, ad::constant(batch_to_tensor<T>(b_clean0))));
      auto l_clean = loss::clean_retrieval(cleans);
      auto l_cst = loss::consistency(ad::concat_batch(r_bp, r_bpp));
      auto r_bu = nn::retrieve_graph(R, bR, ad::constant(batch_to_tensor<T>(b_over)));
      auto l_def = loss::defense_adversarial(r_bu, wm1);
      auto total = ad::weighted_sum<T>(
          {l_wm, l_clean, l_cst, l_def},
          {static_cast<T>(lw.wm), static_cast<T>(lw.clean), static_cast<T>(lw.cst),
           static_cast<T>(lw.def)});
      ad::backward(total);
      group.opt(0).step(R.store, bR);

      LossReport rep = compose_stage_loss(Stage::defense_adv,
                                          {{"l_wm", l_wm->val.item()},
                                           {"l_clean", l_clean->val.item()},
                                           {"l_cst", l_cst->val.item()},
                                           {"l_def", l_def->val.item()}},
                                          cfg.weights);
      ensure_finite(rep.total, "defense_adv", step);
      log.log(rep, step);
      group.observe(rep.total);
    }
  }
  group.finish();
  log.flush();
  out.info = {"defense_adv", timer.seconds(), step, group.best(), group.decays()};
  R.meta.stage = "defense_adv";
  R.meta.epoch = cfg.epochs;
  R.meta.seed = cfg.seed;
  R.meta.loss_weights = cfg.weights.to_string();
  return out;
}

}  // namespace wmlab
