#pragma once

#include <iostream>

#include "wmlab/core/sha256.hpp"
#include "wmlab/pipe/defense.hpp"
#include "wmlab/pipe/report.hpp"

namespace wmlab {

// Ordered experiment description: which stages run, on what data, where
// results land. Serialized as JSON; a snapshot plus content hash is written
// into every run directory.
struct ExperimentManifest {
  std::string preset = "toy";
  uint64_t seed = 1234;
  std::string output_root = "runs/toy";
  std::string task = "synthetic";
  std::string dataset_root;  // empty -> synthetic pairs
  std::string corpus_root;   // empty -> synthetic corpus
  std::string watermark = "flower";
  std::string ow_watermark = "pepper";
  std::string surrogate_arch = "skipunet";
  double attack_strength = 1.0;
  std::vector<std::string> stages = kAllStages();
  nlohmann::json overrides = nlohmann::json::object();

  static const std::vector<std::string>& kAllStages() {
    static const std::vector<std::string> s = {"baseline",   "surrogate",    "finetune",
                                               "overwriter", "defense_init", "defense_adv",
                                               "report"};
    return s;
  }

  nlohmann::json to_json() const {
    return {{"preset", preset},
            {"seed", seed},
            {"output_root", output_root},
            {"task", task},
            {"dataset_root", dataset_root},
            {"corpus_root", corpus_root},
            {"watermark", watermark},
            {"ow_watermark", ow_watermark},
            {"surrogate_arch", surrogate_arch},
            {"attack_strength", attack_strength},
            {"stages", stages},
            {"overrides", overrides}};
  }

  static ExperimentManifest from_json(const nlohmann::json& j) {
    ExperimentManifest m;
    m.preset = j.value("preset", m.preset);
    m.seed = j.value("seed", m.seed);
    m.output_root = j.value("output_root", m.output_root);
    m.task = j.value("task", m.task);
    m.dataset_root = j.value("dataset_root", m.dataset_root);
    m.corpus_root = j.value("corpus_root", m.corpus_root);
    m.watermark = j.value("watermark", m.watermark);
    m.ow_watermark = j.value("ow_watermark", m.ow_watermark);
    m.surrogate_arch = j.value("surrogate_arch", m.surrogate_arch);
    m.attack_strength = j.value("attack_strength", m.attack_strength);
    if (j.contains("stages")) m.stages = j["stages"].get<std::vector<std::string>>();
    if (j.contains("overrides")) m.overrides = j["overrides"];
    return m;
  }

  static ExperimentManifest from_file(const std::string& path) {
    std::ifstream f(path);
    check(f.good(), "manifest: cannot open " + path);
    nlohmann::json j;
    f >> j;
    return from_json(j);
  }

  void validate_stage_order() const {
    static const std::map<std::string, std::vector<std::string>> deps = {
        {"baseline", {}},
        {"surrogate", {"baseline"}},
        {"finetune", {"baseline", "surrogate"}},
        {"overwriter", {}},
        {"defense_init", {"baseline", "finetune"}},
        {"defense_adv", {"defense_init", "surrogate"}},
        {"report", {}}};
    std::set<std::string> seen;
    for (const auto& s : stages) {
      auto it = deps.find(s);
      check(it != deps.end(), "manifest: unknown stage '" + s + "'");
      for (const auto& d : it->second)
        check(seen.count(d) > 0,
              "manifest: stage '" + s + "' listed before its dependency '" + d + "'");
      seen.insert(s);
    }
  }
};

// ---------------------------------------------------------------------------
// experiment runner

template <typename T = float>
class ExperimentRunner {
 public:
  ExperimentRunner(ExperimentManifest m, bool resume = false, bool verbose = true)
      : m_(std::move(m)),
        preset_(named_preset(m_.preset)),
        paths_(m_.output_root),
        resume_(resume),
        verbose_(verbose) {
    m_.validate_stage_order();
    if (const char* env = std::getenv("WMLAB_DATA_ROOT"); env && *env) {
      if (!m_.dataset_root.empty()) m_.dataset_root = std::string(env) + "/" + m_.dataset_root;
      if (!m_.corpus_root.empty()) m_.corpus_root = std::string(env) + "/" + m_.corpus_root;
    }
    paths_.ensure();
    std::string snapshot = m_.to_json().dump(2);
    std::ofstream(paths_.root + "/manifest.json", std::ios::trunc) << snapshot << "\n";
    std::ofstream(paths_.root + "/config_hash.txt", std::ios::trunc)
        << sha256_hex(snapshot) << "\n";
  }

  const ExperimentManifest& manifest() const { return m_; }
  const Preset& preset() const { return preset_; }
  const RunPaths& paths() const { return paths_; }

  void run_all() {
    for (const auto& s : m_.stages) run_stage(s);
  }

  void run_stage(const std::string& stage) {
    if (stage == "baseline") stage_baseline();
    else if (stage == "surrogate") stage_surrogate();
    else if (stage == "finetune") stage_finetune();
    else if (stage == "overwriter") stage_overwriter();
    else if (stage == "defense_init") stage_defense_init();
    else if (stage == "defense_adv") stage_defense_adv();
    else if (stage == "report") stage_report();
    else throw std::runtime_error("unknown stage '" + stage + "'");
  }

  // --- data (lazy, deterministic in the run seed)

  const std::vector<Image>& corpus() {
    if (corpus_.empty())
      corpus_ = load_corpus(m_.corpus_root, preset_.corpus_n, preset_.image_size, m_.seed ^ 0xC0);
    return corpus_;
  }

  const PairedDataset& task() {
    if (task_.pairs.empty()) {
      DatasetOptions opts;
      opts.n_train = preset_.task_train;
      opts.n_test = preset_.task_test;
      opts.seed = m_.seed ^ 0xDA;
      task_ = load_paired_dataset(m_.dataset_root, parse_task(m_.task), preset_.image_size, opts);
    }
    return task_;
  }

  WatermarkAsset watermark() const { return load_watermark(m_.watermark, preset_.image_size); }
  WatermarkAsset ow_watermark() const {
    return load_watermark(m_.ow_watermark, preset_.image_size);
  }
  std::vector<WatermarkAsset> secret_pool() const {
    std::vector<WatermarkAsset> v;
    for (const auto& n : bundled_watermarks()) v.push_back(load_watermark(n, preset_.image_size));
    return v;
  }
  const nn::FeatureExtractor<T>& features() {
    if (!fx_) fx_ = std::make_unique<nn::FeatureExtractor<T>>(3);
    return *fx_;
  }

  // Held-out evaluation sets (task test split, first eval_n pairs).
  struct EvalSets {
    std::vector<Image> a, b;  // inputs / clean targets
  };
  EvalSets eval_sets() {
    EvalSets s;
    const auto& ds = task();
    int n = std::min(preset_.eval_n, ds.test_size());
    check(n > 0, "no test pairs available for evaluation");
    for (int i = 0; i < n; ++i) {
      auto [a, b] = ds.fixed(ds.test_idx[i]);
      s.a.push_back(std::move(a));
      s.b.push_back(std::move(b));
    }
    return s;
  }

  // --- checkpoint access

  bool have(const std::string& name) const {
    return std::filesystem::exists(paths_.checkpoint(name));
  }
  template <typename M = T>
  nn::Model<M> load(const std::string& name, nn::Role role) const {
    const std::string p = paths_.checkpoint(name);
    check(std::filesystem::exists(p),
          "missing checkpoint " + p + " — run the producing stage first");
    return nn::load_bundle<M>(p, role);
  }

  TrainConfig stage_config(const std::string& stage) {
    TrainConfig c = preset_.stage_config(stage, m_.seed, paths_.root);
    if (m_.overrides.contains(stage)) {
      const auto& o = m_.overrides[stage];
      c.epochs = o.value("epochs", c.epochs);
      c.batch_size = o.value("batch_size", c.batch_size);
      c.lr = o.value("lr", c.lr);
      c.patience = o.value("patience", c.patience);
      c.lr_decay = o.value("lr_decay", c.lr_decay);
    }
    return c;
  }

  // --- stages

  void stage_baseline() {
    if (resume_ && have("baseline_embedder") && have("baseline_retriever") &&
        have("baseline_critic")) {
      note("baseline: checkpoints present, skipping (resume)");
      return;
    }
    auto cfg = stage_config("baseline");
    LossLogger log(paths_.logs() + "/losses.csv");
    auto w = watermark();
    auto res = train_baseline_watermarker<T>(cfg, preset_, corpus(), w, features(), log);
    nn::save_bundle(res.embedder, paths_.checkpoint("baseline_embedder"));
    nn::save_bundle(res.retriever, paths_.checkpoint("baseline_retriever"));
    nn::save_bundle(res.critic, paths_.checkpoint("baseline_critic"));
    note("baseline: done in " + fmt6(res.info.elapsed_sec) + "s, best loss " +
         fmt6(res.info.final_loss));
  }

  void stage_surrogate() {
    if (resume_ && have("surrogate_marked") && have("surrogate_clean")) {
      note("surrogate: checkpoints present, skipping (resume)");
      return;
    }
    auto E = load("baseline_embedder", nn::Role::embedder);
    auto w = watermark();
    const auto& ds = task();
    std::vector<Image> a_train, b_train;
    for (int idx : ds.train_idx) {
      auto [a, b] = ds.fixed(idx);
      a_train.push_back(std::move(a));
      b_train.push_back(std::move(b));
    }
    auto b_marked = embed_images(E, b_train, w);

    auto cfg = stage_config("surrogate");
    LossLogger log(paths_.logs() + "/losses.csv");
    nn::Arch arch = nn::parse_arch(m_.surrogate_arch);
    auto hp = train_surrogate<T>(cfg, preset_, a_train, b_marked, arch, "surrogate_marked", log);
    auto h0 = train_surrogate<T>(cfg, preset_, a_train, b_train, arch, "surrogate_clean", log);
    nn::save_bundle(hp.surrogate, paths_.checkpoint("surrogate_marked"));
    nn::save_bundle(h0.surrogate, paths_.checkpoint("surrogate_clean"));
    note("surrogate: done (marked " + fmt6(hp.info.elapsed_sec) + "s, clean " +
         fmt6(h0.info.elapsed_sec) + "s)");
  }

  void stage_finetune() {
    if (resume_ && have("finetune_retriever")) {
      note("finetune: checkpoint present, skipping (resume)");
      return;
    }
    auto E = load("baseline_embedder", nn::Role::embedder);
    auto R = load("baseline_retriever", nn::Role::retriever);
    auto Hp = load("surrogate_marked", nn::Role::surrogate);
    auto H0 = load("surrogate_clean", nn::Role::surrogate);
    auto cfg = stage_config("finetune");
    LossLogger log(paths_.logs() + "/losses.csv");
    auto res = finetune_retriever<T>(cfg, R, E, Hp, &H0, task(), watermark(), log, true);
    nn::save_bundle(res.retriever, paths_.checkpoint("finetune_retriever"));
    note("finetune: done in " + fmt6(res.info.elapsed_sec) + "s");
  }

  void stage_overwriter() {
    if (resume_ && have("overwriter_ow_embedder") && have("overwriter_ow_retriever")) {
      note("overwriter: checkpoints present, skipping (resume)");
      return;
    }
    auto cfg = stage_config("overwriter");
    LossLogger log(paths_.logs() + "/losses.csv");
    auto res = train_overwriter<T>(cfg, preset_, corpus(), secret_pool(), features(), log);
    nn::save_bundle(res.ow_embedder, paths_.checkpoint("overwriter_ow_embedder"));
    nn::save_bundle(res.ow_retriever, paths_.checkpoint("overwriter_ow_retriever"));
    note("overwriter: done in " + fmt6(res.info.elapsed_sec) + "s");
  }

  void stage_defense_init() {
    if (resume_ && have("defense_embedder") && have("defense_retriever_init")) {
      note("defense_init: checkpoints present, skipping (resume)");
      return;
    }
    auto E0 = load("baseline_embedder", nn::Role::embedder);
    auto R0 = load("finetune_retriever", nn::Role::retriever);
    auto D0 = load("baseline_critic", nn::Role::discriminator);

    // The defender trains its own overwriter (separate seed stream), then the
    // joint minimax refines everything together.
    auto ow_cfg = stage_config("overwriter");
    ow_cfg.seed = m_.seed ^ 0xD0D0;
    LossLogger log(paths_.logs() + "/losses.csv");
    auto own = train_overwriter<T>(ow_cfg, preset_, corpus(), secret_pool(), features(), log,
                                   "overwriter_defense");

    auto cfg = stage_config("defense_init");
    auto res = train_defense_init<T>(cfg, E0, R0, D0, own.ow_embedder, own.ow_retriever, corpus(),
                                     &task(), watermark(), secret_pool(), features(), log);
    nn::save_bundle(res.embedder, paths_.checkpoint("defense_embedder"));
    nn::save_bundle(res.retriever, paths_.checkpoint("defense_retriever_init"));
    nn::save_bundle(res.critic, paths_.checkpoint("defense_critic"));
    nn::save_bundle(res.ow_embedder, paths_.checkpoint("defense_ow_embedder"));
    nn::save_bundle(res.ow_retriever, paths_.checkpoint("defense_ow_retriever"));
    note("defense_init: done in " + fmt6(res.info.elapsed_sec) + "s");
  }

  void stage_defense_adv() {
    if (resume_ && have("defense_retriever")) {
      note("defense_adv: checkpoint present, skipping (resume)");
      return;
    }
    auto E = load("defense_embedder", nn::Role::embedder);
    auto R = load("defense_retriever_init", nn::Role::retriever);
    auto Eu = load("defense_ow_embedder", nn::Role::ow_embedder);
    auto Hp = load("surrogate_marked", nn::Role::surrogate);
    auto H0 = load("surrogate_clean", nn::Role::surrogate);
    auto cfg = stage_config("defense_adv");
    LossLogger log(paths_.logs() + "/losses.csv");
    auto res = train_defense_adv<T>(cfg, R, E, Eu, Hp, H0, task(), watermark(), secret_pool(), log);
    nn::save_bundle(res.retriever, paths_.checkpoint("defense_retriever"));
    note("defense_adv: done in " + fmt6(res.info.elapsed_sec) + "s");
  }

  // --- evaluation + report generation

  void stage_report() {
    auto sets = eval_sets();
    auto w = watermark();
    auto ow_w = ow_watermark();
    std::vector<EvalRow> rows;
    const std::string tlabel = m_.task;

    auto E = load("baseline_embedder", nn::Role::embedder);
    auto R = load("finetune_retriever", nn::Role::retriever);
    auto b_prime = embed_images(E, sets.b, w);
    rows.push_back(evaluate_condition(tlabel + " x W", b_prime, w, R, &sets.b));

    if (have("surrogate_marked")) {
      auto Hp = load("surrogate_marked", nn::Role::surrogate);
      auto b_noisy = surrogate_images(Hp, sets.a);
      rows.push_back(evaluate_condition(tlabel + " x W x " + m_.surrogate_arch, b_noisy, w, R));
    }

    std::vector<Image> b_over;
    if (have("overwriter_ow_embedder")) {
      auto Eu = load("overwriter_ow_embedder", nn::Role::ow_embedder);
      b_over = run_overwriting_attack(Eu, b_prime, ow_w, m_.attack_strength);
      auto row = evaluate_condition(tlabel + " x W x U", b_over, w, R, &sets.b);
      rows.push_back(row);
      write_ncc_csv(paths_.eval() + "/ncc_attack_baseline.csv", row);
    }

    {
      std::vector<Image> filtered;
      for (const auto& img : b_prime) filtered.push_back(low_pass_filter(img, preset_.lowpass_cutoff));
      rows.push_back(evaluate_condition(
          tlabel + " x W x LP" + std::to_string(preset_.lowpass_cutoff), filtered, w, R, &b_prime));
      save_lowpass_grid(b_prime, filtered, R, w);
    }

    if (have("defense_embedder") && have("defense_retriever")) {
      auto Ed = load("defense_embedder", nn::Role::embedder);
      auto Rd = load("defense_retriever", nn::Role::retriever);
      auto bd = embed_images(Ed, sets.b, w);
      rows.push_back(evaluate_condition(tlabel + " x O", bd, w, Rd, &sets.b));
      if (have("overwriter_ow_embedder")) {
        auto Eu = load("overwriter_ow_embedder", nn::Role::ow_embedder);
        auto bd_over = run_overwriting_attack(Eu, bd, ow_w, m_.attack_strength);
        rows.push_back(evaluate_condition(tlabel + " x O x U", bd_over, w, Rd));
        if (!b_over.empty()) {
          auto row = evaluate_condition(tlabel + " x O x U(base)", b_over, w, Rd);
          rows.push_back(row);
          write_ncc_csv(paths_.eval() + "/ncc_attack_defense.csv", row);
        }
      }
      save_residue_grid("residue_defense.png", sets.b, bd);
    }
    save_residue_grid("residue_baseline.png", sets.b, b_prime);
    save_retrieval_grid(sets, b_prime, R, w);

    write_rows_csv(paths_.eval() + "/rows.csv", rows);
    std::ofstream(paths_.eval() + "/rows.txt", std::ios::trunc) << format_rows_text(rows);
    save_spectra(sets, b_prime, b_over);
    note("report: wrote " + std::to_string(rows.size()) + " evaluation rows");
  }

  std::vector<EvalRow> rows() const { return read_rows_csv(paths_.eval() + "/rows.csv"); }

 private:
  void note(const std::string& s) const {
    if (verbose_) std::cout << "[wmlab] " << s << "\n" << std::flush;
  }

  void save_residue_grid(const std::string& name, const std::vector<Image>& covers,
                         const std::vector<Image>& containers) {
    std::vector<std::vector<Image>> grid;
    for (int i = 0; i < 4 && i < static_cast<int>(covers.size()); ++i)
      grid.push_back({covers[i], containers[i], residue_map(covers[i], containers[i], 10.f)});
    write_png(paths_.samples() + "/" + name, make_grid(grid));
  }

  void save_retrieval_grid(const EvalSets& sets, const std::vector<Image>& containers,
                           const nn::Model<T>& R, const WatermarkAsset& w) {
    auto r_marked = retrieve_images(R, {containers.begin(), containers.begin() + 4});
    auto r_clean = retrieve_images(R, {sets.b.begin(), sets.b.begin() + 4});
    std::vector<std::vector<Image>> grid;
    for (int i = 0; i < 4 && i < static_cast<int>(containers.size()); ++i)
      grid.push_back({sets.b[i], w.image, containers[i], r_marked[i], r_clean[i]});
    write_png(paths_.samples() + "/retrieval_baseline.png", make_grid(grid));
  }

  void save_lowpass_grid(const std::vector<Image>& containers, const std::vector<Image>& filtered,
                         const nn::Model<T>& R, const WatermarkAsset& w) {
    auto r_before = retrieve_images(R, {containers.begin(), containers.begin() + 4});
    auto r_after = retrieve_images(R, {filtered.begin(), filtered.begin() + 4});
    std::vector<std::vector<Image>> grid;
    for (int i = 0; i < 4 && i < static_cast<int>(containers.size()); ++i)
      grid.push_back({containers[i], r_before[i], filtered[i], r_after[i]});
    write_png(paths_.samples() + "/lowpass_retrieval.png", make_grid(grid));
  }

  void save_spectra(const EvalSets& sets, const std::vector<Image>& b_prime,
                    const std::vector<Image>& b_over) {
    int n = std::min<int>(preset_.spectrum_n, static_cast<int>(sets.b.size()));
    auto avg = [&](const std::vector<Image>& imgs) {
      std::vector<SpectrumProfile> ps;
      for (int i = 0; i < n && i < static_cast<int>(imgs.size()); ++i)
        ps.push_back(azimuthal_integral(imgs[i]));
      return average_profiles(ps);
    };
    std::vector<std::pair<std::string, SpectrumProfile>> curves;
    curves.emplace_back("COVER", avg(sets.b));
    curves.emplace_back("CONTAINER", avg(b_prime));
    if (!b_over.empty()) curves.emplace_back("OVERWRITTEN", avg(b_over));
    if (have("surrogate_marked")) {
      auto Hp = load("surrogate_marked", nn::Role::surrogate);
      curves.emplace_back("SURROGATE", avg(surrogate_images(Hp, sets.a)));
    }
    write_spectrum_csv(paths_.eval() + "/spectrum.csv", curves);
    write_png(paths_.samples() + "/spectrum.png", render_spectrum_plot(curves, n));
  }

  ExperimentManifest m_;
  Preset preset_;
  RunPaths paths_;
  bool resume_;
  bool verbose_;
  std::vector<Image> corpus_;
  PairedDataset task_;
  std::unique_ptr<nn::FeatureExtractor<T>> fx_;
};

}  // namespace wmlab
