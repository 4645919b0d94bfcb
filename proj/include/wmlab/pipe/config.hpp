#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "wmlab/loss/losses.hpp"

namespace wmlab {

// Hyperparameters for one training stage.
struct TrainConfig {
  std::string stage;
  int crop_size = 64;
  int batch_size = 8;
  int epochs = 20;
  double lr = 1e-3;
  double lr_decay = 0.2;
  int patience = 400;  // steps without improvement before decay + restore
  LossWeights weights;
  uint64_t seed = 1234;
  std::string run_dir;

  void validate() const {
    check(lr > 0, "TrainConfig: lr must be positive");
    check(lr_decay > 0 && lr_decay < 1, "TrainConfig: lr_decay must be in (0,1)");
    check(batch_size > 0 && epochs >= 0 && patience > 0, "TrainConfig: bad sizes");
    check(crop_size >= 8, "TrainConfig: crop_size too small");
  }
};

// Scale preset: `toy` runs on a desktop CPU; `paper` mirrors the published
// experiment sizes for people with the compute.
struct Preset {
  std::string name;
  int image_size;
  int corpus_n;
  int task_train, task_test;
  int eval_n;      // samples per evaluation row
  int spectrum_n;  // images averaged per spectrum curve
  int lowpass_cutoff;
  int unet_base, ceil_base, disc_base, stack_base, res_base, res_blocks;

  int baseline_epochs, surrogate_epochs, finetune_epochs, overwriter_epochs;
  int defense_init_epochs, defense_adv_epochs;
  int baseline_batch, surrogate_batch, overwriter_batch;
  int baseline_patience, surrogate_patience, overwriter_patience;

  TrainConfig stage_config(const std::string& stage, uint64_t seed,
                           const std::string& run_dir) const {
    TrainConfig c;
    c.stage = stage;
    c.crop_size = image_size;
    c.seed = seed;
    c.run_dir = run_dir;
    c.lr = 1e-3;
    c.lr_decay = 0.2;
    if (stage == "baseline") {
      c.batch_size = baseline_batch;
      c.epochs = baseline_epochs;
      c.patience = baseline_patience;
    } else if (stage == "surrogate" || stage == "surrogate_clean") {
      c.batch_size = surrogate_batch;
      c.epochs = surrogate_epochs;
      c.patience = surrogate_patience;
    } else if (stage == "finetune") {
      c.batch_size = baseline_batch;
      c.epochs = finetune_epochs;
      c.patience = baseline_patience;
    } else if (stage == "overwriter") {
      c.batch_size = overwriter_batch;
      c.epochs = overwriter_epochs;
      c.patience = overwriter_patience;
    } else if (stage == "defense_init") {
      c.batch_size = baseline_batch;
      c.epochs = defense_init_epochs;
      c.patience = baseline_patience;
    } else if (stage == "defense_adv") {
      c.batch_size = baseline_batch;
      c.epochs = defense_adv_epochs;
      c.patience = baseline_patience;
    } else {
      throw std::runtime_error("unknown stage '" + stage + "'");
    }
    return c;
  }
};

inline Preset toy_preset() {
  Preset p;
  p.name = "toy";
  p.image_size = 64;
  p.corpus_n = 500;
  p.task_train = 100;
  p.task_test = 100;
  p.eval_n = 100;
  p.spectrum_n = 200;
  p.lowpass_cutoff = 30;
  p.unet_base = 12;
  p.ceil_base = 12;
  p.disc_base = 8;
  p.stack_base = 12;
  p.res_base = 12;
  p.res_blocks = 4;
  p.baseline_epochs = 24;
  p.surrogate_epochs = 40;
  p.finetune_epochs = 24;
  p.overwriter_epochs = 18;
  p.defense_init_epochs = 10;
  p.defense_adv_epochs = 24;
  p.baseline_batch = 8;
  p.surrogate_batch = 8;
  p.overwriter_batch = 8;
  p.baseline_patience = 400;
  p.surrogate_patience = 120;
  p.overwriter_patience = 400;
  return p;
}

inline Preset paper_preset() {
  Preset p;
  p.name = "paper";
  p.image_size = 256;
  p.corpus_n = 40000;
  p.task_train = 4000;
  p.task_test = 1000;
  p.eval_n = 100;
  p.spectrum_n = 1000;
  p.lowpass_cutoff = 140;
  p.unet_base = 32;
  p.ceil_base = 32;
  p.disc_base = 16;
  p.stack_base = 32;
  p.res_base = 32;
  p.res_blocks = 16;
  p.baseline_epochs = 30;
  p.surrogate_epochs = 50;
  p.finetune_epochs = 50;
  p.overwriter_epochs = 30;
  p.defense_init_epochs = 30;
  p.defense_adv_epochs = 50;
  p.baseline_batch = 10;
  p.surrogate_batch = 20;
  p.overwriter_batch = 20;
  p.baseline_patience = 4000;
  p.surrogate_patience = 1000;  // ~5 epochs at the paper's sizes
  p.overwriter_patience = 2000;
  return p;
}

inline Preset named_preset(const std::string& name) {
  if (name == "toy") return toy_preset();
  if (name == "paper") return paper_preset();
  throw std::runtime_error("unknown preset '" + name + "' (expected toy|paper)");
}

// ---------------------------------------------------------------------------
// run directory layout

struct RunPaths {
  std::string root;

  explicit RunPaths(std::string r) : root(std::move(r)) {}
  std::string checkpoints() const { return root + "/checkpoints"; }
  std::string logs() const { return root + "/logs"; }
  std::string eval() const { return root + "/eval"; }
  std::string samples() const { return root + "/samples"; }
  std::string checkpoint(const std::string& name) const {
    return checkpoints() + "/" + name + ".wmlb";
  }

  void ensure() const {
    namespace fs = std::filesystem;
    fs::create_directories(checkpoints());
    fs::create_directories(logs());
    fs::create_directories(eval());
    fs::create_directories(samples());
  }
};

// Append-only, ordered loss trail: one line per optimizer step.
class LossLogger {
 public:
  LossLogger() = default;
  explicit LossLogger(const std::string& path) : out_(path, std::ios::app) {
    check(out_.good(), "LossLogger: cannot open " + path);
  }

  void log(const LossReport& r, int64_t step) {
    if (out_.is_open()) out_ << r.log_line(step) << "\n";
    last_ = r;
  }
  void flush() {
    if (out_.is_open()) out_.flush();
  }
  const LossReport& last() const { return last_; }

 private:
  std::ofstream out_;
  LossReport last_;
};

}  // namespace wmlab
