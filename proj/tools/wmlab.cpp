// wmlab command line: run training stages from a manifest, emit reports,
// launch attacks against saved checkpoints.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "wmlab/pipe/manifest.hpp"

namespace fs = std::filesystem;
using namespace wmlab;

namespace {

int cmd_run(const std::string& manifest_path, const std::string& preset,
            const std::vector<std::string>& stages, int64_t seed, const std::string& out,
            bool resume) {
  ExperimentManifest m;
  if (!manifest_path.empty()) {
    m = ExperimentManifest::from_file(manifest_path);
  } else {
    m.preset = preset;
    m.output_root = out.empty() ? "runs/" + preset : out;
  }
  if (!preset.empty()) m.preset = preset;
  if (seed >= 0) m.seed = static_cast<uint64_t>(seed);
  if (!out.empty()) m.output_root = out;
  if (!stages.empty() && !(stages.size() == 1 && stages[0] == "all")) m.stages = stages;

  ExperimentRunner<float> runner(std::move(m), resume);
  runner.run_all();
  std::cout << "run complete: " << runner.paths().root << "\n";
  return 0;
}

int cmd_report(const std::string& results_dir) {
  const std::string rows_path = results_dir + "/eval/rows.csv";
  if (!fs::exists(rows_path))
    throw std::runtime_error("no evaluation rows under " + results_dir +
                             " (expected eval/rows.csv; run the report stage first)");
  auto rows = read_rows_csv(rows_path);
  if (rows.empty()) throw std::runtime_error("empty evaluation table in " + rows_path);
  std::cout << format_rows_text(rows);

  const std::string spec_path = results_dir + "/eval/spectrum.csv";
  if (fs::exists(spec_path)) {
    std::ifstream f(spec_path);
    std::string header;
    std::getline(f, header);
    std::vector<std::string> names;
    {
      std::stringstream ss(header);
      std::string cell;
      std::getline(ss, cell, ',');  // radius column
      while (std::getline(ss, cell, ',')) names.push_back(cell);
    }
    std::vector<SpectrumProfile> profs(names.size());
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::getline(ss, cell, ',');
      for (auto& p : profs) {
        std::getline(ss, cell, ',');
        p.amplitudes.push_back(std::stod(cell));
      }
    }
    std::vector<std::pair<std::string, SpectrumProfile>> curves;
    for (size_t i = 0; i < names.size(); ++i) curves.emplace_back(names[i], profs[i]);
    fs::create_directories(results_dir + "/samples");
    write_png(results_dir + "/samples/spectrum.png",
              render_spectrum_plot(curves, static_cast<int>(profs[0].amplitudes.size())));
    std::cout << "\nspectrum plot: " << results_dir << "/samples/spectrum.png\n";
  }
  return 0;
}

int cmd_attack(const std::string& retriever_ckpt, const std::string& images_dir,
               const std::string& wm_name, const std::string& ow_embedder_ckpt,
               const std::string& ow_wm_name, int lowpass, double strength,
               const std::string& out_dir) {
  auto files = list_image_files(images_dir);
  if (files.empty()) throw std::runtime_error("no images under " + images_dir);
  std::vector<Image> containers;
  for (const auto& p : files) containers.push_back(to_rgb(read_image(p.string())));
  const int size = containers[0].h;
  for (auto& img : containers) img = resize_bilinear(img, size, size);

  auto R = nn::load_bundle<float>(retriever_ckpt, nn::Role::retriever);
  auto w = load_watermark(wm_name, size);

  std::vector<Image> attacked;
  std::string mode;
  if (lowpass >= 0) {
    mode = "lowpass" + std::to_string(lowpass);
    for (const auto& c : containers) attacked.push_back(low_pass_filter(c, lowpass));
  } else {
    if (ow_embedder_ckpt.empty())
      throw std::runtime_error("attack: pass --lowpass N or --overwrite with --ow-embedder");
    mode = "overwrite";
    auto Eu = nn::load_bundle<float>(ow_embedder_ckpt, nn::Role::ow_embedder);
    auto ow_w = load_watermark(ow_wm_name, size);
    attacked = run_overwriting_attack(Eu, containers, ow_w, strength);
  }

  fs::create_directories(out_dir);
  for (size_t i = 0; i < attacked.size(); ++i)
    write_png(out_dir + "/attacked_" + std::to_string(i) + ".png", attacked[i]);

  auto row = evaluate_condition("attack(" + mode + ")", attacked, w, R, &containers);
  write_ncc_csv(out_dir + "/ncc.csv", row);
  write_rows_csv(out_dir + "/row.csv", {row});
  std::cout << format_rows_text({row});
  std::cout << "attacked images and per-sample NCCs written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"watermark overwriting attack & defense laboratory"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run training stages from a manifest or preset");
  std::string manifest, preset_name, out;
  std::vector<std::string> stages;
  int64_t seed = -1;
  bool resume = false;
  run->add_option("--manifest", manifest, "experiment manifest (JSON)");
  run->add_option("--preset", preset_name, "scale preset: toy|paper")->default_str("toy");
  run->add_option("--stage", stages, "stages to run (default: all in manifest order)");
  run->add_option("--seed", seed, "override the run seed");
  run->add_option("--out", out, "output directory");
  run->add_flag("--resume", resume, "skip stages whose checkpoints already exist");

  // report
  auto* rep = app.add_subcommand("report", "format tables and plots from a results directory");
  std::string results_dir;
  rep->add_option("dir", results_dir, "run output directory")->required();

  // attack
  auto* atk = app.add_subcommand("attack", "attack saved containers against a victim retriever");
  std::string victim, images_dir, wm_name = "flower", ow_ckpt, ow_wm = "pepper",
                      atk_out = "attack_out";
  int lowpass = -1;
  double strength = 1.0;
  bool overwrite_mode = false;
  atk->add_option("--victim", victim, "victim retriever checkpoint")->required();
  atk->add_option("--images", images_dir, "directory of container images")->required();
  atk->add_option("--watermark", wm_name, "victim watermark name or path");
  atk->add_flag("--overwrite", overwrite_mode, "use the overwriting attack");
  atk->add_option("--ow-embedder", ow_ckpt, "overwriting embedder checkpoint");
  atk->add_option("--ow-watermark", ow_wm, "watermark the attacker embeds");
  atk->add_option("--lowpass", lowpass, "ideal low-pass attack with this cutoff radius");
  atk->add_option("--strength", strength, "overwrite residual scale");
  atk->add_option("--out", atk_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      std::string preset_eff = preset_name.empty() && manifest.empty() ? "toy" : preset_name;
      return cmd_run(manifest, preset_eff, stages, seed, out, resume);
    }
    if (rep->parsed()) return cmd_report(results_dir);
    if (atk->parsed()) {
      if (!overwrite_mode && lowpass < 0)
        throw std::runtime_error("attack: choose --overwrite or --lowpass N");
      return cmd_attack(victim, images_dir, wm_name, ow_ckpt, ow_wm, lowpass, strength, atk_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
