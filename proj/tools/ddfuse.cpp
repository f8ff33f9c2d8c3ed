// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
//
// ddfuse command-line tool: train, decompose, fuse, evaluate.
//
// Exit codes: 0 success, 2 usage / configuration / data error, 3 numeric
// failure during training.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ddfuse/ddfuse.hpp"

namespace fs = std::filesystem;
using namespace ddfuse;

namespace {

constexpr int kUsageError = 2;
constexpr int kNumericError = 3;

struct TrainArgs {
  std::string config;
  std::string data;
  std::optional<std::size_t> epochs, batch, image_size, checkpoint_every;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr, lambda1, lambda2, lambda3;
  std::string checkpoint;
  std::string out;
};

struct DecomposeArgs {
  std::string checkpoint;
  std::string image;
  std::string out = ".";
  std::string baseline;
};

struct FuseArgs {
  std::string checkpoint;
  std::string ir;
  std::string vi;
  std::string high = "max";
  std::string low = "avg";
  std::string out = "fused.pgm";
};

struct EvaluateArgs {
  std::string dir;
  std::string out;
};

/// High-frequency images live in [-1, 1]; they are written as (v + 1) / 2.
Tensor remap_signed(const Tensor& t) {
  NoGradGuard no_grad;
  return add_scalar(scalar_mul(t, 0.5f), 0.5f);
}

void write_remap_note(const fs::path& dir, bool baseline) {
  std::ofstream note(dir / "remap.txt");
  note << "g1.pgm g2.pgm g3.pgm: stored value = (v + 1) / 2, clamped to [0, 1]\n";
  if (baseline) note << "lap_g1.pgm lap_g2.pgm: stored value = (v + 1) / 2, clamped to [0, 1]\n";
  note << "ups.pgm s.pgm re.pgm: stored value = v, clamped to [0, 1]\n";
}

void print_metrics(const MetricValues& m) {
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
    std::printf("%s\t%.4f\n", kMetricNames[i], m[i]);
  }
}

int cmd_train(const TrainArgs& a) {
  TrainConfig cfg;
  cfg.out_dir = ".";
  if (!a.config.empty()) cfg = load_config(a.config, cfg);
  if (!a.data.empty()) cfg.dataset = a.data;
  if (a.epochs) cfg.max_epochs = *a.epochs;
  if (a.batch) cfg.batch_size = *a.batch;
  if (a.image_size) cfg.image_size = *a.image_size;
  if (a.checkpoint_every) cfg.checkpoint_every = *a.checkpoint_every;
  if (a.seed) cfg.seed = *a.seed;
  if (a.lr) cfg.initial_lr = *a.lr;
  if (a.lambda1) cfg.weights.adversarial = *a.lambda1;
  if (a.lambda2) cfg.weights.pixel = *a.lambda2;
  if (a.lambda3) cfg.weights.ssim = *a.lambda3;
  if (!a.checkpoint.empty()) cfg.final_checkpoint = a.checkpoint;
  if (!a.out.empty()) cfg.out_dir = a.out;
  cfg.validate();

  if (cfg.dataset.empty()) throw ConfigError("no dataset directory given (--data)");
  if (!fs::is_directory(cfg.dataset)) throw ConfigError(cfg.dataset.string() + ": dataset directory not found");
  auto files = list_images(cfg.dataset);
  if (files.empty()) throw ConfigError(cfg.dataset.string() + ": no .pgm or .png images");

  DatasetIterator data(std::move(files), cfg.seed, cfg.batch_size, cfg.image_size);
  auto model = build_model<float>(cfg.seed);
  auto disc = build_discriminator<float>(cfg.seed);
  TrainHooks hooks;
  hooks.on_epoch = [](const EpochLog& row) { std::cout << row.tsv() << '\n' << std::flush; };
  const auto result = train(model, disc, data, cfg, hooks);
  if (result.skipped_files > 0) std::cerr << "skipped " << result.skipped_files << " undecodable file(s)\n";
  return 0;
}

int cmd_decompose(const DecomposeArgs& a) {
  if (!a.baseline.empty() && a.baseline != "laplacian") {
    throw ConfigError("unknown baseline '" + a.baseline + "' (expected 'laplacian')");
  }
  const auto model = load_checkpoint<float>(a.checkpoint);
  const auto image = to_tensor<float>(load_grayscale(a.image).image);
  const auto d = forward(model, image);
  const fs::path out(a.out);
  fs::create_directories(out);
  save_image(remap_signed(d.g1), out / "g1.pgm");
  save_image(remap_signed(d.g2), out / "g2.pgm");
  save_image(remap_signed(d.g3), out / "g3.pgm");
  save_image(d.ups, out / "ups.pgm");
  save_image(d.s, out / "s.pgm");
  save_image(d.re, out / "re.pgm");
  if (a.baseline == "laplacian") {
    save_image(remap_signed(laplacian_filter(image, LaplacianKernel::kG1)), out / "lap_g1.pgm");
    save_image(remap_signed(laplacian_filter(image, LaplacianKernel::kG2)), out / "lap_g2.pgm");
  }
  write_remap_note(out, a.baseline == "laplacian");
  return 0;
}

int cmd_fuse(const FuseArgs& a) {
  const auto high = parse_high_rule(a.high);
  if (!high) throw ConfigError("--high must be 'max' or 'add', got '" + a.high + "'");
  const auto low = parse_low_rule(a.low);
  if (!low) throw ConfigError("--low must be 'avg' or 'max', got '" + a.low + "'");
  const auto model = load_checkpoint<float>(a.checkpoint);
  const auto ir = load_grayscale(a.ir).image;
  const auto vi = load_grayscale(a.vi).image;
  if (ir.width != vi.width || ir.height != vi.height) {
    throw ShapeError("image sizes differ: " + std::to_string(ir.width) + "x" + std::to_string(ir.height) +
                     " vs " + std::to_string(vi.width) + "x" + std::to_string(vi.height));
  }
  const auto fused = fuse_images(model, to_tensor<float>(ir), to_tensor<float>(vi), FusionStrategy{*high, *low});
  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_image(fused, out);
  // Metrics describe the image as written, after quantization.
  print_metrics(compute_metrics(ir, vi, load_grayscale(out).image));
  return 0;
}

int cmd_evaluate(const EvaluateArgs& a) {
  if (!fs::is_directory(a.dir)) throw ConfigError(a.dir + ": directory not found");
  // name -> role -> path
  std::map<std::string, std::map<std::string, fs::path>> groups;
  for (const auto& path : list_images(a.dir)) {
    const std::string stem = path.stem().string();
    bool matched = false;
    for (const char* role : {"_ir", "_vi", "_fused"}) {
      const std::string suffix(role);
      if (stem.size() > suffix.size() && stem.ends_with(suffix)) {
        groups[stem.substr(0, stem.size() - suffix.size())][suffix.substr(1)] = path;
        matched = true;
        break;
      }
    }
    if (!matched) std::cerr << "warning: skipping " << path.string() << ": not named <pair>_{ir,vi,fused}\n";
  }
  std::vector<FusionTriple> triples;
  for (const auto& [name, roles] : groups) {
    if (roles.size() != 3) {
      std::cerr << "warning: skipping pair '" << name << "': missing";
      for (const char* r : {"ir", "vi", "fused"}) {
        if (!roles.contains(r)) std::cerr << ' ' << r;
      }
      std::cerr << '\n';
      continue;
    }
    triples.push_back({name, load_grayscale(roles.at("ir")).image, load_grayscale(roles.at("vi")).image,
                       load_grayscale(roles.at("fused")).image});
  }
  if (triples.empty()) throw ConfigError(a.dir + ": no complete <pair>_ir/_vi/_fused triples");
  const std::string csv = report(triples).to_csv();
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream f(a.out);
    if (!f) throw ConfigError(a.out + ": cannot write");
    f << csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Image decomposition and infrared/visible fusion"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train a decomposition model");
  train_cmd->add_option("--config", ta.config, "key = value configuration file");
  train_cmd->add_option("--data", ta.data, "Directory of training images");
  train_cmd->add_option("--epochs", ta.epochs, "Number of epochs");
  train_cmd->add_option("--batch", ta.batch, "Batch size");
  train_cmd->add_option("--image-size", ta.image_size, "Training resolution (multiple of 4)");
  train_cmd->add_option("--checkpoint-every", ta.checkpoint_every, "Epochs between checkpoints");
  train_cmd->add_option("--seed", ta.seed, "Random seed");
  train_cmd->add_option("--lr", ta.lr, "Initial learning rate");
  train_cmd->add_option("--lambda1", ta.lambda1, "Adversarial loss weight");
  train_cmd->add_option("--lambda2", ta.lambda2, "Pixel loss weight");
  train_cmd->add_option("--lambda3", ta.lambda3, "SSIM loss weight");
  train_cmd->add_option("--checkpoint", ta.checkpoint, "Final checkpoint path (default <out>/model.ddnf)");
  train_cmd->add_option("--out", ta.out, "Output directory for the log and checkpoints");

  DecomposeArgs da;
  auto* dec_cmd = app.add_subcommand("decompose", "Write the decomposition of one image");
  dec_cmd->add_option("--checkpoint", da.checkpoint, "Model checkpoint")->required();
  dec_cmd->add_option("image", da.image, "Input image (.pgm or .png)")->required();
  dec_cmd->add_option("--out", da.out, "Output directory");
  dec_cmd->add_option("--baseline", da.baseline, "Also write classical baseline images (laplacian)");

  FuseArgs fa;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse an infrared and a visible image");
  fuse_cmd->add_option("--checkpoint", fa.checkpoint, "Model checkpoint")->required();
  fuse_cmd->add_option("ir", fa.ir, "Infrared image")->required();
  fuse_cmd->add_option("vi", fa.vi, "Visible image")->required();
  fuse_cmd->add_option("--high", fa.high, "High-frequency rule: max or add");
  fuse_cmd->add_option("--low", fa.low, "Low-frequency rule: avg or max");
  fuse_cmd->add_option("--out", fa.out, "Output image");

  EvaluateArgs ea;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score <pair>_ir/_vi/_fused triples");
  eval_cmd->add_option("dir", ea.dir, "Directory of image triples")->required();
  eval_cmd->add_option("--out", ea.out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*train_cmd) return cmd_train(ta);
    if (*dec_cmd) return cmd_decompose(da);
    if (*fuse_cmd) return cmd_fuse(fa);
    if (*eval_cmd) return cmd_evaluate(ea);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
