// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"

namespace ddfuse::testing {
namespace {

TrainConfig parse(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  parse_config(cfg, in, "test.cfg");
  return cfg;
}

std::string config_error(const std::string& text) {
  try {
    (void)parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, ReadsEveryKey) {
  const auto cfg = parse(
      "data = /tmp/images\n"
      "epochs = 12\n"
      "batch = 8\n"
      "seed = 99\n"
      "lr = 0.002\n"
      "disc_lr = 5e-4\n"
      "lambda1 = 0\n"
      "lambda2 = 50\n"
      "lambda3 = 2.5\n"
      "image_size = 128\n"
      "checkpoint_every = 3\n"
      "out = runs/a\n"
      "checkpoint = runs/a/final.ddnf\n");
  EXPECT_EQ(cfg.dataset, "/tmp/images");
  EXPECT_EQ(cfg.max_epochs, 12u);
  EXPECT_EQ(cfg.batch_size, 8u);
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.initial_lr, 0.002);
  EXPECT_EQ(cfg.disc_lr, 5e-4);
  EXPECT_EQ(cfg.weights.adversarial, 0.0);
  EXPECT_EQ(cfg.weights.pixel, 50.0);
  EXPECT_EQ(cfg.weights.ssim, 2.5);
  EXPECT_EQ(cfg.image_size, 128u);
  EXPECT_EQ(cfg.checkpoint_every, 3u);
  EXPECT_EQ(cfg.out_dir, "runs/a");
  EXPECT_EQ(cfg.final_checkpoint, "runs/a/final.ddnf");
}

TEST(Config, CommentsAndBlankLinesAreIgnored) {
  const auto cfg = parse("# header\n\n   \nepochs=3   # trailing\n\tbatch =2\r\n");
  EXPECT_EQ(cfg.max_epochs, 3u);
  EXPECT_EQ(cfg.batch_size, 2u);
  EXPECT_EQ(cfg.weights.pixel, 100.0);
}

TEST(Config, UnknownKeyNamesLine) {
  const auto msg = config_error("epochs = 2\n\nlamda1 = 0.1\n");
  EXPECT_NE(msg.find("test.cfg:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("lamda1"), std::string::npos) << msg;
}

TEST(Config, MalformedValuesAreErrors) {
  EXPECT_NE(config_error("epochs = two\n").find("invalid value 'two'"), std::string::npos);
  EXPECT_FALSE(config_error("batch = 4x\n").empty());
  EXPECT_FALSE(config_error("lr = \n").empty());
  EXPECT_NE(config_error("just words\n").find("test.cfg:1"), std::string::npos);
  EXPECT_FALSE(config_error(" = 3\n").empty());
}

TEST(Config, FileLoadingAndMissingFile) {
  const auto dir = fresh_dir("config");
  {
    std::ofstream out(dir / "train.cfg");
    out << "seed = 4\nlambda3 = 1\n";
  }
  TrainConfig base;
  base.batch_size = 16;
  const auto cfg = load_config(dir / "train.cfg", base);
  EXPECT_EQ(cfg.seed, 4u);
  EXPECT_EQ(cfg.weights.ssim, 1.0);
  EXPECT_EQ(cfg.batch_size, 16u);
  EXPECT_THROW((void)load_config(dir / "missing.cfg"), ConfigError);
}

}  // namespace
}  // namespace ddfuse::testing
