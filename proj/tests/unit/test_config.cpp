#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "dialectid/config.hpp"
#include "dialectid/error.hpp"

using namespace dialectid;

TEST(PipelineConfig, ParseSetAndRoundTrip) {
  const auto cfg = PipelineConfig::parse(
      "# comment\n"
      "normalize.segmentation = false\n"
      "tokenizer.vocab_size = 1234\n"
      "finetune.learning_rate = 0.001\n"
      "synth.count.Sudan = 7\n"
      "encoder.preset = base\n");
  EXPECT_FALSE(cfg.normalize.enable_segmentation);
  EXPECT_EQ(cfg.tokenizer.vocab_size, 1234u);
  EXPECT_DOUBLE_EQ(cfg.finetune.learning_rate, 0.001);
  EXPECT_EQ(cfg.synth.train.examples_per_class.at(DialectLabel::Sudan), 7u);
  EXPECT_EQ(cfg.encoder.resolve(500, 64), (EncoderConfig{12, 768, 12, 3072, 500, 64}));
  const auto again = PipelineConfig::parse(cfg.serialize());
  EXPECT_EQ(again.serialize(), cfg.serialize());
}

TEST(PipelineConfig, UnknownKeysAndBadValuesAreErrors) {
  EXPECT_THROW(PipelineConfig::parse("tokenizer.vocab_sise = 10\n"), ConfigError);
  EXPECT_THROW(PipelineConfig::parse("tokenizer.vocab_size = ten\n"), ConfigError);
  EXPECT_THROW(PipelineConfig::parse("normalize.segmentation = maybe\n"), ConfigError);
  EXPECT_THROW(PipelineConfig::parse("no equals sign\n"), ConfigError);
  PipelineConfig cfg;
  EXPECT_THROW(cfg.apply_override("mlm.mask_rate"), ConfigError);
  cfg.apply_override("mlm.mask_rate=0.2");
  EXPECT_DOUBLE_EQ(cfg.mlm.mask_rate, 0.2);
}

TEST(PipelineConfig, SeedDerivesEveryComponent) {
  PipelineConfig a, b;
  a.apply_seed(5);
  b.apply_seed(5);
  EXPECT_EQ(a.serialize(), b.serialize());
  b.apply_seed(6);
  EXPECT_NE(a.encoder.seed, b.encoder.seed);
  EXPECT_NE(a.mlm.seed, a.finetune.seed);
}

TEST(PipelineConfig, EncoderOverridesAndPaths) {
  auto cfg = PipelineConfig::parse("encoder.hidden_dim = 32\nencoder.num_heads = 2\n");
  const auto ec = cfg.encoder.resolve(100, 32);
  EXPECT_EQ(ec.hidden_dim, 32);
  EXPECT_EQ(ec.num_heads, 2);
  EXPECT_EQ(ec.num_layers, 2);
  EXPECT_EQ(ec.max_len, 32);

  const auto dir = std::filesystem::temp_directory_path() / "dialectid_cfg_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "p.conf") << "paths.train = data/train.tsv\n";
  const auto loaded = PipelineConfig::load(dir / "p.conf");
  EXPECT_EQ(std::filesystem::path(loaded.paths.at("train")), dir / "data/train.tsv");
  std::filesystem::remove_all(dir);
}

TEST(SyntheticSettings, SplitsShareInventoryButDiffer) {
  PipelineConfig cfg;
  cfg.synth.train.num_classes = 3;
  cfg.synth.train.default_count = 20;
  cfg.synth.dev_count = 5;
  cfg.synth.unlabeled_count = 12;
  const auto train = cfg.synth.make_train();
  const auto dev = cfg.synth.make_dev();
  EXPECT_EQ(train.size(), 60u);
  EXPECT_EQ(dev.size(), 15u);
  EXPECT_NE(train.examples[0].text, dev.examples[0].text);
  EXPECT_EQ(cfg.synth.make_unlabeled().size(), 12u);
}
