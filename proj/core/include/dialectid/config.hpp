#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dialectid/classify.hpp"
#include "dialectid/corpus.hpp"
#include "dialectid/encoder.hpp"
#include "dialectid/mlm.hpp"
#include "dialectid/normalize.hpp"
#include "dialectid/tokenizer.hpp"

namespace dialectid {

struct TokenizerSettings {
  std::size_t vocab_size = 2000;
  std::size_t min_freq = 2;
};

struct EncoderSettings {
  std::string preset = "desk";
  // Zero keeps the preset value.
  int num_layers = 0;
  int hidden_dim = 0;
  int num_heads = 0;
  int ffn_dim = 0;
  std::uint64_t seed = 0;

  EncoderConfig resolve(int vocab_size, std::size_t max_len) const;
};

// Synthetic train/dev/unlabeled corpora built from one word inventory.
struct SyntheticSettings {
  SyntheticSpec train;
  std::size_t dev_count = 50;
  std::size_t unlabeled_count = 0;

  Dataset make_train() const;
  Dataset make_dev() const;
  std::vector<std::string> make_unlabeled() const;
};

// Line-oriented `section.key = value` configuration; `#` starts a comment.
// Unknown keys are errors.
struct PipelineConfig {
  NormalizeConfig normalize;
  std::size_t min_stem_len = AffixLexicon::defaults().min_stem_len;
  EncodingConfig encoding;
  TokenizerSettings tokenizer;
  EncoderSettings encoder;
  MlmConfig mlm;
  FinetuneConfig finetune;
  UpsampleConfig upsample;
  double nb_alpha = 1.0;
  SyntheticSettings synth;
  std::map<std::string, std::string> paths;  // paths.lexicon/train/dev/unlabeled/report_dir

  static PipelineConfig parse(const std::string& content);
  static PipelineConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  // Applies a `key=value` override.
  void apply_override(const std::string& assignment);
  // Derives every component seed from one master seed.
  void apply_seed(std::uint64_t seed);

  std::string serialize() const;
  std::vector<std::string> keys() const;

  AffixLexicon lexicon() const;
  TextPipeline text_pipeline() const;
  void validate() const;
};

}  // namespace dialectid
