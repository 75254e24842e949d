#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dialectid/labels.hpp"

namespace dialectid {

struct LabeledExample {
  std::string text;
  DialectLabel label{};

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
  friend auto operator<=>(const LabeledExample& a, const LabeledExample& b) {
    if (auto c = a.label <=> b.label; c != 0) return c;
    return a.text <=> b.text;
  }
};

struct Dataset {
  std::vector<LabeledExample> examples;
  std::string provenance;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  std::vector<std::string> texts() const;
  std::vector<DialectLabel> labels() const;
};

using LabelHistogram = std::array<std::size_t, kNumLabels>;

// `label<TAB>text` per line; blank lines and `#`-prefixed lines are skipped.
Dataset load_tsv(const std::filesystem::path& path);
Dataset parse_tsv(const std::string& content, std::string provenance = {});
void write_tsv(const std::filesystem::path& path, const Dataset& ds);
std::string format_tsv(const Dataset& ds);

// One text per line; empty lines are dropped.
std::vector<std::string> load_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

LabelHistogram label_histogram(const Dataset& ds);

struct UpsampleConfig {
  std::size_t target_count = 750;
  std::uint64_t seed = 0;
  // Restricts upsampling to these labels; by default every label present
  // in the dataset is eligible.
  std::optional<std::vector<DialectLabel>> only;

  void validate() const;
};

// Pads each eligible class below target_count to exactly target_count by
// sampling its own examples with replacement. Originals come first, then
// the duplicates grouped by label order.
Dataset upsample(const Dataset& ds, const UpsampleConfig& cfg);

struct SyntheticSpec {
  std::size_t num_classes = 2;
  // Counts for the first num_classes labels; missing entries use default_count.
  std::map<DialectLabel, std::size_t> examples_per_class;
  std::size_t default_count = 100;
  std::size_t vocab_per_class = 40;
  std::size_t shared_vocab = 60;
  double noise_rate = 0.1;
  // Probability per example of injecting surface noise that text cleaning
  // removes (URLs, mentions, emoji, Latin words, diacritics, elongation).
  double surface_noise = 0.0;
  std::size_t min_tokens = 6;
  std::size_t max_tokens = 12;
  // Word inventory and sampling both derive from seed; sample_stream picks
  // an independent draw over the same inventory (e.g. a dev split).
  std::uint64_t seed = 0;
  std::uint64_t sample_stream = 0;

  void validate() const;
  std::size_t count_for(DialectLabel label) const;
};

// Word inventory behind a synthetic corpus; deterministic in the spec.
struct SyntheticLexicon {
  std::vector<std::vector<std::string>> per_class;
  std::vector<std::string> shared;
};

SyntheticLexicon synthetic_lexicon(const SyntheticSpec& spec);

Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace dialectid
