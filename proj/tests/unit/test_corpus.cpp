#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>

#include "dialectid/corpus.hpp"
#include "dialectid/error.hpp"
#include "dialectid/utf8.hpp"

using namespace dialectid;

namespace {

Dataset make_counts(const std::vector<std::pair<DialectLabel, std::size_t>>& counts) {
  Dataset ds;
  for (auto [label, n] : counts)
    for (std::size_t i = 0; i < n; ++i)
      ds.examples.push_back({std::string(label_name(label)) + " " + std::to_string(i), label});
  return ds;
}

}  // namespace

TEST(Tsv, ParsesTwoExamples) {
  const Dataset ds = parse_tsv("Egypt\tازيك\nSudan\tكيفك\n");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.examples[0].label, DialectLabel::Egypt);
  EXPECT_EQ(ds.examples[0].text, "ازيك");
  EXPECT_EQ(ds.examples[1].label, DialectLabel::Sudan);
}

TEST(Tsv, ErrorsCarryLineNumbers) {
  try {
    parse_tsv("Atlantis\txyz\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "unknown label at line 1");
  }
  try {
    parse_tsv("# header\nEgypt\tok\nEgypt\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "missing tab separator at line 3");
  }
  EXPECT_THROW(parse_tsv("Egypt\t\n"), DataError);
}

TEST(Tsv, FormatRoundTrips) {
  const Dataset ds = make_counts({{DialectLabel::Iraq, 2}, {DialectLabel::Oman, 1}});
  EXPECT_EQ(parse_tsv(format_tsv(ds)).examples, ds.examples);
}

TEST(Histogram, OnePerLabelIsAllOnes) {
  std::string content;
  for (auto l : all_labels()) content += std::string(label_name(l)) + "\tنص\n";
  const auto h = label_histogram(parse_tsv(content));
  for (auto c : h) EXPECT_EQ(c, 1u);
  for (auto c : label_histogram(Dataset{})) EXPECT_EQ(c, 0u);
}

TEST(Histogram, Counts) {
  const auto h = label_histogram(make_counts({{DialectLabel::Egypt, 3}, {DialectLabel::Iraq, 1}}));
  EXPECT_EQ(h[index_of(DialectLabel::Egypt)], 3u);
  EXPECT_EQ(h[index_of(DialectLabel::Iraq)], 1u);
  EXPECT_EQ(std::count(h.begin(), h.end(), 0u), 19);
}

TEST(Upsample, PadsMinoritiesOnly) {
  const Dataset ds = make_counts({{DialectLabel::Egypt, 4473}, {DialectLabel::Sudan, 210}});
  const Dataset up = upsample(ds, {750, 3, {}});
  const auto h = label_histogram(up);
  EXPECT_EQ(h[index_of(DialectLabel::Egypt)], 4473u);
  EXPECT_EQ(h[index_of(DialectLabel::Sudan)], 750u);
  // Originals are kept, in order, as a prefix.
  ASSERT_GE(up.size(), ds.size());
  EXPECT_TRUE(std::equal(ds.examples.begin(), ds.examples.end(), up.examples.begin()));
  // Duplicates are drawn from the same class.
  std::set<std::string> sudan;
  for (const auto& ex : ds.examples)
    if (ex.label == DialectLabel::Sudan) sudan.insert(ex.text);
  for (std::size_t i = ds.size(); i < up.size(); ++i) {
    EXPECT_EQ(up.examples[i].label, DialectLabel::Sudan);
    EXPECT_TRUE(sudan.count(up.examples[i].text));
  }
}

TEST(Upsample, FixedPointAndDeterminism) {
  const Dataset at = make_counts({{DialectLabel::Egypt, 750}, {DialectLabel::Iraq, 750}});
  EXPECT_EQ(upsample(at, {750, 1, {}}).examples, at.examples);
  const Dataset small = make_counts({{DialectLabel::Egypt, 5}, {DialectLabel::Iraq, 2}});
  EXPECT_EQ(upsample(small, {20, 9, {}}).examples, upsample(small, {20, 9, {}}).examples);
  EXPECT_NE(upsample(small, {20, 9, {}}).examples, upsample(small, {20, 10, {}}).examples);
}

TEST(Upsample, RestrictedLabels) {
  const Dataset ds = make_counts({{DialectLabel::Egypt, 2}, {DialectLabel::Iraq, 2}});
  const auto h = label_histogram(upsample(ds, {5, 0, std::vector{DialectLabel::Iraq}}));
  EXPECT_EQ(h[index_of(DialectLabel::Egypt)], 2u);
  EXPECT_EQ(h[index_of(DialectLabel::Iraq)], 5u);
  EXPECT_THROW(upsample(ds, {5, 0, std::vector{DialectLabel::Sudan}}), ConfigError);
}

TEST(Synthetic, NoiseFreeUsesOnlyOwnVocabulary) {
  SyntheticSpec spec;
  spec.num_classes = 2;
  spec.default_count = 10;
  spec.noise_rate = 0.0;
  spec.seed = 4;
  const auto lex = synthetic_lexicon(spec);
  const Dataset ds = generate_synthetic(spec);
  ASSERT_EQ(ds.size(), 20u);
  for (const auto& ex : ds.examples) {
    const auto& own = lex.per_class[index_of(ex.label)];
    for (const auto& tok : utf8::split_whitespace(ex.text))
      EXPECT_NE(std::find(own.begin(), own.end(), tok), own.end()) << tok;
  }
}

TEST(Synthetic, Deterministic) {
  SyntheticSpec spec;
  spec.num_classes = 3;
  spec.seed = 99;
  spec.surface_noise = 0.5;
  EXPECT_EQ(generate_synthetic(spec).examples, generate_synthetic(spec).examples);
  SyntheticSpec dev = spec;
  dev.sample_stream = 1;
  EXPECT_NE(generate_synthetic(spec).examples, generate_synthetic(dev).examples);
}

TEST(Synthetic, FullNoiseIsIndistinguishableByChiSquare) {
  SyntheticSpec spec;
  spec.num_classes = 2;
  spec.default_count = 500;
  spec.shared_vocab = 20;
  spec.noise_rate = 1.0;
  spec.seed = 8;
  const Dataset ds = generate_synthetic(spec);
  std::map<std::string, std::array<double, 2>> table;
  std::array<double, 2> class_total{};
  for (const auto& ex : ds.examples) {
    const std::size_t c = index_of(ex.label);
    for (const auto& tok : utf8::split_whitespace(ex.text)) {
      table[tok][c] += 1;
      class_total[c] += 1;
    }
  }
  ASSERT_EQ(table.size(), 20u);
  const double n = class_total[0] + class_total[1];
  double stat = 0.0;
  for (const auto& [tok, row] : table) {
    const double row_total = row[0] + row[1];
    for (int c = 0; c < 2; ++c) {
      const double expected = row_total * class_total[c] / n;
      stat += (row[c] - expected) * (row[c] - expected) / expected;
    }
  }
  boost::math::chi_squared dist(static_cast<double>(table.size() - 1));
  const double p = 1.0 - boost::math::cdf(dist, stat);
  EXPECT_GT(p, 0.01) << "chi2=" << stat;
}

TEST(Synthetic, SurfaceNoiseIsInjected) {
  SyntheticSpec spec;
  spec.num_classes = 2;
  spec.default_count = 200;
  spec.surface_noise = 1.0;
  spec.seed = 1;
  std::size_t non_arabic_letters = 0;
  for (const auto& ex : generate_synthetic(spec).examples)
    for (char32_t cp : utf8::decode(ex.text))
      if (cp != U' ' && !(cp >= 0x0621 && cp <= 0x064A)) ++non_arabic_letters;
  EXPECT_GT(non_arabic_letters, 0u);
}
