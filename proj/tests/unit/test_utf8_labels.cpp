#include <gtest/gtest.h>

#include <set>

#include "dialectid/error.hpp"
#include "dialectid/labels.hpp"
#include "dialectid/utf8.hpp"

using namespace dialectid;

TEST(Utf8, RoundTripsArabicAndAstral) {
  const std::string text = "ازيك 😂 abc";
  const auto cps = utf8::decode(text);
  EXPECT_EQ(cps.size(), 10u);
  EXPECT_EQ(cps[0], U'ا');
  EXPECT_EQ(cps[5], U'\U0001F602');
  EXPECT_EQ(utf8::encode(cps), text);
  EXPECT_EQ(utf8::length(text), 10u);
}

TEST(Utf8, InvalidBytesBecomeReplacement) {
  const std::string bad = std::string("a") + char(0xC3) + "b" + char(0xFF);
  const auto cps = utf8::decode(bad);
  ASSERT_EQ(cps.size(), 4u);
  EXPECT_EQ(cps[1], U'�');
  EXPECT_EQ(cps[2], U'b');
  EXPECT_EQ(cps[3], U'�');
}

TEST(Utf8, SplitAndJoin) {
  const auto parts = utf8::split_whitespace("  ا\tب \n ج ");
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(utf8::join(parts, " "), "ا ب ج");
  EXPECT_TRUE(utf8::split_whitespace("   ").empty());
}

TEST(Labels, TwentyOneDistinctNamesRoundTrip) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    const DialectLabel l = label_at(i);
    EXPECT_EQ(index_of(l), i);
    const std::string name(label_name(l));
    names.insert(name);
    EXPECT_EQ(parse_label(name), l);
  }
  EXPECT_EQ(names.size(), kNumLabels);
  EXPECT_EQ(label_name(DialectLabel::Saudi_Arabia), "Saudi_Arabia");
}

TEST(Labels, RejectsUnknown) {
  EXPECT_THROW(parse_label("Atlantis"), ConfigError);
  EXPECT_THROW(label_at(21), ConfigError);
  DialectLabel out{};
  EXPECT_FALSE(try_parse_label("egypt", out));
  EXPECT_TRUE(try_parse_label("Egypt", out));
  EXPECT_EQ(out, DialectLabel::Egypt);
}
