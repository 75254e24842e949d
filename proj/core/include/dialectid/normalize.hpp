#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dialectid {

struct NormalizeConfig {
  bool enable_noise_strip = true;
  bool enable_tashkil_strip = true;
  bool enable_elongation_collapse = true;
  bool enable_segmentation = true;
  int elongation_min_run = 3;

  bool any_enabled() const {
    return enable_noise_strip || enable_tashkil_strip || enable_elongation_collapse ||
           enable_segmentation;
  }
  static NormalizeConfig disabled() { return {false, false, false, false, 3}; }
  void validate() const;
};

// Clitic affixes for rule-based segmentation; lists are kept longest first.
struct AffixLexicon {
  std::vector<std::string> prefixes;
  std::vector<std::string> suffixes;
  std::size_t min_stem_len = 4;

  static AffixLexicon defaults();
  // `[prefixes]` / `[suffixes]` sections, one entry per line; `#` comments.
  static AffixLexicon load(const std::filesystem::path& path);
  static AffixLexicon parse(const std::string& content);
  std::string format() const;

  // Sorts by descending code-point length and checks the letter whitelist.
  void canonicalize();
};

bool is_arabic_letter(char32_t cp);

// Removes URLs, mentions and emails, then every code point outside the
// Arabic-letter whitelist; collapses whitespace. With keep_markers,
// well-formed segmentation markers (`ال+`, `+ين`) survive.
std::string strip_noise(std::string_view text, bool keep_markers = false);

// Drops U+064B..U+0652 and tatweel U+0640.
std::string strip_tashkil(std::string_view text);

std::string collapse_elongation(std::string_view text, int min_run);

std::string segment_affixes(std::string_view text, const AffixLexicon& lex);

// strip_noise -> strip_tashkil -> collapse_elongation -> segment_affixes,
// each only when enabled.
std::string normalize(std::string_view text, const NormalizeConfig& cfg, const AffixLexicon& lex);

}  // namespace dialectid
