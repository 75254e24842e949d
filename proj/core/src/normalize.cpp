#include "dialectid/normalize.hpp"

#include <algorithm>
#include <regex>

#include "dialectid/error.hpp"
#include "dialectid/io.hpp"
#include "dialectid/utf8.hpp"

namespace dialectid {

namespace {

constexpr char32_t kTatweel = 0x0640;

bool is_tashkil(char32_t cp) { return cp >= 0x064B && cp <= 0x0652; }

// Combining marks and zero-width format characters vanish without leaving
// a word break behind.
bool is_zero_width(char32_t cp) {
  return (cp >= 0x0610 && cp <= 0x061A) || (cp >= 0x064B && cp <= 0x065F) || cp == 0x0670 ||
         (cp >= 0x06D6 && cp <= 0x06ED) || (cp >= 0x200B && cp <= 0x200F) || cp == 0xFEFF;
}

const std::regex& url_pattern() {
  static const std::regex re(R"((https?://|www\.)[!-~]+)", std::regex::icase);
  return re;
}
const std::regex& email_pattern() {
  static const std::regex re(R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9.\-]+\.[A-Za-z]{2,})");
  return re;
}
const std::regex& mention_pattern() {
  static const std::regex re(R"(@[A-Za-z0-9_]+)");
  return re;
}

// Marker bodies exclude tatweel, which a later stage may delete and leave a
// bare '+'.
bool all_letters(std::u32string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(),
                                   [](char32_t c) { return c != 0x0640 && is_arabic_letter(c); });
}

bool is_prefix_marker(std::u32string_view w) {
  return w.size() >= 2 && w.back() == U'+' && all_letters(w.substr(0, w.size() - 1));
}
bool is_suffix_marker(std::u32string_view w) {
  return w.size() >= 2 && w.front() == U'+' && all_letters(w.substr(1));
}

std::vector<std::u32string> split_spaces(std::u32string_view s) {
  std::vector<std::u32string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == U' ') ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != U' ') ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

std::string join_tokens(const std::vector<std::u32string>& tokens) {
  std::u32string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(U' ');
    out += tokens[i];
  }
  return utf8::encode(out);
}

void sort_longest_first(std::vector<std::string>& entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const std::string& a, const std::string& b) {
    return utf8::length(a) > utf8::length(b);
  });
}

}  // namespace

bool is_arabic_letter(char32_t cp) {
  return (cp >= 0x0621 && cp <= 0x063A) || (cp >= 0x0640 && cp <= 0x064A) || cp == 0x0671;
}

void NormalizeConfig::validate() const {
  if (elongation_min_run < 2) throw ConfigError("elongation_min_run must be >= 2");
}

AffixLexicon AffixLexicon::defaults() {
  AffixLexicon lex;
  lex.prefixes = {"وال", "بال", "كال", "فال", "ال", "لل", "و", "ف", "ب", "ك", "ل"};
  lex.suffixes = {"ين", "ون", "ات", "ها", "هم", "هن", "كم", "كن",
                  "نا", "ني", "وا", "ان", "ش",  "ه",  "ك",  "ي"};
  lex.canonicalize();
  return lex;
}

void AffixLexicon::canonicalize() {
  for (const auto* list : {&prefixes, &suffixes}) {
    for (const auto& e : *list) {
      if (!all_letters(utf8::decode(e)))
        throw ConfigError("affix entry contains non-Arabic-letter characters: " + e);
    }
  }
  sort_longest_first(prefixes);
  sort_longest_first(suffixes);
}

AffixLexicon AffixLexicon::parse(const std::string& content) {
  AffixLexicon lex;
  lex.prefixes.clear();
  lex.suffixes.clear();
  std::vector<std::string>* section = nullptr;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    const auto pieces = utf8::split_whitespace(std::string_view(content).substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (pieces.empty() || pieces.front().front() == '#') continue;
    if (pieces.size() != 1)
      throw DataError("affix lexicon: one entry per line expected at line " +
                      std::to_string(line_no));
    const std::string& entry = pieces.front();
    if (entry == "[prefixes]") {
      section = &lex.prefixes;
    } else if (entry == "[suffixes]") {
      section = &lex.suffixes;
    } else if (section == nullptr) {
      throw DataError("affix lexicon: entry before any section at line " +
                      std::to_string(line_no));
    } else {
      section->push_back(entry);
    }
    if (end == content.size()) break;
  }
  try {
    lex.canonicalize();
  } catch (const ConfigError& e) {
    throw DataError(std::string("affix lexicon: ") + e.what());
  }
  return lex;
}

AffixLexicon AffixLexicon::load(const std::filesystem::path& path) {
  return parse(io::read_file(path));
}

std::string AffixLexicon::format() const {
  std::string out = "[prefixes]\n";
  for (const auto& p : prefixes) out += p + "\n";
  out += "[suffixes]\n";
  for (const auto& s : suffixes) out += s + "\n";
  return out;
}

std::string strip_noise(std::string_view text, bool keep_markers) {
  std::string s(text);
  for (const auto* re : {&url_pattern(), &email_pattern(), &mention_pattern()})
    s = std::regex_replace(s, *re, " ");

  std::u32string kept;
  bool pending_space = false;
  for (char32_t cp : utf8::decode(s)) {
    if (is_zero_width(cp)) continue;
    if (is_arabic_letter(cp) || (keep_markers && cp == U'+')) {
      if (pending_space && !kept.empty()) kept.push_back(U' ');
      pending_space = false;
      kept.push_back(cp);
    } else {
      pending_space = true;
    }
  }

  auto tokens = split_spaces(kept);
  if (keep_markers) {
    std::vector<std::u32string> fixed;
    for (auto& tok : tokens) {
      if (tok.find(U'+') == std::u32string::npos || is_prefix_marker(tok) ||
          is_suffix_marker(tok)) {
        fixed.push_back(std::move(tok));
        continue;
      }
      std::replace(tok.begin(), tok.end(), U'+', U' ');
      for (auto& piece : split_spaces(tok)) fixed.push_back(std::move(piece));
    }
    tokens = std::move(fixed);
  }
  return join_tokens(tokens);
}

std::string strip_tashkil(std::string_view text) {
  std::u32string out;
  for (char32_t cp : utf8::decode(text)) {
    if (!is_tashkil(cp) && cp != kTatweel) out.push_back(cp);
  }
  return utf8::encode(out);
}

std::string collapse_elongation(std::string_view text, int min_run) {
  if (min_run < 2) throw ConfigError("elongation min_run must be >= 2");
  const std::u32string cps = utf8::decode(text);
  std::u32string out;
  std::size_t i = 0;
  while (i < cps.size()) {
    std::size_t j = i;
    while (j < cps.size() && cps[j] == cps[i]) ++j;
    const std::size_t run = j - i;
    if (run >= static_cast<std::size_t>(min_run))
      out.push_back(cps[i]);
    else
      out.append(cps, i, run);
    i = j;
  }
  return utf8::encode(out);
}

std::string segment_affixes(std::string_view text, const AffixLexicon& lex) {
  std::vector<std::u32string> prefixes, suffixes;
  for (const auto& p : lex.prefixes) prefixes.push_back(utf8::decode(p));
  for (const auto& s : lex.suffixes) suffixes.push_back(utf8::decode(s));

  const auto tokens = split_spaces(utf8::decode(text));
  std::vector<std::u32string> out;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const std::u32string& tok = tokens[t];
    // Marker tokens and the stems they already split off stay as they are.
    const bool after_prefix = t > 0 && is_prefix_marker(tokens[t - 1]);
    const bool before_suffix = t + 1 < tokens.size() && is_suffix_marker(tokens[t + 1]);
    if (tok.find(U'+') != std::u32string::npos || after_prefix || before_suffix) {
      out.push_back(tok);
      continue;
    }

    std::size_t begin = 0;
    std::size_t end = tok.size();
    std::u32string prefix, suffix;
    for (const auto& p : prefixes) {
      if (p.size() < tok.size() && tok.size() - p.size() >= lex.min_stem_len &&
          tok.compare(0, p.size(), p) == 0) {
        prefix = p;
        begin = p.size();
        break;
      }
    }
    for (const auto& s : suffixes) {
      if (s.size() < end - begin && end - begin - s.size() >= lex.min_stem_len &&
          tok.compare(tok.size() - s.size(), s.size(), s) == 0) {
        suffix = s;
        end = tok.size() - s.size();
        break;
      }
    }
    if (!prefix.empty()) out.push_back(prefix + U"+");
    out.push_back(tok.substr(begin, end - begin));
    if (!suffix.empty()) out.push_back(U"+" + suffix);
  }
  return join_tokens(out);
}

std::string normalize(std::string_view text, const NormalizeConfig& cfg, const AffixLexicon& lex) {
  cfg.validate();
  std::string s(text);
  if (cfg.enable_noise_strip) s = strip_noise(s, cfg.enable_segmentation);
  if (cfg.enable_tashkil_strip) s = strip_tashkil(s);
  if (cfg.enable_elongation_collapse) s = collapse_elongation(s, cfg.elongation_min_run);
  if (cfg.enable_segmentation) s = segment_affixes(s, lex);
  return s;
}

}  // namespace dialectid
