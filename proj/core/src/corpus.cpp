#include "dialectid/corpus.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "dialectid/error.hpp"
#include "dialectid/io.hpp"
#include "dialectid/rng.hpp"
#include "dialectid/utf8.hpp"

namespace dialectid {

std::vector<std::string> Dataset::texts() const {
  std::vector<std::string> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(ex.text);
  return out;
}

std::vector<DialectLabel> Dataset::labels() const {
  std::vector<DialectLabel> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(ex.label);
  return out;
}

Dataset parse_tsv(const std::string& content, std::string provenance) {
  Dataset ds;
  ds.provenance = std::move(provenance);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string line = content.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("missing tab separator at line " + std::to_string(line_no));
    DialectLabel label{};
    if (!try_parse_label(std::string_view(line).substr(0, tab), label))
      throw DataError("unknown label at line " + std::to_string(line_no));
    std::string text = line.substr(tab + 1);
    if (utf8::split_whitespace(text).empty())
      throw DataError("empty text at line " + std::to_string(line_no));
    ds.examples.push_back({std::move(text), label});
  }
  return ds;
}

Dataset load_tsv(const std::filesystem::path& path) {
  return parse_tsv(io::read_file(path), path.filename().string());
}

std::string format_tsv(const Dataset& ds) {
  std::string out;
  for (const auto& ex : ds.examples) {
    out.append(label_name(ex.label));
    out.push_back('\t');
    out.append(ex.text);
    out.push_back('\n');
  }
  return out;
}

void write_tsv(const std::filesystem::path& path, const Dataset& ds) {
  const std::string content = format_tsv(ds);
  io::write_atomic(path, [&](std::ostream& os) { os << content; });
}

std::vector<std::string> load_lines(const std::filesystem::path& path) {
  std::vector<std::string> out;
  for (auto& line : io::read_lines(path)) {
    if (!utf8::split_whitespace(line).empty()) out.push_back(std::move(line));
  }
  return out;
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  io::write_atomic(path, [&](std::ostream& os) {
    for (const auto& l : lines) os << l << '\n';
  });
}

LabelHistogram label_histogram(const Dataset& ds) {
  LabelHistogram h{};
  for (const auto& ex : ds.examples) ++h[index_of(ex.label)];
  return h;
}

void UpsampleConfig::validate() const {
  if (target_count < 1) throw ConfigError("upsample target_count must be >= 1");
}

Dataset upsample(const Dataset& ds, const UpsampleConfig& cfg) {
  cfg.validate();
  std::array<std::vector<std::size_t>, kNumLabels> members;
  for (std::size_t i = 0; i < ds.examples.size(); ++i)
    members[index_of(ds.examples[i].label)].push_back(i);

  std::array<bool, kNumLabels> eligible{};
  if (cfg.only) {
    for (DialectLabel l : *cfg.only) {
      if (members[index_of(l)].empty())
        throw ConfigError("cannot upsample empty class: " + std::string(label_name(l)));
      eligible[index_of(l)] = true;
    }
  } else {
    for (std::size_t c = 0; c < kNumLabels; ++c) eligible[c] = !members[c].empty();
  }

  Dataset out = ds;
  Rng rng(cfg.seed);
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    const auto& idx = members[c];
    if (!eligible[c] || idx.size() >= cfg.target_count) continue;
    for (std::size_t k = idx.size(); k < cfg.target_count; ++k)
      out.examples.push_back(ds.examples[idx[rng.below(idx.size())]]);
  }
  return out;
}

void SyntheticSpec::validate() const {
  if (num_classes < 2 || num_classes > kNumLabels)
    throw ConfigError("synthetic num_classes must be in [2,21]");
  if (vocab_per_class < 1 || shared_vocab < 1)
    throw ConfigError("synthetic vocabulary sizes must be positive");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0))
    throw ConfigError("synthetic noise_rate must be in [0,1]");
  if (!(surface_noise >= 0.0 && surface_noise <= 1.0))
    throw ConfigError("synthetic surface_noise must be in [0,1]");
  if (min_tokens < 1 || max_tokens < min_tokens)
    throw ConfigError("synthetic token length bounds invalid");
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (count_for(label_at(c)) < 1) throw ConfigError("synthetic class counts must be positive");
  }
  for (const auto& [label, n] : examples_per_class) {
    if (index_of(label) >= num_classes)
      throw ConfigError("synthetic count given for label outside num_classes: " +
                        std::string(label_name(label)));
  }
}

std::size_t SyntheticSpec::count_for(DialectLabel label) const {
  auto it = examples_per_class.find(label);
  return it == examples_per_class.end() ? default_count : it->second;
}

namespace {

// 28 base letters; no tatweel, hamza forms or diacritics.
constexpr char32_t kLetters[] = {0x0627, 0x0628, 0x062A, 0x062B, 0x062C, 0x062D, 0x062E,
                                 0x062F, 0x0630, 0x0631, 0x0632, 0x0633, 0x0634, 0x0635,
                                 0x0636, 0x0637, 0x0638, 0x0639, 0x063A, 0x0641, 0x0642,
                                 0x0643, 0x0644, 0x0645, 0x0646, 0x0647, 0x0648, 0x064A};
constexpr std::size_t kNumLetters = sizeof(kLetters) / sizeof(kLetters[0]);

std::string random_word(Rng& rng) {
  const std::size_t len = 3 + rng.below(4);
  std::u32string w;
  while (w.size() < len) {
    const char32_t c = kLetters[rng.below(kNumLetters)];
    if (!w.empty() && w.back() == c) continue;
    w.push_back(c);
  }
  return utf8::encode(w);
}

std::string random_ascii(Rng& rng, std::size_t n) {
  static constexpr char kAlnum[] = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(kAlnum[rng.below(sizeof(kAlnum) - 1)]);
  return s;
}

void inject_surface_noise(std::vector<std::string>& tokens, Rng& rng) {
  static const char* kLatin[] = {"lol", "omg", "wow", "ok", "haha"};
  static const char* kEmoji[] = {"\xF0\x9F\x98\x82", "\xE2\x9D\xA4", "\xF0\x9F\x94\xA5",
                                 "\xF0\x9F\x99\x8F"};
  static const char32_t kMarks[] = {0x064E, 0x064F, 0x0650, 0x0651, 0x0652, 0x064B};
  const std::size_t pos = rng.below(tokens.size());
  switch (rng.below(7)) {
    case 0:
      tokens.insert(tokens.begin() + static_cast<long>(rng.below(tokens.size() + 1)),
                    "http://t.co/" + random_ascii(rng, 6));
      break;
    case 1:
      tokens.insert(tokens.begin(), "@user_" + random_ascii(rng, 4));
      break;
    case 2:
      tokens[pos] += kEmoji[rng.below(4)];
      break;
    case 3:
      tokens.insert(tokens.begin() + static_cast<long>(rng.below(tokens.size() + 1)),
                    kLatin[rng.below(5)]);
      break;
    case 4: {
      std::u32string w = utf8::decode(tokens[pos]);
      const std::size_t at = 1 + rng.below(w.size());
      w.insert(w.begin() + static_cast<long>(at), kMarks[rng.below(6)]);
      tokens[pos] = utf8::encode(w);
      break;
    }
    case 5: {
      std::u32string w = utf8::decode(tokens[pos]);
      const std::size_t at = rng.below(w.size());
      w.insert(w.begin() + static_cast<long>(at), 3 + rng.below(3), w[at]);
      tokens[pos] = utf8::encode(w);
      break;
    }
    default:
      tokens[pos] += rng.bernoulli(0.5) ? "!!" : "\xD8\x9F";  // "؟"
      break;
  }
}

}  // namespace

SyntheticLexicon synthetic_lexicon(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, 1));
  std::set<std::string> used;
  auto fresh = [&] {
    for (;;) {
      std::string w = random_word(rng);
      if (used.insert(w).second) return w;
    }
  };
  SyntheticLexicon lex;
  lex.per_class.resize(spec.num_classes);
  for (auto& words : lex.per_class) {
    for (std::size_t i = 0; i < spec.vocab_per_class; ++i) words.push_back(fresh());
  }
  for (std::size_t i = 0; i < spec.shared_vocab; ++i) lex.shared.push_back(fresh());
  return lex;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  const SyntheticLexicon lex = synthetic_lexicon(spec);
  Rng rng(derive_seed(spec.seed, 2 + spec.sample_stream));
  Dataset ds;
  ds.provenance = "synthetic";
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    const DialectLabel label = label_at(c);
    const auto& own = lex.per_class[c];
    for (std::size_t n = 0; n < spec.count_for(label); ++n) {
      const std::size_t len = spec.min_tokens + rng.below(spec.max_tokens - spec.min_tokens + 1);
      std::vector<std::string> tokens;
      tokens.reserve(len + 1);
      for (std::size_t t = 0; t < len; ++t) {
        if (rng.bernoulli(spec.noise_rate))
          tokens.push_back(lex.shared[rng.below(lex.shared.size())]);
        else
          tokens.push_back(own[rng.below(own.size())]);
      }
      if (spec.surface_noise > 0.0 && rng.bernoulli(spec.surface_noise))
        inject_surface_noise(tokens, rng);
      ds.examples.push_back({utf8::join(tokens, " "), label});
    }
  }
  return ds;
}

}  // namespace dialectid
