#include "dialectid/tokenizer.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "dialectid/error.hpp"
#include "dialectid/io.hpp"
#include "dialectid/utf8.hpp"

namespace dialectid {

namespace {

std::string merge_key(const std::string& left, const std::string& right) {
  std::string key;
  key.reserve(left.size() + right.size() + 1);
  key.append(left);
  key.push_back(' ');
  key.append(right);
  return key;
}

std::string code_point(char32_t cp) {
  std::string s;
  utf8::append(s, cp);
  return s;
}

// Splits a word into base symbols, marking the last as word-final.
std::vector<std::string> initial_symbols(const std::u32string& word) {
  std::vector<std::string> out;
  out.reserve(word.size());
  for (char32_t cp : word) out.push_back(code_point(cp));
  out.back().append(kEndOfWord);
  return out;
}

}  // namespace

const std::vector<std::string>& special_tokens() {
  static const std::vector<std::string> kSpecials = {"[PAD]", "[UNK]", "[CLS]", "[SEP]",
                                                     "[MASK]"};
  return kSpecials;
}

Vocab::Vocab(std::vector<char32_t> alphabet, std::vector<Merge> merges)
    : alphabet_(std::move(alphabet)), merges_(std::move(merges)) {
  std::sort(alphabet_.begin(), alphabet_.end());
  alphabet_.erase(std::unique(alphabet_.begin(), alphabet_.end()), alphabet_.end());
  auto add = [&](const std::string& tok) {
    if (token_to_id_.emplace(tok, static_cast<std::int32_t>(id_to_token_.size())).second)
      id_to_token_.push_back(tok);
  };
  for (const auto& s : special_tokens()) add(s);
  for (char32_t cp : alphabet_) {
    add(code_point(cp));
    add(code_point(cp) + std::string(kEndOfWord));
  }
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    const auto& [l, rgt] = merges_[r];
    merge_rank_.emplace(merge_key(l, rgt), static_cast<std::int32_t>(r));
    add(l + rgt);
  }
}

std::int32_t Vocab::id_of(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? -1 : it->second;
}

const std::string& Vocab::token_of(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
    throw DataError("token id out of range: " + std::to_string(id));
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::int32_t Vocab::merge_rank(const std::string& left, const std::string& right) const {
  auto it = merge_rank_.find(merge_key(left, right));
  return it == merge_rank_.end() ? -1 : it->second;
}

std::string Vocab::serialize() const {
  std::string out = "BPEV1 " + std::to_string(size()) + "\n";
  for (const auto& s : special_tokens()) out += s + "\n";
  for (char32_t cp : alphabet_) out += code_point(cp) + "\n";
  for (const auto& [l, r] : merges_) out += l + " " + r + "\n";
  return out;
}

Vocab Vocab::deserialize(const std::string& content) {
  std::vector<std::string> lines;
  {
    std::istringstream in(content);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
    }
  }
  if (lines.empty() || lines[0].rfind("BPEV1 ", 0) != 0)
    throw DataError("vocab: missing BPEV1 header");
  std::size_t declared = 0;
  try {
    declared = std::stoul(lines[0].substr(6));
  } catch (const std::exception&) {
    throw DataError("vocab: malformed header");
  }
  if (lines.size() < 1 + special_tokens().size()) throw DataError("vocab: truncated specials");
  for (std::size_t i = 0; i < special_tokens().size(); ++i) {
    if (lines[1 + i] != special_tokens()[i])
      throw DataError("vocab: unexpected special token at line " + std::to_string(i + 2));
  }
  std::vector<char32_t> alphabet;
  std::vector<Merge> merges;
  for (std::size_t i = 1 + special_tokens().size(); i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) {
      const auto cps = utf8::decode(line);
      if (cps.size() != 1 || !merges.empty())
        throw DataError("vocab: malformed alphabet entry at line " + std::to_string(i + 1));
      alphabet.push_back(cps[0]);
    } else {
      if (line.find(' ', sp + 1) != std::string::npos || sp == 0 || sp + 1 == line.size())
        throw DataError("vocab: malformed merge at line " + std::to_string(i + 1));
      merges.emplace_back(line.substr(0, sp), line.substr(sp + 1));
    }
  }
  Vocab v(std::move(alphabet), std::move(merges));
  if (v.size() != declared) throw DataError("vocab: size does not match header");
  return v;
}

void Vocab::save(const std::filesystem::path& path) const {
  const std::string content = serialize();
  io::write_atomic(path, [&](std::ostream& os) { os << content; });
}

Vocab Vocab::load(const std::filesystem::path& path) { return deserialize(io::read_file(path)); }

Vocab train_bpe(std::span<const std::string> corpus, std::size_t vocab_size, std::size_t min_freq) {
  if (corpus.empty()) throw ConfigError("train_bpe: empty corpus");
  if (min_freq < 1) throw ConfigError("train_bpe: min_freq must be >= 1");

  std::map<std::u32string, std::size_t> word_counts;
  std::set<char32_t> alphabet_set;
  for (const auto& line : corpus) {
    for (const auto& w : utf8::split_whitespace(line)) {
      auto cps = utf8::decode(w);
      alphabet_set.insert(cps.begin(), cps.end());
      ++word_counts[std::move(cps)];
    }
  }
  if (word_counts.empty()) throw ConfigError("train_bpe: corpus has no words");
  std::vector<char32_t> alphabet(alphabet_set.begin(), alphabet_set.end());
  const std::size_t base_size = static_cast<std::size_t>(kNumSpecial) + 2 * alphabet.size();
  if (vocab_size < base_size)
    throw ConfigError("train_bpe: vocab_size " + std::to_string(vocab_size) +
                      " below base alphabet size " + std::to_string(base_size));

  struct Word {
    std::vector<std::string> symbols;
    std::size_t count;
  };
  std::vector<Word> words;
  words.reserve(word_counts.size());
  for (const auto& [w, n] : word_counts) words.push_back({initial_symbols(w), n});

  using Pair = std::pair<std::string, std::string>;
  std::map<Pair, std::size_t> pair_freq;
  std::map<Pair, std::set<std::size_t>> pair_words;
  // Ordered by (-frequency, pair): begin() is the next merge.
  std::set<std::pair<long long, Pair>> queue;

  auto adjust = [&](const Pair& p, long long delta, std::size_t word_index) {
    auto& f = pair_freq[p];
    if (f > 0) queue.erase({-static_cast<long long>(f), p});
    f = static_cast<std::size_t>(static_cast<long long>(f) + delta);
    if (f > 0) {
      queue.insert({-static_cast<long long>(f), p});
      pair_words[p].insert(word_index);
    }
  };
  auto add_word_pairs = [&](std::size_t wi, long long sign) {
    const auto& syms = words[wi].symbols;
    for (std::size_t i = 0; i + 1 < syms.size(); ++i)
      adjust({syms[i], syms[i + 1]}, sign * static_cast<long long>(words[wi].count), wi);
  };
  for (std::size_t wi = 0; wi < words.size(); ++wi) add_word_pairs(wi, +1);

  std::vector<Vocab::Merge> merges;
  std::set<std::string> tokens;
  for (const auto& s : special_tokens()) tokens.insert(s);
  for (char32_t cp : alphabet) {
    tokens.insert(code_point(cp));
    tokens.insert(code_point(cp) + std::string(kEndOfWord));
  }

  while (tokens.size() < vocab_size && !queue.empty()) {
    const auto [neg_freq, best] = *queue.begin();
    if (static_cast<std::size_t>(-neg_freq) < min_freq) break;
    merges.push_back(best);
    const std::string merged = best.first + best.second;
    tokens.insert(merged);

    const auto affected = pair_words[best];
    for (std::size_t wi : affected) {
      auto& syms = words[wi].symbols;
      bool present = false;
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
        if (syms[i] == best.first && syms[i + 1] == best.second) {
          present = true;
          break;
        }
      }
      if (!present) continue;
      add_word_pairs(wi, -1);
      std::vector<std::string> next;
      next.reserve(syms.size());
      for (std::size_t i = 0; i < syms.size(); ++i) {
        if (i + 1 < syms.size() && syms[i] == best.first && syms[i + 1] == best.second) {
          next.push_back(merged);
          ++i;
        } else {
          next.push_back(syms[i]);
        }
      }
      syms = std::move(next);
      add_word_pairs(wi, +1);
    }
  }
  return Vocab(std::move(alphabet), std::move(merges));
}

std::vector<std::string> tokenize(std::string_view text, const Vocab& v) {
  std::vector<std::string> out;
  for (const auto& w : utf8::split_whitespace(text)) {
    std::vector<std::string> syms = initial_symbols(utf8::decode(w));
    for (;;) {
      std::int32_t best_rank = -1;
      std::size_t best_at = 0;
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
        const std::int32_t r = v.merge_rank(syms[i], syms[i + 1]);
        if (r >= 0 && (best_rank < 0 || r < best_rank)) {
          best_rank = r;
          best_at = i;
        }
      }
      if (best_rank < 0) break;
      const auto& [l, r] = v.merges()[static_cast<std::size_t>(best_rank)];
      std::vector<std::string> next;
      next.reserve(syms.size());
      for (std::size_t i = 0; i < syms.size(); ++i) {
        if (i >= best_at && i + 1 < syms.size() && syms[i] == l && syms[i + 1] == r) {
          next.push_back(l + r);
          ++i;
        } else {
          next.push_back(syms[i]);
        }
      }
      syms = std::move(next);
    }
    const std::string& unk = special_tokens()[kUnkId];
    bool last_unk = false;
    for (auto& s : syms) {
      if (v.id_of(s) < 0) {
        if (!last_unk) out.push_back(unk);
        last_unk = true;
      } else {
        out.push_back(std::move(s));
        last_unk = false;
      }
    }
  }
  return out;
}

std::string piece_text(std::string_view symbol) {
  if (symbol.size() >= kEndOfWord.size() &&
      symbol.substr(symbol.size() - kEndOfWord.size()) == kEndOfWord)
    return std::string(symbol.substr(0, symbol.size() - kEndOfWord.size()));
  return std::string(symbol);
}

void EncodingConfig::validate() const {
  if (max_len < 1) throw ConfigError("max_len must be positive");
  if (add_cls_sep && max_len < 3) throw ConfigError("max_len must be >= 3 with [CLS]/[SEP]");
}

Encoding encode(std::string_view text, const Vocab& v, const EncodingConfig& cfg) {
  cfg.validate();
  const auto symbols = tokenize(text, v);
  Encoding enc;
  enc.ids.reserve(cfg.max_len);
  const std::size_t room = cfg.add_cls_sep ? cfg.max_len - 2 : cfg.max_len;
  if (cfg.add_cls_sep) enc.ids.push_back(kClsId);
  for (std::size_t i = 0; i < symbols.size() && i < room; ++i) {
    const std::int32_t id = v.id_of(symbols[i]);
    enc.ids.push_back(id < 0 ? kUnkId : id);
  }
  if (cfg.add_cls_sep) enc.ids.push_back(kSepId);
  enc.num_real = enc.ids.size();
  enc.mask.assign(enc.num_real, 1);
  enc.ids.resize(cfg.max_len, kPadId);
  enc.mask.resize(cfg.max_len, 0);
  return enc;
}

std::string decode(std::span<const std::int32_t> ids, const Vocab& v) {
  std::string out;
  for (std::int32_t id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= v.size())
      throw DataError("decode: id out of range: " + std::to_string(id));
    if (is_special_id(id)) continue;
    const std::string& tok = v.token_of(id);
    const std::string piece = piece_text(tok);
    out.append(piece);
    if (piece.size() != tok.size()) out.push_back(' ');
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace dialectid
