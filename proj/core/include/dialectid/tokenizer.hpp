#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dialectid {

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kUnkId = 1;
inline constexpr std::int32_t kClsId = 2;
inline constexpr std::int32_t kSepId = 3;
inline constexpr std::int32_t kMaskId = 4;
inline constexpr std::int32_t kNumSpecial = 5;

inline constexpr std::string_view kEndOfWord = "</w>";

constexpr bool is_special_id(std::int32_t id) { return id >= 0 && id < kNumSpecial; }

// Byte-pair-encoding vocabulary over code points. Ids: specials 0..4, then
// every base code point c as `c` and `c</w>` (ascending code point), then
// merge results in learned order.
class Vocab {
 public:
  using Merge = std::pair<std::string, std::string>;

  Vocab() = default;
  Vocab(std::vector<char32_t> alphabet, std::vector<Merge> merges);

  std::size_t size() const { return id_to_token_.size(); }
  const std::vector<char32_t>& alphabet() const { return alphabet_; }
  const std::vector<Merge>& merges() const { return merges_; }

  // -1 when absent.
  std::int32_t id_of(std::string_view token) const;
  const std::string& token_of(std::int32_t id) const;
  // -1 when the pair is not a learned merge.
  std::int32_t merge_rank(const std::string& left, const std::string& right) const;

  // `BPEV1 <size>`, five special lines, one line per base code point,
  // then `left right` per merge.
  std::string serialize() const;
  static Vocab deserialize(const std::string& content);
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.alphabet_ == b.alphabet_ && a.merges_ == b.merges_;
  }

 private:
  std::vector<char32_t> alphabet_;
  std::vector<Merge> merges_;
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, std::int32_t> token_to_id_;
  std::unordered_map<std::string, std::int32_t> merge_rank_;
};

const std::vector<std::string>& special_tokens();

// Learns merges until the vocabulary holds vocab_size tokens or no pair
// reaches min_freq. Ties go to the lexicographically smallest pair.
Vocab train_bpe(std::span<const std::string> corpus, std::size_t vocab_size,
                std::size_t min_freq = 1);

// Subword symbols (word-final symbols carry `</w>`); unknown symbols are
// emitted as "[UNK]".
std::vector<std::string> tokenize(std::string_view text, const Vocab& v);

// Symbol text without the end-of-word marker.
std::string piece_text(std::string_view symbol);

struct EncodingConfig {
  std::size_t max_len = 64;
  bool add_cls_sep = true;
  void validate() const;
};

struct Encoding {
  std::vector<std::int32_t> ids;
  std::vector<std::uint8_t> mask;
  std::size_t num_real = 0;

  std::size_t length() const { return ids.size(); }
};

Encoding encode(std::string_view text, const Vocab& v, const EncodingConfig& cfg);

// Drops specials; word-final markers become spaces.
std::string decode(std::span<const std::int32_t> ids, const Vocab& v);

}  // namespace dialectid
