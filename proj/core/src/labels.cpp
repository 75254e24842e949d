#include "dialectid/labels.hpp"

#include "dialectid/error.hpp"

namespace dialectid {

namespace {

constexpr std::array<std::string_view, kNumLabels> kNames = {
    "Egypt",   "Iraq",    "Saudi_Arabia", "Algeria",  "Oman",       "Emirates", "Libya",
    "Syria",   "Morocco", "Yemen",        "Tunisia",  "Lebanon",    "Jordan",   "Kuwait",
    "Palestine", "Qatar", "Bahrain",      "Djibouti", "Mauritania", "Somalia",  "Sudan",
};

constexpr std::array<DialectLabel, kNumLabels> make_all() {
  std::array<DialectLabel, kNumLabels> out{};
  for (std::size_t i = 0; i < kNumLabels; ++i) out[i] = static_cast<DialectLabel>(i);
  return out;
}

constexpr std::array<DialectLabel, kNumLabels> kAll = make_all();

}  // namespace

DialectLabel label_at(std::size_t index) {
  if (index >= kNumLabels) throw ConfigError("label index out of range: " + std::to_string(index));
  return kAll[index];
}

const std::array<DialectLabel, kNumLabels>& all_labels() { return kAll; }

std::string_view label_name(DialectLabel label) { return kNames[index_of(label)]; }

bool try_parse_label(std::string_view name, DialectLabel& out) {
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (kNames[i] == name) {
      out = kAll[i];
      return true;
    }
  }
  return false;
}

DialectLabel parse_label(std::string_view name) {
  DialectLabel label{};
  if (!try_parse_label(name, label)) throw ConfigError("unknown label: " + std::string(name));
  return label;
}

}  // namespace dialectid
