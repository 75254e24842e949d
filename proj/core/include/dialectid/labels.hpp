#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace dialectid {

// The 21 country-level dialect labels, in the order the task lists them.
enum class DialectLabel : unsigned char {
  Egypt,
  Iraq,
  Saudi_Arabia,
  Algeria,
  Oman,
  Emirates,
  Libya,
  Syria,
  Morocco,
  Yemen,
  Tunisia,
  Lebanon,
  Jordan,
  Kuwait,
  Palestine,
  Qatar,
  Bahrain,
  Djibouti,
  Mauritania,
  Somalia,
  Sudan,
};

inline constexpr std::size_t kNumLabels = 21;

constexpr std::size_t index_of(DialectLabel label) { return static_cast<std::size_t>(label); }

// Throws ConfigError when index >= kNumLabels.
DialectLabel label_at(std::size_t index);

const std::array<DialectLabel, kNumLabels>& all_labels();

std::string_view label_name(DialectLabel label);

// Parses the underscore form (e.g. "Saudi_Arabia"). Throws ConfigError on
// anything else.
DialectLabel parse_label(std::string_view name);

bool try_parse_label(std::string_view name, DialectLabel& out);

}  // namespace dialectid
