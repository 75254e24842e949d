#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dialectid::utf8 {

// Decodes UTF-8 into code points. Invalid sequences decode to U+FFFD.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view cps);
void append(std::string& out, char32_t cp);

// Number of code points in a UTF-8 string.
std::size_t length(std::string_view text);

// Splits on ASCII whitespace, discarding empty pieces.
std::vector<std::string> split_whitespace(std::string_view text);

std::string join(const std::vector<std::string>& pieces, std::string_view sep);

}  // namespace dialectid::utf8
