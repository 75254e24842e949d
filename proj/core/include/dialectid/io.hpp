#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace dialectid::io {

// Reads a whole file. Throws DataError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Splits file content into lines (LF; a trailing CR is stripped).
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes through a temporary sibling file and renames it into place, so
// the destination is either untouched or complete.
void write_atomic(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer,
                  bool binary = false);

}  // namespace dialectid::io
