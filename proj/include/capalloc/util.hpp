#pragma once

#include <filesystem>
#include <sstream>
#include <string>

namespace capalloc {

// ostringstream one-liner for building messages.
template <class... Parts>
std::string cat(const Parts&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}

// Writes content to a temporary file in the target directory and renames it
// into place, so partially written outputs are never observed.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

inline constexpr const char* kVersion = "capalloc 1.0.0";

}  // namespace capalloc
