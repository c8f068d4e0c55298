#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rankwise {

struct TarEntry {
  std::string name;
  std::string data;

  bool operator==(const TarEntry&) const = default;
};

/// POSIX ustar archive of regular files (mode 0644), terminated by two zero
/// blocks. Names must be shorter than 100 bytes.
std::string write_tar(const std::vector<TarEntry>& entries, std::int64_t mtime_seconds);

/// Strict reader for archives produced by write_tar: header checksums, octal
/// fields, zero padding and the zero trailer are all verified. Throws IoError
/// on any deviation.
std::vector<TarEntry> read_tar(std::string_view archive);

}  // namespace rankwise
