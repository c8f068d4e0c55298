#include "rankwise/archive.hpp"

#include <algorithm>
#include <cstring>

#include "rankwise/error.hpp"

namespace rankwise {

namespace {

constexpr std::size_t kBlock = 512;

// ustar header field offsets and widths
constexpr std::size_t kNameOff = 0, kNameLen = 100;
constexpr std::size_t kModeOff = 100;
constexpr std::size_t kUidOff = 108;
constexpr std::size_t kGidOff = 116;
constexpr std::size_t kSizeOff = 124, kSizeLen = 12;
constexpr std::size_t kMtimeOff = 136, kMtimeLen = 12;
constexpr std::size_t kChksumOff = 148, kChksumLen = 8;
constexpr std::size_t kTypeOff = 156;
constexpr std::size_t kMagicOff = 257;
constexpr std::size_t kVersionOff = 263;

void put_octal(std::string& header, std::size_t offset, std::size_t width, std::uint64_t value) {
  // width - 1 digits, zero padded, NUL terminated
  std::string digits(width - 1, '0');
  for (std::size_t i = width - 1; i-- > 0;) {
    digits[i] = static_cast<char>('0' + (value & 7));
    value >>= 3;
  }
  if (value != 0) throw IoError("tar field overflow");
  header.replace(offset, width - 1, digits);
  header[offset + width - 1] = '\0';
}

std::uint64_t get_octal(std::string_view header, std::size_t offset, std::size_t width) {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < width - 1; ++i) {
    const char c = header[offset + i];
    if (c < '0' || c > '7') throw IoError("corrupt archive: malformed octal field");
    value = (value << 3) | static_cast<std::uint64_t>(c - '0');
  }
  if (header[offset + width - 1] != '\0') throw IoError("corrupt archive: unterminated octal field");
  return value;
}

std::uint64_t header_checksum(std::string_view header) {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < kBlock; ++i) {
    const bool in_field = i >= kChksumOff && i < kChksumOff + kChksumLen;
    sum += in_field ? static_cast<unsigned char>(' ') : static_cast<unsigned char>(header[i]);
  }
  return sum;
}

std::string make_header(const TarEntry& entry, std::int64_t mtime) {
  if (entry.name.empty() || entry.name.size() >= kNameLen) throw IoError("tar entry name too long: " + entry.name);
  std::string h(kBlock, '\0');
  h.replace(kNameOff, entry.name.size(), entry.name);
  put_octal(h, kModeOff, 8, 0644);
  put_octal(h, kUidOff, 8, 0);
  put_octal(h, kGidOff, 8, 0);
  put_octal(h, kSizeOff, kSizeLen, entry.data.size());
  put_octal(h, kMtimeOff, kMtimeLen, static_cast<std::uint64_t>(std::max<std::int64_t>(mtime, 0)));
  h[kTypeOff] = '0';
  h.replace(kMagicOff, 6, std::string("ustar\0", 6));
  h.replace(kVersionOff, 2, "00");
  // checksum: six octal digits, NUL, space
  const std::uint64_t sum = header_checksum(h);
  put_octal(h, kChksumOff, 7, sum);
  h[kChksumOff + 7] = ' ';
  return h;
}

bool all_zero(std::string_view bytes) {
  return std::all_of(bytes.begin(), bytes.end(), [](char c) { return c == '\0'; });
}

std::size_t padded(std::size_t size) { return (size + kBlock - 1) / kBlock * kBlock; }

}  // namespace

std::string write_tar(const std::vector<TarEntry>& entries, std::int64_t mtime_seconds) {
  std::string out;
  for (const auto& e : entries) {
    out += make_header(e, mtime_seconds);
    out += e.data;
    out.append(padded(e.data.size()) - e.data.size(), '\0');
  }
  out.append(2 * kBlock, '\0');
  return out;
}

std::vector<TarEntry> read_tar(std::string_view archive) {
  if (archive.size() % kBlock != 0 || archive.size() < 2 * kBlock) {
    throw IoError("corrupt archive: size is not a whole number of blocks");
  }
  std::vector<TarEntry> entries;
  std::size_t pos = 0;
  for (;;) {
    if (pos + kBlock > archive.size()) throw IoError("corrupt archive: missing end-of-archive marker");
    const std::string_view header = archive.substr(pos, kBlock);
    if (all_zero(header)) break;

    const std::uint64_t recorded = get_octal(header, kChksumOff, 7);
    if (header[kChksumOff + 7] != ' ') throw IoError("corrupt archive: malformed checksum field");
    if (recorded != header_checksum(header)) throw IoError("corrupt archive: header checksum mismatch");
    if (header.substr(kMagicOff, 6) != std::string_view("ustar\0", 6) || header.substr(kVersionOff, 2) != "00") {
      throw IoError("corrupt archive: not a ustar header");
    }
    if (header[kTypeOff] != '0') throw IoError("corrupt archive: unsupported entry type");

    const std::string_view name_field = header.substr(kNameOff, kNameLen);
    const std::size_t name_len = name_field.find('\0');
    if (name_len == 0 || name_len == std::string_view::npos) throw IoError("corrupt archive: bad entry name");

    const std::uint64_t size = get_octal(header, kSizeOff, kSizeLen);
    pos += kBlock;
    if (size > archive.size() - pos || padded(size) > archive.size() - pos) {
      throw IoError("corrupt archive: entry extends past end");
    }
    entries.push_back({std::string(name_field.substr(0, name_len)), std::string(archive.substr(pos, size))});
    if (!all_zero(archive.substr(pos + size, padded(size) - size))) {
      throw IoError("corrupt archive: non-zero padding");
    }
    pos += padded(size);
  }
  // The terminating zero block has been seen; everything after must be zero
  // and at least one further zero block must follow.
  if (archive.size() - pos < 2 * kBlock || !all_zero(archive.substr(pos))) {
    throw IoError("corrupt archive: malformed end-of-archive marker");
  }
  return entries;
}

}  // namespace rankwise
