#include "rankwise/fixed_point.hpp"

#include <cstdlib>

namespace rankwise {

std::optional<Fixed2> Fixed2::parse(std::string_view text) {
  bool negative = false;
  if (!text.empty() && text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  const auto dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() || whole.size() > 12) return std::nullopt;
  if (dot != std::string_view::npos && (frac.empty() || frac.size() > 2)) return std::nullopt;

  std::int64_t value = 0;
  for (char c : whole) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
  }
  std::int64_t cents = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    cents *= 10;
    if (i < frac.size()) {
      const char c = frac[i];
      if (c < '0' || c > '9') return std::nullopt;
      cents += c - '0';
    }
  }
  const std::int64_t total = value * 100 + cents;
  return from_hundredths(negative ? -total : total);
}

std::string Fixed2::to_string() const {
  const std::int64_t magnitude = std::llabs(hundredths_);
  std::string out = hundredths_ < 0 ? "-" : "";
  out += std::to_string(magnitude / 100);
  out += '.';
  const std::int64_t cents = magnitude % 100;
  out += static_cast<char>('0' + cents / 10);
  out += static_cast<char>('0' + cents % 10);
  return out;
}

std::string Fixed2::to_compact_string() const {
  std::string out = to_string();
  while (out.back() == '0') out.pop_back();
  if (out.back() == '.') out.pop_back();
  return out;
}

}  // namespace rankwise
