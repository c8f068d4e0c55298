#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rankwise {

/// Decimal value with exactly two fraction digits, stored as integer
/// hundredths. Marks, composites and rule thresholds all use this type so that
/// stage boundaries are compared exactly.
class Fixed2 {
 public:
  constexpr Fixed2() = default;

  static constexpr Fixed2 from_hundredths(std::int64_t hundredths) {
    Fixed2 v;
    v.hundredths_ = hundredths;
    return v;
  }
  static constexpr Fixed2 from_integer(std::int64_t whole) { return from_hundredths(whole * 100); }

  /// Accepts `-?[0-9]+(\.[0-9]{1,2})?`; anything else (including more than two
  /// fraction digits or more than 12 integer digits) yields nullopt.
  static std::optional<Fixed2> parse(std::string_view text);

  constexpr std::int64_t hundredths() const { return hundredths_; }

  /// Always two fraction digits: "85.00", "-0.50".
  std::string to_string() const;
  /// Shortest exact form: "80", "79.5", "0.05".
  std::string to_compact_string() const;

  constexpr auto operator<=>(const Fixed2&) const = default;

 private:
  std::int64_t hundredths_ = 0;
};

}  // namespace rankwise
