#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace rankwise {

/// Cadet ranks, lowest to highest. The enumerator order is the promotion order.
enum class Rank { CadetOfficer, LanceCorporal, Corporal, Sergeant, JUO, SUO };

inline constexpr std::array<Rank, 6> kAllRanks = {Rank::CadetOfficer, Rank::LanceCorporal, Rank::Corporal,
                                                  Rank::Sergeant,     Rank::JUO,           Rank::SUO};

constexpr std::string_view to_string(Rank rank) {
  switch (rank) {
    case Rank::CadetOfficer: return "CadetOfficer";
    case Rank::LanceCorporal: return "LanceCorporal";
    case Rank::Corporal: return "Corporal";
    case Rank::Sergeant: return "Sergeant";
    case Rank::JUO: return "JUO";
    case Rank::SUO: return "SUO";
  }
  return "?";
}

constexpr std::optional<Rank> parse_rank(std::string_view name) {
  for (Rank r : kAllRanks) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

}  // namespace rankwise
