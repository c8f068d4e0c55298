#pragma once

#include <optional>
#include <string_view>

namespace rankwise {

/// Performance stage, ordered FAIL < LOW < AVERAGE < HIGH.
enum class Stage { FAIL, LOW, AVERAGE, HIGH };

constexpr std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::FAIL: return "FAIL";
    case Stage::LOW: return "LOW";
    case Stage::AVERAGE: return "AVERAGE";
    case Stage::HIGH: return "HIGH";
  }
  return "?";
}

constexpr std::optional<Stage> parse_stage(std::string_view name) {
  if (name == "HIGH") return Stage::HIGH;
  if (name == "AVERAGE") return Stage::AVERAGE;
  if (name == "LOW") return Stage::LOW;
  if (name == "FAIL") return Stage::FAIL;
  return std::nullopt;
}

}  // namespace rankwise
