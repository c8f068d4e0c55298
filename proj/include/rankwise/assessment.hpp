#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rankwise/fixed_point.hpp"

namespace rankwise {

/// The twelve standard-testing components. The set is closed.
enum class ComponentId {
  Leadership,
  TheoryPaper1,
  TheoryPaper2,
  MilitaryPractical,
  MilitaryIMP,
  Marching,
  Weapons,
  ShootingSkill,
  WarField,
  Sports,
  Attendance,
  CoachObservation,
};

inline constexpr std::size_t kComponentCount = 12;

inline constexpr std::array<ComponentId, kComponentCount> kAllComponents = {
    ComponentId::Leadership,    ComponentId::TheoryPaper1, ComponentId::TheoryPaper2, ComponentId::MilitaryPractical,
    ComponentId::MilitaryIMP,   ComponentId::Marching,     ComponentId::Weapons,      ComponentId::ShootingSkill,
    ComponentId::WarField,      ComponentId::Sports,       ComponentId::Attendance,   ComponentId::CoachObservation,
};

/// snake_case key used for CSV columns, JSON fields and rule attributes.
std::string_view component_key(ComponentId id);
/// Human-readable label for tables.
std::string_view component_label(ComponentId id);
std::optional<ComponentId> parse_component_key(std::string_view key);

struct WeightEntry {
  ComponentId component;
  int weight;  // percentage points
};

/// Component weights. Stored as a list so that malformed tables (missing or
/// repeated components) can be represented and reported by validate_weights.
struct WeightTable {
  std::vector<WeightEntry> entries;

  /// The standard table: 14,12,12,12,12,6,6,4,10,3,6,3.
  static WeightTable standard();

  /// Weight of a component; 0 if absent.
  int weight(ComponentId id) const;
  int sum() const;
};

struct WeightViolation {
  std::optional<ComponentId> component;  // empty for the sum violation
  std::string message;
};

/// Empty result means the table is valid.
std::vector<WeightViolation> validate_weights(const WeightTable& table);

struct MarkSheet {
  std::string cadet_id;
  std::string cycle;
  std::map<ComponentId, Fixed2> marks;

  bool operator==(const MarkSheet&) const = default;
};

/// Throws ValidationError naming the component (or field) on the first problem:
/// empty ids, a missing component, or a mark outside [0, 100].
void validate_sheet(const MarkSheet& sheet);

struct CompositeScore {
  Fixed2 value;
  auto operator<=>(const CompositeScore&) const = default;
};

/// Weighted composite: the exact sum of mark * weight / 100 over all components,
/// rounded once, half up, to hundredths.
CompositeScore compute_composite(const MarkSheet& sheet, const WeightTable& table);

struct Contribution {
  ComponentId component;
  Fixed2 mark;
  int weight;
  std::int64_t ten_thousandths;  // mark * weight / 100, exact
};

std::vector<Contribution> weighted_contributions(const MarkSheet& sheet, const WeightTable& table);

/// Formats a value in ten-thousandths with four fraction digits ("11.9000").
std::string format_ten_thousandths(std::int64_t value);

}  // namespace rankwise
