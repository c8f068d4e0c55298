#include "rankwise/assessment.hpp"

#include <algorithm>
#include <cstdlib>

#include "rankwise/error.hpp"

namespace rankwise {

namespace {

struct ComponentNames {
  ComponentId id;
  std::string_view key;
  std::string_view label;
};

constexpr std::array<ComponentNames, kComponentCount> kNames = {{
    {ComponentId::Leadership, "leadership", "Leadership"},
    {ComponentId::TheoryPaper1, "theory_paper1", "Theory Paper 1"},
    {ComponentId::TheoryPaper2, "theory_paper2", "Theory Paper 2"},
    {ComponentId::MilitaryPractical, "military_practical", "Military Practical"},
    {ComponentId::MilitaryIMP, "military_imp", "Military IMP"},
    {ComponentId::Marching, "marching", "Marching"},
    {ComponentId::Weapons, "weapons", "Weapons"},
    {ComponentId::ShootingSkill, "shooting_skill", "Shooting Skill"},
    {ComponentId::WarField, "war_field", "War Field"},
    {ComponentId::Sports, "sports", "Sports"},
    {ComponentId::Attendance, "attendance", "Attendance"},
    {ComponentId::CoachObservation, "coach_observation", "Coach Observation"},
}};

const ComponentNames& names_of(ComponentId id) { return kNames[static_cast<std::size_t>(id)]; }

}  // namespace

std::string_view component_key(ComponentId id) { return names_of(id).key; }
std::string_view component_label(ComponentId id) { return names_of(id).label; }

std::optional<ComponentId> parse_component_key(std::string_view key) {
  for (const auto& n : kNames) {
    if (n.key == key) return n.id;
  }
  return std::nullopt;
}

WeightTable WeightTable::standard() {
  return WeightTable{{
      {ComponentId::Leadership, 14},
      {ComponentId::TheoryPaper1, 12},
      {ComponentId::TheoryPaper2, 12},
      {ComponentId::MilitaryPractical, 12},
      {ComponentId::MilitaryIMP, 12},
      {ComponentId::Marching, 6},
      {ComponentId::Weapons, 6},
      {ComponentId::ShootingSkill, 4},
      {ComponentId::WarField, 10},
      {ComponentId::Sports, 3},
      {ComponentId::Attendance, 6},
      {ComponentId::CoachObservation, 3},
  }};
}

int WeightTable::weight(ComponentId id) const {
  for (const auto& e : entries) {
    if (e.component == id) return e.weight;
  }
  return 0;
}

int WeightTable::sum() const {
  int total = 0;
  for (const auto& e : entries) total += e.weight;
  return total;
}

std::vector<WeightViolation> validate_weights(const WeightTable& table) {
  std::vector<WeightViolation> violations;
  std::array<int, kComponentCount> seen{};
  for (const auto& e : table.entries) {
    ++seen[static_cast<std::size_t>(e.component)];
    if (e.weight < 0 || e.weight > 100) {
      violations.push_back({e.component, std::string(component_key(e.component)) + ": weight " +
                                             std::to_string(e.weight) + " outside 0..100"});
    }
  }
  for (ComponentId id : kAllComponents) {
    const int count = seen[static_cast<std::size_t>(id)];
    if (count == 0) {
      violations.push_back({id, std::string(component_key(id)) + ": missing"});
    } else if (count > 1) {
      violations.push_back({id, std::string(component_key(id)) + ": listed " + std::to_string(count) + " times"});
    }
  }
  const int total = table.sum();
  if (total != 100) {
    violations.push_back({std::nullopt, "sum = " + std::to_string(total) + " ≠ 100"});
  }
  return violations;
}

void validate_sheet(const MarkSheet& sheet) {
  if (sheet.cadet_id.empty()) throw ValidationError("cadet_id must not be empty", "cadet_id");
  if (sheet.cycle.empty()) throw ValidationError("cycle must not be empty", "cycle");
  for (ComponentId id : kAllComponents) {
    const auto key = std::string(component_key(id));
    const auto it = sheet.marks.find(id);
    if (it == sheet.marks.end()) throw ValidationError("missing mark for " + key, key);
    if (it->second < Fixed2::from_integer(0) || it->second > Fixed2::from_integer(100)) {
      throw ValidationError("mark for " + key + " is " + it->second.to_string() + ", outside 0.00..100.00", key);
    }
  }
}

std::vector<Contribution> weighted_contributions(const MarkSheet& sheet, const WeightTable& table) {
  validate_sheet(sheet);
  std::vector<Contribution> out;
  out.reserve(kComponentCount);
  for (ComponentId id : kAllComponents) {
    const Fixed2 mark = sheet.marks.at(id);
    const int w = table.weight(id);
    // hundredths * percent / 100 * 100 => ten-thousandths
    out.push_back({id, mark, w, mark.hundredths() * w});
  }
  return out;
}

CompositeScore compute_composite(const MarkSheet& sheet, const WeightTable& table) {
  if (auto violations = validate_weights(table); !violations.empty()) {
    throw ValidationError("invalid weight table: " + violations.front().message, "weights");
  }
  std::int64_t total = 0;
  for (const auto& c : weighted_contributions(sheet, table)) total += c.ten_thousandths;
  // Marks are non-negative, so half-up is (x + 50) / 100.
  return CompositeScore{Fixed2::from_hundredths((total + 50) / 100)};
}

std::string format_ten_thousandths(std::int64_t value) {
  const std::int64_t magnitude = std::llabs(value);
  std::string frac = std::to_string(magnitude % 10000);
  frac.insert(0, 4 - frac.size(), '0');
  return (value < 0 ? "-" : "") + std::to_string(magnitude / 10000) + "." + frac;
}

}  // namespace rankwise
