#pragma once

#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rankwise/assessment.hpp"
#include "rankwise/inference.hpp"
#include "rankwise/rank.hpp"
#include "rankwise/rules/ast.hpp"
#include "rankwise/stage.hpp"

namespace rankwise {

using json = nlohmann::ordered_json;

struct Conclusions {
  Stage stage = Stage::FAIL;
  std::set<Rank> eligible;  // after gating by current rank

  bool operator==(const Conclusions&) const = default;
};

/// Immutable record of one evaluation: its inputs, the rule base used, every
/// firing in order, and the conclusions drawn.
struct ExplanationTrace {
  std::string trace_id;
  MarkSheet sheet;
  WeightTable weights;
  CompositeScore composite;
  Rank current_rank = Rank::CadetOfficer;
  std::string ruleset;  // canonical text of the rules evaluated
  std::vector<inference::FiredRule> firings;
  Conclusions conclusions;

  const std::string& cadet_id() const { return sheet.cadet_id; }
  const std::string& cycle() const { return sheet.cycle; }
};

/// Facts asserted for an evaluation: composite, the twelve component marks
/// (by component key) and current_rank.
inference::WorkingMemory input_memory(const MarkSheet& sheet, CompositeScore composite, Rank current_rank);

/// Validates that the composite matches the sheet, that every firing names a
/// rule of the rule base with a dense sequence number, and that each recorded
/// snapshot agrees with the inputs and satisfies its rule's condition. Throws
/// ValidationError otherwise. The trace id is derived from the content.
ExplanationTrace build_trace(const MarkSheet& sheet, const WeightTable& weights, CompositeScore composite,
                             Rank current_rank, const rules::RuleSet& rules,
                             std::vector<inference::FiredRule> firings, Conclusions conclusions);

/// One paragraph: cadet, cycle, composite, stage and eligible ranks.
std::string render_general(const ExplanationTrace& trace);

/// Per-component contribution table, each firing with substituted values, then
/// the general summary.
std::string render_detailed(const ExplanationTrace& trace);

json value_to_json(const std::optional<rules::Value>& value);
std::optional<rules::Value> value_from_json(const json& j);

json trace_to_json(const ExplanationTrace& trace);
/// Throws ValidationError on a malformed document.
ExplanationTrace trace_from_json(const json& j);

json marks_to_json(const std::map<ComponentId, Fixed2>& marks);
/// Accepts decimal strings or integers. Unknown keys are rejected; missing
/// components are left absent for validate_sheet to report.
std::map<ComponentId, Fixed2> marks_from_json(const json& j);

json ranks_to_json(const std::set<Rank>& ranks);

}  // namespace rankwise
