#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rankwise/assessment.hpp"
#include "rankwise/explanation.hpp"
#include "rankwise/rank.hpp"
#include "rankwise/rules/ast.hpp"
#include "rankwise/stage.hpp"

namespace rankwise {

/// HIGH [80, 100], AVERAGE [60, 80), LOW [50, 60), FAIL [0, 50).
/// Throws ValidationError outside [0, 100].
Stage classify_stage(CompositeScore score);

/// Ranks strictly above the given one.
std::set<Rank> ranks_above(Rank current);

/// Ranks granted by the rules for a stage, restricted to ranks above the
/// current one. FAIL always yields the empty set.
std::set<Rank> eligible_ranks(Stage stage, Rank current, const rules::RuleSet& rules);

/// Reads the stage and gated eligibility from a final working memory. Throws
/// ValidationError if the rules concluded no valid stage.
Conclusions conclude(const inference::WorkingMemory& memory, Rank current);

struct Evaluation {
  CompositeScore composite;
  Stage stage = Stage::FAIL;
  std::set<Rank> eligible;
  ExplanationTrace trace;
};

/// Composite, forward chaining over the input facts, gating and trace.
Evaluation evaluate(const MarkSheet& sheet, const WeightTable& table, const rules::RuleSet& rules, Rank current);

struct ReplayResult {
  bool matches = false;
  std::string mismatch;  // empty when matches
};

/// Re-runs the recorded rule base on the recorded inputs and compares firings
/// and conclusions with the trace.
ReplayResult replay(const ExplanationTrace& trace);

using MarkChanges = std::map<ComponentId, Fixed2>;

/// Same computation as evaluate on a modified copy of the sheet; nothing is
/// persisted.
Evaluation what_if(const MarkSheet& base, const MarkChanges& changes, const WeightTable& table,
                   const rules::RuleSet& rules, Rank current);

struct CoachNote {
  std::string cadet_id;
  std::string cycle;
  std::string author;
  std::string text;
  std::string timestamp;  // ISO-8601 UTC, milliseconds

  bool operator==(const CoachNote&) const = default;
};

struct Candidate {
  MarkSheet sheet;
  Rank current_rank = Rank::CadetOfficer;
};

struct RankingEntry {
  std::string cadet_id;
  std::string cycle;
  Rank current_rank = Rank::CadetOfficer;
  CompositeScore composite;
  Fixed2 coach_observation;
  Stage stage = Stage::FAIL;
  std::set<Rank> eligible;
  bool tie_break_used = false;  // composite tied with another cadet
  bool manual_review = false;   // still tied after the coach-observation mark
  std::vector<CoachNote> notes;  // attached for tied cadets only

  bool operator==(const RankingEntry&) const = default;
};

/// Orders by composite (descending), then coach-observation mark (descending),
/// then cadet id. Cadets sharing a composite get tie_break_used; those also
/// sharing the coach-observation mark get manual_review. Both receive their
/// coach notes for the cycle. Throws ValidationError on duplicate cadet ids.
std::vector<RankingEntry> rank_cadets(const std::vector<Candidate>& candidates, const WeightTable& table,
                                      const rules::RuleSet& rules, const std::vector<CoachNote>& notes);

}  // namespace rankwise
