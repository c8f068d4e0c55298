#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rankwise/assessment.hpp"
#include "rankwise/promotion.hpp"
#include "rankwise/rules/ast.hpp"
#include "rankwise/store.hpp"

namespace rankwise {

struct ImportSummary {
  std::vector<std::string> created_cadets;
  std::vector<std::string> assessment_ids;  // one per row, in file order
};

/// Promotion workflow over an open store: evaluations, what-if queries,
/// rankings and CSV import.
class PromotionBoard {
 public:
  PromotionBoard(Store& store, rules::RuleSet rules, WeightTable weights = WeightTable::standard());

  Store& store() { return store_; }
  const rules::RuleSet& rules() const { return rules_; }
  const WeightTable& weights() const { return weights_; }

  /// Cycle to use when none is given: the cadet's latest submission, or the
  /// store's latest cycle when no cadet is given. Throws NotFoundError if
  /// there are no marks.
  std::string resolve_cycle(const std::optional<std::string>& cadet_id, const std::optional<std::string>& cycle) const;

  /// Evaluates the stored sheet and records the trace.
  Evaluation evaluate(const std::string& cadet_id, const std::optional<std::string>& cycle);

  /// Nothing is persisted.
  Evaluation what_if(const std::string& cadet_id, const std::optional<std::string>& cycle,
                     const MarkChanges& changes) const;
  Evaluation what_if(const MarkSheet& sheet, Rank current_rank) const;

  /// Every cadet with marks in the cycle, with their notes for that cycle.
  std::vector<RankingEntry> rankings(const std::string& cycle) const;

  /// All rows are checked before anything is written. Unknown cadets are
  /// created at the lowest rank.
  ImportSummary import_csv(std::string_view text, bool resubmit);

 private:
  StoredSheet stored_sheet(const std::string& cadet_id, const std::optional<std::string>& cycle) const;

  Store& store_;
  rules::RuleSet rules_;
  WeightTable weights_;
};

}  // namespace rankwise
