#include "rankwise/board.hpp"

#include <set>

#include "rankwise/csv.hpp"
#include "rankwise/error.hpp"

namespace rankwise {

PromotionBoard::PromotionBoard(Store& store, rules::RuleSet rules, WeightTable weights)
    : store_(store), rules_(std::move(rules)), weights_(std::move(weights)) {
  const auto violations = validate_weights(weights_);
  if (!violations.empty()) throw ValidationError("invalid weight table: " + violations.front().message, "weights");
}

std::string PromotionBoard::resolve_cycle(const std::optional<std::string>& cadet_id,
                                          const std::optional<std::string>& cycle) const {
  if (cycle) return *cycle;
  if (cadet_id) {
    const auto latest = store_.latest_sheet(*cadet_id);
    if (!latest) throw NotFoundError("no marks submitted for cadet '" + *cadet_id + "'", "cycle");
    return latest->sheet.cycle;
  }
  const auto latest = store_.latest_cycle();
  if (!latest) throw NotFoundError("no marks submitted yet", "cycle");
  return *latest;
}

StoredSheet PromotionBoard::stored_sheet(const std::string& cadet_id, const std::optional<std::string>& cycle) const {
  store_.get_cadet(cadet_id);
  const std::string c = resolve_cycle(cadet_id, cycle);
  auto stored = store_.latest_sheet(cadet_id, c);
  if (!stored) throw NotFoundError("no marks for cadet '" + cadet_id + "' in cycle '" + c + "'", "cycle");
  return *stored;
}

Evaluation PromotionBoard::evaluate(const std::string& cadet_id, const std::optional<std::string>& cycle) {
  const StoredSheet stored = stored_sheet(cadet_id, cycle);
  const Rank rank = store_.get_cadet(cadet_id).current_rank;
  Evaluation e = rankwise::evaluate(stored.sheet, weights_, rules_, rank);
  store_.record_trace(e.trace);
  return e;
}

Evaluation PromotionBoard::what_if(const std::string& cadet_id, const std::optional<std::string>& cycle,
                                   const MarkChanges& changes) const {
  const StoredSheet stored = stored_sheet(cadet_id, cycle);
  const Rank rank = store_.get_cadet(cadet_id).current_rank;
  return rankwise::what_if(stored.sheet, changes, weights_, rules_, rank);
}

Evaluation PromotionBoard::what_if(const MarkSheet& sheet, Rank current_rank) const {
  validate_sheet(sheet);
  return rankwise::evaluate(sheet, weights_, rules_, current_rank);
}

std::vector<RankingEntry> PromotionBoard::rankings(const std::string& cycle) const {
  std::vector<Candidate> candidates;
  for (const auto& stored : store_.sheets_for_cycle(cycle)) {
    candidates.push_back({stored.sheet, store_.get_cadet(stored.sheet.cadet_id).current_rank});
  }
  std::vector<CoachNote> notes;
  for (const auto& n : store_.all_notes()) {
    if (n.cycle == cycle) notes.push_back(n);
  }
  return rank_cadets(candidates, weights_, rules_, notes);
}

ImportSummary PromotionBoard::import_csv(std::string_view text, bool resubmit) {
  const auto sheets = parse_marks_csv(text);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& s : sheets) {
    if (!seen.emplace(s.cadet_id, s.cycle).second && !resubmit) {
      throw DuplicateError("cadet '" + s.cadet_id + "' appears twice for cycle '" + s.cycle + "'", "cycle");
    }
    if (!resubmit && store_.latest_sheet(s.cadet_id, s.cycle)) {
      throw DuplicateError("marks for cadet '" + s.cadet_id + "' in cycle '" + s.cycle +
                               "' already submitted; resubmit to replace them",
                           "cycle");
    }
  }
  ImportSummary summary;
  std::set<std::string> known;
  for (const auto& c : store_.list_cadets()) known.insert(c.cadet_id);
  for (const auto& s : sheets) {
    if (known.insert(s.cadet_id).second) {
      store_.put_cadet(CadetRecord{s.cadet_id, {}, Rank::CadetOfficer, s.cycle});
      summary.created_cadets.push_back(s.cadet_id);
    }
    const bool replace = resubmit && store_.latest_sheet(s.cadet_id, s.cycle).has_value();
    summary.assessment_ids.push_back(store_.submit_marks(s, replace));
  }
  return summary;
}

}  // namespace rankwise
