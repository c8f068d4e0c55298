#include "rankwise/promotion.hpp"

#include <algorithm>

#include "rankwise/error.hpp"
#include "rankwise/inference.hpp"
#include "rankwise/rules/parser.hpp"

namespace rankwise {

using rules::Symbol;

Stage classify_stage(CompositeScore score) {
  const std::int64_t h = score.value.hundredths();
  if (h < 0 || h > 10000) {
    throw ValidationError("score " + score.value.to_string() + " outside 0.00..100.00", "composite");
  }
  if (h >= 8000) return Stage::HIGH;
  if (h >= 6000) return Stage::AVERAGE;
  if (h >= 5000) return Stage::LOW;
  return Stage::FAIL;
}

std::set<Rank> ranks_above(Rank current) {
  std::set<Rank> out;
  for (Rank r : kAllRanks) {
    if (r > current) out.insert(r);
  }
  return out;
}

namespace {

std::set<Rank> gate(const inference::WorkingMemory& memory, Stage stage, Rank current) {
  std::set<Rank> out;
  if (stage == Stage::FAIL) return out;
  if (memory.value("eligible_none") == std::optional<rules::Value>{Symbol{"true"}}) return out;
  for (Rank r : memory.eligible_ranks()) {
    if (r > current) out.insert(r);
  }
  return out;
}

}  // namespace

std::set<Rank> eligible_ranks(Stage stage, Rank current, const rules::RuleSet& rules) {
  inference::WorkingMemory memory;
  memory.assert_fact("stage", Symbol{std::string(to_string(stage))});
  memory.assert_fact("current_rank", Symbol{std::string(to_string(current))});
  const auto result = inference::forward_chain(rules, std::move(memory));
  return gate(result.memory, stage, current);
}

Conclusions conclude(const inference::WorkingMemory& memory, Rank current) {
  const auto value = memory.value("stage");
  const auto* symbol = value ? std::get_if<Symbol>(&*value) : nullptr;
  const auto stage = symbol ? parse_stage(symbol->name) : std::nullopt;
  if (!stage) {
    throw ValidationError(value ? "rules concluded an invalid stage '" + rules::to_string(*value) + "'"
                                : "rules did not conclude a stage",
                          "stage");
  }
  return Conclusions{*stage, gate(memory, *stage, current)};
}

Evaluation evaluate(const MarkSheet& sheet, const WeightTable& table, const rules::RuleSet& rules, Rank current) {
  const CompositeScore composite = compute_composite(sheet, table);
  auto result = inference::forward_chain(rules, input_memory(sheet, composite, current));
  Conclusions conclusions = conclude(result.memory, current);
  Evaluation e;
  e.composite = composite;
  e.stage = conclusions.stage;
  e.eligible = conclusions.eligible;
  e.trace = build_trace(sheet, table, composite, current, rules, std::move(result.firings), std::move(conclusions));
  return e;
}

ReplayResult replay(const ExplanationTrace& trace) {
  try {
    const rules::RuleSet rules = rules::parse_rules(trace.ruleset);
    const Evaluation again = evaluate(trace.sheet, trace.weights, rules, trace.current_rank);
    if (again.trace.composite != trace.composite) return {false, "composite differs"};
    if (again.trace.firings != trace.firings) return {false, "firings differ"};
    if (again.trace.conclusions != trace.conclusions) return {false, "conclusions differ"};
    if (again.trace.trace_id != trace.trace_id) return {false, "trace id differs"};
    return {true, {}};
  } catch (const Error& e) {
    return {false, e.what()};
  }
}

Evaluation what_if(const MarkSheet& base, const MarkChanges& changes, const WeightTable& table,
                   const rules::RuleSet& rules, Rank current) {
  MarkSheet modified = base;
  for (const auto& [id, mark] : changes) modified.marks[id] = mark;
  return evaluate(modified, table, rules, current);
}

std::vector<RankingEntry> rank_cadets(const std::vector<Candidate>& candidates, const WeightTable& table,
                                      const rules::RuleSet& rules, const std::vector<CoachNote>& notes) {
  std::set<std::string> seen;
  std::vector<RankingEntry> entries;
  entries.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (!seen.insert(c.sheet.cadet_id).second) {
      throw ValidationError("duplicate cadet_id '" + c.sheet.cadet_id + "' in ranking input", "cadet_id");
    }
    const Evaluation e = evaluate(c.sheet, table, rules, c.current_rank);
    RankingEntry entry;
    entry.cadet_id = c.sheet.cadet_id;
    entry.cycle = c.sheet.cycle;
    entry.current_rank = c.current_rank;
    entry.composite = e.composite;
    entry.coach_observation = c.sheet.marks.at(ComponentId::CoachObservation);
    entry.stage = e.stage;
    entry.eligible = e.eligible;
    entries.push_back(std::move(entry));
  }

  std::sort(entries.begin(), entries.end(), [](const RankingEntry& a, const RankingEntry& b) {
    if (a.composite != b.composite) return a.composite > b.composite;
    if (a.coach_observation != b.coach_observation) return a.coach_observation > b.coach_observation;
    return a.cadet_id < b.cadet_id;
  });

  for (std::size_t i = 0; i < entries.size(); ++i) {
    const bool same_composite_prev = i > 0 && entries[i - 1].composite == entries[i].composite;
    const bool same_composite_next = i + 1 < entries.size() && entries[i + 1].composite == entries[i].composite;
    entries[i].tie_break_used = same_composite_prev || same_composite_next;
    const bool full_tie_prev = same_composite_prev && entries[i - 1].coach_observation == entries[i].coach_observation;
    const bool full_tie_next = same_composite_next && entries[i + 1].coach_observation == entries[i].coach_observation;
    entries[i].manual_review = full_tie_prev || full_tie_next;
  }

  for (auto& entry : entries) {
    if (!entry.tie_break_used) continue;
    for (const auto& note : notes) {
      if (note.cadet_id == entry.cadet_id && note.cycle == entry.cycle) entry.notes.push_back(note);
    }
  }
  return entries;
}

}  // namespace rankwise
