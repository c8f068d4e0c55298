#include "rankwise/explanation.hpp"

#include <algorithm>
#include <sstream>

#include "rankwise/digest.hpp"
#include "rankwise/error.hpp"
#include "rankwise/rules/parser.hpp"
#include "rankwise/rules/printer.hpp"

namespace rankwise {

using inference::FiredRule;
using rules::Action;
using rules::Symbol;
using rules::Value;

inference::WorkingMemory input_memory(const MarkSheet& sheet, CompositeScore composite, Rank current_rank) {
  inference::WorkingMemory memory;
  memory.assert_fact("composite", composite.value);
  for (const auto& [id, mark] : sheet.marks) memory.assert_fact(std::string(component_key(id)), mark);
  memory.assert_fact("current_rank", Symbol{std::string(to_string(current_rank))});
  return memory;
}

namespace {

std::string join_ranks(const std::set<Rank>& ranks) {
  std::string out;
  for (Rank r : ranks) {
    if (!out.empty()) out += ", ";
    out += to_string(r);
  }
  return out;
}

std::string join_ranks(const std::vector<Rank>& ranks) {
  std::string out;
  for (Rank r : ranks) {
    if (!out.empty()) out += ", ";
    out += to_string(r);
  }
  return out;
}

}  // namespace

ExplanationTrace build_trace(const MarkSheet& sheet, const WeightTable& weights, CompositeScore composite,
                             Rank current_rank, const rules::RuleSet& rules, std::vector<FiredRule> firings,
                             Conclusions conclusions) {
  const CompositeScore expected = compute_composite(sheet, weights);
  if (expected != composite) {
    throw ValidationError("composite " + composite.value.to_string() + " does not match the mark sheet (" +
                              expected.value.to_string() + ")",
                          "composite");
  }
  const inference::WorkingMemory inputs = input_memory(sheet, composite, current_rank);
  for (std::size_t i = 0; i < firings.size(); ++i) {
    const FiredRule& f = firings[i];
    if (f.sequence != i + 1) {
      throw ValidationError("firing " + std::to_string(i + 1) + " has sequence number " + std::to_string(f.sequence),
                            "firings");
    }
    const rules::Rule* rule = rules.find(f.rule);
    if (!rule) throw ValidationError("firing names unknown rule '" + f.rule + "'", "firings");
    if (f.actions != rule->actions) {
      throw ValidationError("firing of '" + f.rule + "' records actions that differ from the rule", "firings");
    }
    for (const auto& [attribute, value] : f.snapshot) {
      if (const auto input = inputs.value(attribute); input && value != input) {
        throw ValidationError("firing of '" + f.rule + "' saw " + attribute + " = " +
                                  (value ? rules::to_string(*value) : "?") + " but the input has " +
                                  rules::to_string(*input),
                              "firings");
      }
    }
    const auto lookup = [&f](const std::string& a) -> std::optional<Value> {
      const auto it = f.snapshot.find(a);
      return it == f.snapshot.end() ? std::nullopt : it->second;
    };
    if (!inference::holds(rule->condition, lookup)) {
      throw ValidationError("recorded snapshot does not satisfy the condition of '" + f.rule + "'", "firings");
    }
  }

  ExplanationTrace trace;
  trace.sheet = sheet;
  trace.weights = weights;
  trace.composite = composite;
  trace.current_rank = current_rank;
  trace.ruleset = rules::pretty_print(rules);
  trace.firings = std::move(firings);
  trace.conclusions = std::move(conclusions);
  trace.trace_id = "t-" + sha256_hex(trace_to_json(trace).dump()).substr(0, 16);
  return trace;
}

std::string render_general(const ExplanationTrace& trace) {
  std::string out = "Cadet " + trace.cadet_id() + ", cycle " + trace.cycle() + ": composite score " +
                    trace.composite.value.to_string() + ", performance stage " +
                    std::string(to_string(trace.conclusions.stage)) + ".";
  if (trace.conclusions.eligible.empty()) {
    out += " The cadet is not eligible for promotion";
    if (trace.conclusions.stage != Stage::FAIL) {
      out += " above the current rank of " + std::string(to_string(trace.current_rank));
    }
    out += ".";
  } else {
    out += " Eligible for promotion to " + join_ranks(trace.conclusions.eligible) + ".";
  }
  return out + "\n";
}

namespace {

std::string pad(std::string text, std::size_t width) {
  if (text.size() < width) text.append(width - text.size(), ' ');
  return text;
}

std::string pad_left(std::string text, std::size_t width) {
  if (text.size() < width) text.insert(0, width - text.size(), ' ');
  return text;
}

std::string describe_actions(const std::vector<Action>& actions) {
  std::string out;
  for (const auto& a : actions) {
    if (!out.empty()) out += ", ";
    out += a.kind == Action::Kind::Eligible ? "ELIGIBLE(" + join_ranks(a.ranks) + ")" : rules::print_action(a);
  }
  return out;
}

}  // namespace

std::string render_detailed(const ExplanationTrace& trace) {
  std::ostringstream out;
  out << "Detailed explanation for cadet " << trace.cadet_id() << ", cycle " << trace.cycle() << "\n";
  out << "Trace " << trace.trace_id << ", current rank " << to_string(trace.current_rank) << "\n\n";

  out << pad("Component", 20) << pad_left("Mark", 8) << pad_left("Weight", 8) << pad_left("Contribution", 14) << "\n";
  for (const auto& c : weighted_contributions(trace.sheet, trace.weights)) {
    out << pad(std::string(component_label(c.component)), 20) << pad_left(c.mark.to_string(), 8)
        << pad_left(std::to_string(c.weight), 8) << pad_left(format_ten_thousandths(c.ten_thousandths), 14) << "\n";
  }
  out << pad("Composite", 36) << pad_left(trace.composite.value.to_string(), 14) << "\n\n";

  out << "Rules fired:\n";
  if (trace.firings.empty()) {
    out << "  no rules fired\n";
  } else {
    // Rule conditions come from the recorded rule base, so the explanation
    // always matches what was evaluated.
    const rules::RuleSet rules = rules::parse_rules(trace.ruleset);
    for (const auto& f : trace.firings) {
      const rules::Rule* rule = rules.find(f.rule);
      const auto lookup = [&f](const std::string& a) -> std::optional<Value> {
        const auto it = f.snapshot.find(a);
        return it == f.snapshot.end() ? std::nullopt : it->second;
      };
      out << "  " << f.sequence << ". " << f.rule << ": "
          << (rule ? rules::print_condition_with_values(rule->condition, lookup) : std::string("?")) << " => "
          << describe_actions(f.actions) << "\n";
    }
  }
  out << "\nSummary: " << render_general(trace);
  return out.str();
}

json value_to_json(const std::optional<Value>& value) {
  if (!value) return json{{"type", "none"}, {"value", nullptr}};
  if (const auto* n = std::get_if<Fixed2>(&*value)) return json{{"type", "number"}, {"value", n->to_string()}};
  return json{{"type", "symbol"}, {"value", std::get<Symbol>(*value).name}};
}

std::optional<Value> value_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "none") return std::nullopt;
  const std::string text = j.at("value").get<std::string>();
  if (type == "number") {
    const auto n = Fixed2::parse(text);
    if (!n) throw ValidationError("malformed number '" + text + "'", "value");
    return Value{*n};
  }
  if (type == "symbol") return Value{Symbol{text}};
  throw ValidationError("unknown value type '" + type + "'", "type");
}

json marks_to_json(const std::map<ComponentId, Fixed2>& marks) {
  json out = json::object();
  for (ComponentId id : kAllComponents) {
    if (auto it = marks.find(id); it != marks.end()) out[std::string(component_key(id))] = it->second.to_string();
  }
  return out;
}

std::map<ComponentId, Fixed2> marks_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("marks must be an object", "marks");
  std::map<ComponentId, Fixed2> marks;
  for (const auto& [key, value] : j.items()) {
    const auto id = parse_component_key(key);
    if (!id) throw ValidationError("unknown component '" + key + "'", key);
    std::optional<Fixed2> mark;
    if (value.is_string()) {
      mark = Fixed2::parse(value.get<std::string>());
    } else if (value.is_number_integer()) {
      mark = Fixed2::from_integer(value.get<std::int64_t>());
    }
    if (!mark) throw ValidationError("mark for " + key + " must be a decimal string with at most 2 fraction digits", key);
    marks[*id] = *mark;
  }
  return marks;
}

json ranks_to_json(const std::set<Rank>& ranks) {
  json out = json::array();
  for (Rank r : ranks) out.push_back(std::string(to_string(r)));
  return out;
}

namespace {

json action_to_json(const Action& a) {
  if (a.kind == Action::Kind::Eligible) {
    json ranks = json::array();
    for (Rank r : a.ranks) ranks.push_back(std::string(to_string(r)));
    return json{{"kind", "eligible"}, {"ranks", ranks}};
  }
  json out{{"kind", "assign"}, {"attribute", a.attribute}};
  out["value"] = value_to_json(a.value);
  return out;
}

Action action_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "eligible") {
    std::vector<Rank> ranks;
    for (const auto& r : j.at("ranks")) {
      const auto rank = parse_rank(r.get<std::string>());
      if (!rank) throw ValidationError("unknown rank '" + r.get<std::string>() + "'", "ranks");
      ranks.push_back(*rank);
    }
    return Action::eligible(std::move(ranks));
  }
  const auto value = value_from_json(j.at("value"));
  if (!value) throw ValidationError("assignment without a value", "value");
  return Action::assign(j.at("attribute").get<std::string>(), *value);
}

Rank rank_from_json(const json& j, const char* field) {
  const auto rank = parse_rank(j.get<std::string>());
  if (!rank) throw ValidationError("unknown rank '" + j.get<std::string>() + "'", field);
  return *rank;
}

}  // namespace

json trace_to_json(const ExplanationTrace& trace) {
  json firings = json::array();
  for (const auto& f : trace.firings) {
    json snapshot = json::array();
    for (const auto& [attribute, value] : f.snapshot) {
      json entry{{"attribute", attribute}};
      entry.update(value_to_json(value));
      snapshot.push_back(std::move(entry));
    }
    json actions = json::array();
    for (const auto& a : f.actions) actions.push_back(action_to_json(a));
    firings.push_back(json{{"sequence", f.sequence}, {"rule", f.rule}, {"snapshot", snapshot}, {"actions", actions}});
  }
  json weights = json::object();
  for (const auto& e : trace.weights.entries) weights[std::string(component_key(e.component))] = e.weight;

  json out;
  out["trace_id"] = trace.trace_id;
  out["cadet_id"] = trace.cadet_id();
  out["cycle"] = trace.cycle();
  out["marks"] = marks_to_json(trace.sheet.marks);
  out["composite"] = trace.composite.value.to_string();
  out["firings"] = std::move(firings);
  out["stage"] = std::string(to_string(trace.conclusions.stage));
  out["eligible"] = ranks_to_json(trace.conclusions.eligible);
  out["current_rank"] = std::string(to_string(trace.current_rank));
  out["weights"] = std::move(weights);
  out["ruleset"] = trace.ruleset;
  return out;
}

ExplanationTrace trace_from_json(const json& j) {
  try {
    ExplanationTrace t;
    t.trace_id = j.at("trace_id").get<std::string>();
    t.sheet.cadet_id = j.at("cadet_id").get<std::string>();
    t.sheet.cycle = j.at("cycle").get<std::string>();
    t.sheet.marks = marks_from_json(j.at("marks"));
    const auto composite = Fixed2::parse(j.at("composite").get<std::string>());
    if (!composite) throw ValidationError("malformed composite", "composite");
    t.composite = CompositeScore{*composite};
    for (const auto& f : j.at("firings")) {
      FiredRule fired;
      fired.sequence = f.at("sequence").get<std::size_t>();
      fired.rule = f.at("rule").get<std::string>();
      for (const auto& s : f.at("snapshot")) fired.snapshot.emplace(s.at("attribute").get<std::string>(), value_from_json(s));
      for (const auto& a : f.at("actions")) fired.actions.push_back(action_from_json(a));
      t.firings.push_back(std::move(fired));
    }
    const auto stage = parse_stage(j.at("stage").get<std::string>());
    if (!stage) throw ValidationError("unknown stage", "stage");
    t.conclusions.stage = *stage;
    for (const auto& r : j.at("eligible")) t.conclusions.eligible.insert(rank_from_json(r, "eligible"));
    t.current_rank = rank_from_json(j.at("current_rank"), "current_rank");
    for (const auto& [key, w] : j.at("weights").items()) {
      const auto id = parse_component_key(key);
      if (!id) throw ValidationError("unknown component '" + key + "'", "weights");
      t.weights.entries.push_back({*id, w.get<int>()});
    }
    t.ruleset = j.at("ruleset").get<std::string>();
    return t;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed trace document: ") + e.what(), "trace");
  }
}

}  // namespace rankwise
