#include "rankwise/inference.hpp"

#include <algorithm>

#include "rankwise/rules/printer.hpp"

namespace rankwise::inference {

using rules::Action;
using rules::Expr;
using rules::RelOp;
using rules::RuleSet;

void WorkingMemory::assert_fact(const std::string& attribute, Value value) {
  if (!rules::is_attribute_name(attribute) || attribute == rules::kEligibleAttribute) {
    throw ValidationError("'" + attribute + "' is not an assertable attribute", attribute);
  }
  if (facts_.count(attribute)) throw ValidationError("attribute '" + attribute + "' already has a value", attribute);
  facts_.emplace(attribute, Fact{attribute, std::move(value), std::nullopt});
}

void WorkingMemory::assert_eligible(Rank rank) { eligible_.try_emplace(rank, std::nullopt); }

void WorkingMemory::add_fact(Fact fact) {
  auto attribute = fact.attribute;
  facts_.insert_or_assign(std::move(attribute), std::move(fact));
}

void WorkingMemory::add_eligible(Rank rank, std::optional<std::string> granted_by) {
  eligible_.try_emplace(rank, std::move(granted_by));
}

const Fact* WorkingMemory::find(const std::string& attribute) const {
  const auto it = facts_.find(attribute);
  return it == facts_.end() ? nullptr : &it->second;
}

std::optional<Value> WorkingMemory::value(const std::string& attribute) const {
  if (const Fact* f = find(attribute)) return f->value;
  return std::nullopt;
}

std::set<Rank> WorkingMemory::eligible_ranks() const {
  std::set<Rank> out;
  for (const auto& [rank, _] : eligible_) out.insert(rank);
  return out;
}

RuleConflictError::RuleConflictError(std::string attribute, std::string first, std::string second,
                                     const Value& first_value, const Value& second_value)
    : ValidationError("conflicting values for '" + attribute + "': " + rules::to_string(first_value) + " (" + first +
                          ") vs " + rules::to_string(second_value) + " (" + second + ")",
                      attribute),
      attribute_(std::move(attribute)),
      first_(std::move(first)),
      second_(std::move(second)) {}

bool compare(const std::optional<Value>& actual, RelOp op, const Value& literal) {
  if (!actual) return false;
  const auto* lhs = std::get_if<Fixed2>(&*actual);
  const auto* rhs = std::get_if<Fixed2>(&literal);
  if (lhs && rhs) {
    switch (op) {
      case RelOp::Ge: return *lhs >= *rhs;
      case RelOp::Le: return *lhs <= *rhs;
      case RelOp::Gt: return *lhs > *rhs;
      case RelOp::Lt: return *lhs < *rhs;
      case RelOp::Eq: return *lhs == *rhs;
      case RelOp::Ne: return *lhs != *rhs;
    }
  }
  const bool equal = *actual == literal;
  if (op == RelOp::Eq) return equal;
  if (op == RelOp::Ne) return !equal;
  return false;  // ordering needs two numbers
}

bool holds(const Expr& condition, const ValueLookup& lookup) {
  switch (condition.kind) {
    case Expr::Kind::Compare:
      return compare(lookup(condition.comparison.attribute), condition.comparison.op, condition.comparison.literal);
    case Expr::Kind::Not:
      return !holds(condition.operands.front(), lookup);
    case Expr::Kind::And:
      return std::all_of(condition.operands.begin(), condition.operands.end(),
                         [&](const Expr& e) { return holds(e, lookup); });
    case Expr::Kind::Or:
      return std::any_of(condition.operands.begin(), condition.operands.end(),
                         [&](const Expr& e) { return holds(e, lookup); });
  }
  return false;
}

ForwardResult forward_chain(const RuleSet& rules, WorkingMemory memory) {
  const auto& list = rules.rules();
  std::vector<bool> considered(list.size(), false);
  std::map<std::string, std::size_t> open_writers;
  for (const auto& attr : rules.attributes()) open_writers[attr] = rules.writers(attr).size();

  const ValueLookup lookup = [&memory](const std::string& a) { return memory.value(a); };
  std::vector<FiredRule> firings;

  for (bool progress = true; progress;) {
    progress = false;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (considered[i]) continue;
      const auto& reads = rules.reads(i);
      const bool ready =
          std::all_of(reads.begin(), reads.end(), [&](const std::string& a) { return open_writers[a] == 0; });
      if (!ready) continue;

      considered[i] = true;
      progress = true;
      std::set<std::string> targets;
      for (const auto& action : list[i].actions) targets.insert(action.target());
      for (const auto& t : targets) --open_writers[t];

      const auto& rule = list[i];
      if (!holds(rule.condition, lookup)) continue;

      bool adds = false;
      for (const auto& action : rule.actions) {
        if (action.kind == Action::Kind::Eligible) {
          for (Rank r : action.ranks) {
            if (!memory.eligible().count(r)) {
              memory.add_eligible(r, rule.name);
              adds = true;
            }
          }
          continue;
        }
        if (const Fact* existing = memory.find(action.attribute)) {
          if (existing->value != action.value) {
            throw RuleConflictError(action.attribute, existing->derived_by.value_or("asserted"), rule.name,
                                    existing->value, action.value);
          }
          continue;
        }
        memory.add_fact(Fact{action.attribute, action.value, rule.name});
        adds = true;
      }
      if (!adds) continue;

      FiredRule fired;
      fired.sequence = firings.size() + 1;
      fired.rule = rule.name;
      for (const auto& a : reads) fired.snapshot.emplace(a, memory.value(a));
      fired.actions = rule.actions;
      firings.push_back(std::move(fired));
    }
  }
  return {std::move(memory), std::move(firings)};
}

Goal Goal::equals(std::string attribute, Value value) {
  Goal g;
  g.kind = Kind::Equals;
  g.attribute = std::move(attribute);
  g.value = std::move(value);
  return g;
}

Goal Goal::eligible_contains(Rank rank) {
  Goal g;
  g.kind = Kind::EligibleContains;
  g.attribute = std::string(rules::kEligibleAttribute);
  g.rank = rank;
  return g;
}

std::string Goal::describe() const {
  if (kind == Kind::EligibleContains) return "eligible contains " + std::string(to_string(rank));
  return attribute + " == " + rules::to_string(value);
}

std::size_t ProofNode::depth() const {
  if (!rule) return 0;
  std::size_t deepest = 0;
  for (const auto& p : premises) deepest = std::max(deepest, p.depth());
  return deepest + 1;
}

namespace {

class Prover {
 public:
  Prover(const RuleSet& rules, const WorkingMemory& memory) : rules_(rules), memory_(memory) {}

  struct Resolution {
    std::optional<Value> value;
    std::optional<std::size_t> rule;  // empty with a value: asserted
  };

  const Resolution& resolve(const std::string& attribute) {
    if (auto it = memo_.find(attribute); it != memo_.end()) return it->second;
    Resolution r;
    r.value = memory_.value(attribute);
    for (std::size_t w : rules_.writers(attribute)) {
      if (!condition_holds(w)) continue;
      for (const auto& action : rules_.rules()[w].actions) {
        if (action.kind != Action::Kind::Assign || action.attribute != attribute) continue;
        if (!r.value) {
          r.value = action.value;
          r.rule = w;
        } else if (*r.value != action.value) {
          const std::string first = r.rule ? rules_.rules()[*r.rule].name : "asserted";
          throw RuleConflictError(attribute, first, rules_.rules()[w].name, *r.value, action.value);
        }
      }
    }
    return memo_.emplace(attribute, std::move(r)).first->second;
  }

  // Rank -> granting rule index (empty: asserted).
  const std::map<Rank, std::optional<std::size_t>>& resolve_eligible() {
    if (eligible_) return *eligible_;
    std::map<Rank, std::optional<std::size_t>> granted;
    for (const auto& [rank, _] : memory_.eligible()) granted.emplace(rank, std::nullopt);
    for (std::size_t w : rules_.writers(std::string(rules::kEligibleAttribute))) {
      if (!condition_holds(w)) continue;
      for (const auto& action : rules_.rules()[w].actions) {
        if (action.kind != Action::Kind::Eligible) continue;
        for (Rank rank : action.ranks) granted.try_emplace(rank, w);
      }
    }
    eligible_ = std::move(granted);
    return *eligible_;
  }

  bool condition_holds(std::size_t rule_index) {
    if (auto it = conditions_.find(rule_index); it != conditions_.end()) return it->second;
    const bool result =
        holds(rules_.rules()[rule_index].condition, [this](const std::string& a) { return resolve(a).value; });
    conditions_.emplace(rule_index, result);
    return result;
  }

  ProofNode explain(const std::string& attribute) {
    const Resolution& r = resolve(attribute);
    ProofNode node;
    node.attribute = attribute;
    node.value = r.value;
    if (r.rule) {
      add_premises(node, *r.rule);
    } else {
      node.asserted = r.value.has_value();
    }
    return node;
  }

  ProofNode explain_grant(Rank rank, std::optional<std::size_t> rule_index) {
    ProofNode node;
    node.attribute = std::string(rules::kEligibleAttribute);
    node.value = rules::Symbol{std::string(to_string(rank))};
    if (rule_index) {
      add_premises(node, *rule_index);
    } else {
      node.asserted = true;
    }
    return node;
  }

  std::vector<FailedSubgoal> diagnose(const Goal& goal) {
    std::vector<FailedSubgoal> failed;
    const std::string text = goal.describe();
    bool any_candidate = false;
    for (std::size_t w : rules_.writers(goal.attribute)) {
      const auto& rule = rules_.rules()[w];
      const bool concludes = std::any_of(rule.actions.begin(), rule.actions.end(), [&](const Action& a) {
        if (goal.kind == Goal::Kind::EligibleContains) {
          return a.kind == Action::Kind::Eligible &&
                 std::find(a.ranks.begin(), a.ranks.end(), goal.rank) != a.ranks.end();
        }
        return a.kind == Action::Kind::Assign && a.attribute == goal.attribute && a.value == goal.value;
      });
      if (!concludes) continue;
      any_candidate = true;
      failed.push_back({text, "rule '" + rule.name + "' does not fire: " +
                                  rules::print_condition_with_values(rule.condition, [this](const std::string& a) {
                                    return resolve(a).value;
                                  }) +
                                  " is false"});
    }
    if (goal.kind == Goal::Kind::Equals) {
      const Resolution& r = resolve(goal.attribute);
      if (r.value) {
        const std::string source = r.rule ? "rule '" + rules_.rules()[*r.rule].name + "'" : "assertion";
        failed.insert(failed.begin(),
                      {text, goal.attribute + " is " + rules::to_string(*r.value) + " (from " + source + ")"});
      }
    }
    if (!any_candidate && failed.empty()) {
      failed.push_back({text, "no rule concludes it and it is not asserted"});
    }
    return failed;
  }

 private:
  void add_premises(ProofNode& node, std::size_t rule_index) {
    node.rule = rules_.rules()[rule_index].name;
    for (const auto& a : rules_.reads(rule_index)) node.premises.push_back(explain(a));
  }

  const RuleSet& rules_;
  const WorkingMemory& memory_;
  std::map<std::string, Resolution> memo_;
  std::optional<std::map<Rank, std::optional<std::size_t>>> eligible_;
  std::map<std::size_t, bool> conditions_;
};

}  // namespace

ProofResult backward_chain(const RuleSet& rules, const WorkingMemory& memory, const Goal& goal) {
  Prover prover(rules, memory);
  ProofResult result;
  if (goal.kind == Goal::Kind::EligibleContains) {
    const auto& granted = prover.resolve_eligible();
    if (auto it = granted.find(goal.rank); it != granted.end()) {
      result.proven = true;
      result.proof = prover.explain_grant(goal.rank, it->second);
      return result;
    }
  } else {
    const auto& r = prover.resolve(goal.attribute);
    if (r.value && *r.value == goal.value) {
      result.proven = true;
      result.proof = prover.explain(goal.attribute);
      return result;
    }
  }
  result.failed = prover.diagnose(goal);
  return result;
}

}  // namespace rankwise::inference
