#include "rankwise/rules/validate.hpp"

#include <algorithm>
#include <optional>

#include "rankwise/assessment.hpp"

namespace rankwise::rules {

Vocabulary standard_vocabulary() {
  Vocabulary v;
  const NumericDomain percent{Fixed2::from_integer(0), Fixed2::from_integer(100)};
  v.emplace("composite", percent);
  for (ComponentId id : kAllComponents) v.emplace(std::string(component_key(id)), percent);
  v.emplace("stage", SymbolDomain{{"HIGH", "AVERAGE", "LOW", "FAIL"}});
  v.emplace("eligible_none", SymbolDomain{{"true", "false"}});
  SymbolDomain ranks;
  for (Rank r : kAllRanks) ranks.symbols.emplace(to_string(r));
  v.emplace("current_rank", std::move(ranks));
  v.emplace(std::string(kEligibleAttribute), RankSetDomain{});
  return v;
}

std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::UnknownAttribute: return "unknown attribute";
    case DiagnosticKind::ValueOutOfDomain: return "value out of domain";
    case DiagnosticKind::UnreachableRule: return "unreachable rule";
    case DiagnosticKind::OverlappingConditions: return "overlapping conditions";
  }
  return "diagnostic";
}

namespace {

using Conjunct = std::vector<Comparison>;
using Dnf = std::vector<Conjunct>;

constexpr std::size_t kDnfLimit = 4096;

RelOp negate(RelOp op) {
  switch (op) {
    case RelOp::Ge: return RelOp::Lt;
    case RelOp::Lt: return RelOp::Ge;
    case RelOp::Le: return RelOp::Gt;
    case RelOp::Gt: return RelOp::Le;
    case RelOp::Eq: return RelOp::Ne;
    case RelOp::Ne: return RelOp::Eq;
  }
  return op;
}

// nullopt when the expansion exceeds kDnfLimit.
std::optional<Dnf> to_dnf(const Expr& e, bool negated) {
  switch (e.kind) {
    case Expr::Kind::Compare: {
      Comparison c = e.comparison;
      if (negated) c.op = negate(c.op);
      return Dnf{{c}};
    }
    case Expr::Kind::Not:
      return to_dnf(e.operands.front(), !negated);
    case Expr::Kind::And:
    case Expr::Kind::Or: {
      const bool conjunction = (e.kind == Expr::Kind::And) != negated;
      Dnf acc;
      if (conjunction) acc.push_back({});
      for (const auto& child : e.operands) {
        auto sub = to_dnf(child, negated);
        if (!sub) return std::nullopt;
        if (conjunction) {
          Dnf next;
          if (acc.size() * sub->size() > kDnfLimit) return std::nullopt;
          for (const auto& left : acc) {
            for (const auto& right : *sub) {
              Conjunct merged = left;
              merged.insert(merged.end(), right.begin(), right.end());
              next.push_back(std::move(merged));
            }
          }
          acc = std::move(next);
        } else {
          if (acc.size() + sub->size() > kDnfLimit) return std::nullopt;
          acc.insert(acc.end(), sub->begin(), sub->end());
        }
      }
      return acc;
    }
  }
  return std::nullopt;
}

bool numeric_feasible(const NumericDomain& d, const std::vector<Comparison>& cmps) {
  std::int64_t lo = d.min.hundredths();
  std::int64_t hi = d.max.hundredths();
  std::set<std::int64_t> excluded;
  for (const auto& c : cmps) {
    const auto* n = std::get_if<Fixed2>(&c.literal);
    if (!n) {
      if (c.op == RelOp::Ne) continue;  // a number always differs from a symbol
      return false;
    }
    const std::int64_t v = n->hundredths();
    switch (c.op) {
      case RelOp::Ge: lo = std::max(lo, v); break;
      case RelOp::Gt: lo = std::max(lo, v + 1); break;
      case RelOp::Le: hi = std::min(hi, v); break;
      case RelOp::Lt: hi = std::min(hi, v - 1); break;
      case RelOp::Eq: lo = std::max(lo, v); hi = std::min(hi, v); break;
      case RelOp::Ne: excluded.insert(v); break;
    }
  }
  if (lo > hi) return false;
  const auto first = excluded.lower_bound(lo);
  const auto last = excluded.upper_bound(hi);
  const auto blocked = static_cast<std::int64_t>(std::distance(first, last));
  return hi - lo + 1 > blocked;
}

bool symbol_feasible(const SymbolDomain& d, const std::vector<Comparison>& cmps) {
  std::set<std::string> candidates = d.symbols;
  for (const auto& c : cmps) {
    const auto* s = std::get_if<Symbol>(&c.literal);
    if (!s) {
      if (c.op == RelOp::Ne) continue;
      return false;
    }
    if (c.op == RelOp::Eq) {
      const bool present = candidates.count(s->name) > 0;
      candidates.clear();
      if (present) candidates.insert(s->name);
    } else if (c.op == RelOp::Ne) {
      candidates.erase(s->name);
    }
  }
  return !candidates.empty();
}

bool conjunct_feasible(const Conjunct& conjunct, const Vocabulary& vocabulary) {
  std::map<std::string, std::vector<Comparison>> by_attribute;
  for (const auto& c : conjunct) by_attribute[c.attribute].push_back(c);
  for (const auto& [attribute, cmps] : by_attribute) {
    const auto it = vocabulary.find(attribute);
    if (it == vocabulary.end()) continue;
    if (const auto* num = std::get_if<NumericDomain>(&it->second)) {
      if (!numeric_feasible(*num, cmps)) return false;
    } else if (const auto* sym = std::get_if<SymbolDomain>(&it->second)) {
      if (!symbol_feasible(*sym, cmps)) return false;
    }
  }
  return true;
}

bool value_in_domain(const Value& value, const AttributeDomain& domain) {
  if (const auto* num = std::get_if<NumericDomain>(&domain)) {
    const auto* n = std::get_if<Fixed2>(&value);
    return n && *n >= num->min && *n <= num->max;
  }
  if (const auto* sym = std::get_if<SymbolDomain>(&domain)) {
    const auto* s = std::get_if<Symbol>(&value);
    return s && sym->symbols.count(s->name) > 0;
  }
  return false;
}

}  // namespace

bool satisfiable(const Expr& condition, const Vocabulary& vocabulary) {
  const auto dnf = to_dnf(condition, false);
  if (!dnf) return true;  // too large to decide; assume reachable
  return std::any_of(dnf->begin(), dnf->end(),
                     [&](const Conjunct& c) { return conjunct_feasible(c, vocabulary); });
}

std::vector<Diagnostic> validate_ruleset(const RuleSet& rules, const Vocabulary& vocabulary) {
  std::vector<Diagnostic> out;
  const auto& list = rules.rules();

  for (std::size_t i = 0; i < list.size(); ++i) {
    const Rule& rule = list[i];
    for (const auto& attr : rules.reads(i)) {
      if (!vocabulary.count(attr)) {
        out.push_back({DiagnosticKind::UnknownAttribute, rule.name,
                       "rule '" + rule.name + "' reads unknown attribute '" + attr + "'"});
      }
    }
    for (const auto& action : rule.actions) {
      const std::string target = action.target();
      const auto it = vocabulary.find(target);
      if (it == vocabulary.end()) {
        out.push_back({DiagnosticKind::UnknownAttribute, rule.name,
                       "rule '" + rule.name + "' assigns unknown attribute '" + target + "'"});
      } else if (action.kind == Action::Kind::Assign && !value_in_domain(action.value, it->second)) {
        out.push_back({DiagnosticKind::ValueOutOfDomain, rule.name,
                       "rule '" + rule.name + "' assigns " + target + " = " + to_string(action.value) +
                           ", outside the declared domain"});
      }
    }
    if (!satisfiable(rule.condition, vocabulary)) {
      out.push_back({DiagnosticKind::UnreachableRule, rule.name,
                     "rule '" + rule.name + "' can never fire: condition unsatisfiable over declared ranges"});
    }
  }

  for (std::size_t i = 0; i < list.size(); ++i) {
    for (std::size_t j = i + 1; j < list.size(); ++j) {
      for (const auto& a : list[i].actions) {
        if (a.kind != Action::Kind::Assign) continue;
        for (const auto& b : list[j].actions) {
          if (b.kind != Action::Kind::Assign || a.attribute != b.attribute || a.value == b.value) continue;
          if (satisfiable(Expr::all_of({list[i].condition, list[j].condition}), vocabulary)) {
            out.push_back({DiagnosticKind::OverlappingConditions, list[j].name,
                           "rules '" + list[i].name + "' and '" + list[j].name + "' assign " + a.attribute +
                               " = " + to_string(a.value) + " / " + to_string(b.value) +
                               " under overlapping conditions"});
          }
        }
      }
    }
  }
  return out;
}

}  // namespace rankwise::rules
