#include "rankwise/rules/printer.hpp"

namespace rankwise::rules {

namespace {

std::string value_text(const Value& v) {
  if (const auto* n = std::get_if<Fixed2>(&v)) return n->to_string();
  return std::get<Symbol>(v).name;
}

void print_expr(const Expr& e, const ValueLookup* lookup, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::Compare: {
      const auto& c = e.comparison;
      out += c.attribute;
      if (lookup) {
        const auto v = (*lookup)(c.attribute);
        out += '(';
        out += v ? value_text(*v) : "?";
        out += ')';
      }
      out += ' ';
      out += to_string(c.op);
      out += ' ';
      out += to_string(c.literal);
      return;
    }
    case Expr::Kind::Not:
      out += "NOT ";
      print_expr(e.operands.front(), lookup, out);
      return;
    case Expr::Kind::And:
    case Expr::Kind::Or: {
      const char* sep = e.kind == Expr::Kind::And ? " AND " : " OR ";
      out += '(';
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i > 0) out += sep;
        print_expr(e.operands[i], lookup, out);
      }
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string print_condition(const Expr& condition) {
  std::string out;
  print_expr(condition, nullptr, out);
  return out;
}

std::string print_condition_with_values(const Expr& condition, const ValueLookup& lookup) {
  std::string out;
  print_expr(condition, &lookup, out);
  return out;
}

std::string print_action(const Action& action) {
  if (action.kind == Action::Kind::Assign) return action.attribute + " = " + to_string(action.value);
  std::string out = "ELIGIBLE(";
  for (std::size_t i = 0; i < action.ranks.size(); ++i) {
    if (i > 0) out += ", ";
    out += to_string(action.ranks[i]);
  }
  return out + ")";
}

std::string print_rule(const Rule& rule) {
  std::string out = "RULE " + rule.name + "\n  IF " + print_condition(rule.condition) + "\n  THEN ";
  for (std::size_t i = 0; i < rule.actions.size(); ++i) {
    if (i > 0) out += ",\n       ";
    out += print_action(rule.actions[i]);
  }
  return out + "\n";
}

std::string pretty_print(const RuleSet& rules) {
  std::string out;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (i > 0) out += '\n';
    out += print_rule(rules.rules()[i]);
  }
  return out;
}

}  // namespace rankwise::rules
