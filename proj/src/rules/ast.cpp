#include "rankwise/rules/ast.hpp"

#include <algorithm>
#include <functional>

#include "rankwise/rules/parser.hpp"

namespace rankwise::rules {

std::string to_string(const Value& value) {
  if (const auto* number = std::get_if<Fixed2>(&value)) return number->to_compact_string();
  return std::get<Symbol>(value).name;
}

bool is_attribute_name(std::string_view name) {
  if (name.empty() || name.front() < 'a' || name.front() > 'z') return false;
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; });
}

std::string_view to_string(RelOp op) {
  switch (op) {
    case RelOp::Ge: return ">=";
    case RelOp::Le: return "<=";
    case RelOp::Gt: return ">";
    case RelOp::Lt: return "<";
    case RelOp::Eq: return "==";
    case RelOp::Ne: return "!=";
  }
  return "?";
}

bool is_ordering(RelOp op) { return op != RelOp::Eq && op != RelOp::Ne; }

Expr Expr::compare(std::string attribute, RelOp op, Value literal) {
  Expr e;
  e.kind = Kind::Compare;
  e.comparison = Comparison{std::move(attribute), op, std::move(literal)};
  return e;
}

Expr Expr::all_of(std::vector<Expr> operands) {
  Expr e;
  e.kind = Kind::And;
  e.operands = std::move(operands);
  return e;
}

Expr Expr::any_of(std::vector<Expr> operands) {
  Expr e;
  e.kind = Kind::Or;
  e.operands = std::move(operands);
  return e;
}

Expr Expr::negate(Expr operand) {
  Expr e;
  e.kind = Kind::Not;
  e.operands.push_back(std::move(operand));
  return e;
}

Action Action::assign(std::string attribute, Value value) {
  Action a;
  a.kind = Kind::Assign;
  a.attribute = std::move(attribute);
  a.value = std::move(value);
  return a;
}

Action Action::eligible(std::vector<Rank> ranks) {
  Action a;
  a.kind = Kind::Eligible;
  a.ranks = std::move(ranks);
  return a;
}

std::string Action::target() const {
  return kind == Kind::Eligible ? std::string(kEligibleAttribute) : attribute;
}

std::set<std::string> attributes_read(const Expr& condition) {
  std::set<std::string> out;
  std::function<void(const Expr&)> walk = [&](const Expr& e) {
    if (e.kind == Expr::Kind::Compare) {
      out.insert(e.comparison.attribute);
      return;
    }
    for (const auto& child : e.operands) walk(child);
  };
  walk(condition);
  return out;
}

namespace {

std::string describe_pos(const SourcePos& pos) {
  return std::to_string(pos.line) + ":" + std::to_string(pos.column);
}

}  // namespace

RuleSet::RuleSet(std::vector<Rule> rules) : rules_(std::move(rules)) {
  std::map<std::string, std::size_t> first_by_name;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    auto [it, inserted] = first_by_name.emplace(rules_[i].name, i);
    if (!inserted) {
      // Reported at the first definition: the earliest point in the text at
      // which the clash is visible.
      const Rule& first = rules_[it->second];
      throw ParseError(ParseErrorKind::DuplicateRule, first.pos,
                       "duplicate rule name '" + first.name + "' (first defined here, redefined at " +
                           describe_pos(rules_[i].pos) + ")");
    }
  }

  reads_.reserve(rules_.size());
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    reads_.push_back(attributes_read(rules_[i].condition));
    std::set<std::string> targets;
    for (const auto& action : rules_[i].actions) targets.insert(action.target());
    for (const auto& t : targets) writers_[t].push_back(i);
  }

  // Attribute dependency graph: read -> written, labelled with the earliest
  // rule contributing the edge.
  std::map<std::string, std::map<std::string, std::size_t>> edges;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    for (const auto& r : reads_[i]) {
      for (const auto& action : rules_[i].actions) {
        edges[r].try_emplace(action.target(), i);
      }
    }
  }

  enum class Mark { White, Grey, Black };
  std::map<std::string, Mark> mark;
  std::vector<std::string> stack;
  std::vector<std::size_t> found_cycle_rules;

  std::function<bool(const std::string&)> visit = [&](const std::string& node) -> bool {
    mark[node] = Mark::Grey;
    stack.push_back(node);
    if (auto e = edges.find(node); e != edges.end()) {
      for (const auto& [next, rule_index] : e->second) {
        const Mark m = mark.count(next) ? mark[next] : Mark::White;
        if (m == Mark::Grey) {
          auto start = std::find(stack.begin(), stack.end(), next);
          for (auto it = start; it != stack.end(); ++it) {
            const auto& to = (it + 1 == stack.end()) ? next : *(it + 1);
            found_cycle_rules.push_back(edges[*it][to]);
          }
          stack.push_back(next);
          return true;
        }
        if (m == Mark::White && visit(next)) return true;
      }
    }
    stack.pop_back();
    mark[node] = Mark::Black;
    return false;
  };

  for (const auto& [node, _] : edges) {
    if ((mark.count(node) ? mark[node] : Mark::White) != Mark::White) continue;
    if (visit(node)) {
      const std::size_t culprit = *std::min_element(found_cycle_rules.begin(), found_cycle_rules.end());
      auto start = std::find(stack.begin(), stack.end(), stack.back());
      std::string path;
      for (auto it = start; it != stack.end(); ++it) {
        if (!path.empty()) path += " -> ";
        path += *it;
      }
      throw ParseError(ParseErrorKind::CyclicDependency, rules_[culprit].pos,
                       "cyclic attribute dependency " + path + " involving rule '" + rules_[culprit].name + "'");
    }
  }
}

const Rule* RuleSet::find(std::string_view name) const {
  for (const auto& r : rules_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const std::vector<std::size_t>& RuleSet::writers(const std::string& attribute) const {
  static const std::vector<std::size_t> kNone;
  auto it = writers_.find(attribute);
  return it == writers_.end() ? kNone : it->second;
}

const std::set<std::string>& RuleSet::reads(std::size_t rule_index) const { return reads_.at(rule_index); }

std::set<std::string> RuleSet::attributes() const {
  std::set<std::string> out;
  for (const auto& r : reads_) out.insert(r.begin(), r.end());
  for (const auto& [attr, _] : writers_) out.insert(attr);
  return out;
}

}  // namespace rankwise::rules
