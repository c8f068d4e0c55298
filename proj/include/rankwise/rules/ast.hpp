#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rankwise/fixed_point.hpp"
#include "rankwise/rank.hpp"

namespace rankwise::rules {

/// Name of the set-valued attribute grown by ELIGIBLE actions.
inline constexpr std::string_view kEligibleAttribute = "eligible";

struct Symbol {
  std::string name;
  auto operator<=>(const Symbol&) const = default;
};

/// A literal or fact value: a fixed-point number or a bare symbol.
using Value = std::variant<Fixed2, Symbol>;

std::string to_string(const Value& value);
bool is_attribute_name(std::string_view name);

enum class RelOp { Ge, Le, Gt, Lt, Eq, Ne };

std::string_view to_string(RelOp op);
bool is_ordering(RelOp op);

struct Comparison {
  std::string attribute;
  RelOp op;
  Value literal;
  bool operator==(const Comparison&) const = default;
};

/// Condition tree. And/Or hold two or more operands, Not exactly one.
struct Expr {
  enum class Kind { Compare, And, Or, Not };

  Kind kind = Kind::Compare;
  Comparison comparison{};
  std::vector<Expr> operands;

  static Expr compare(std::string attribute, RelOp op, Value literal);
  static Expr all_of(std::vector<Expr> operands);
  static Expr any_of(std::vector<Expr> operands);
  static Expr negate(Expr operand);

  bool operator==(const Expr&) const = default;
};

struct Action {
  enum class Kind { Assign, Eligible };

  Kind kind = Kind::Assign;
  std::string attribute;    // Assign
  Value value;              // Assign
  std::vector<Rank> ranks;  // Eligible, in written order

  static Action assign(std::string attribute, Value value);
  static Action eligible(std::vector<Rank> ranks);

  /// Attribute written by this action (kEligibleAttribute for ELIGIBLE).
  std::string target() const;

  bool operator==(const Action&) const = default;
};

struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t offset = 0;
};

struct Rule {
  std::string name;
  Expr condition;
  std::vector<Action> actions;
  SourcePos pos;  // of the RULE keyword; not part of structural equality

  bool operator==(const Rule& other) const {
    return name == other.name && condition == other.condition && actions == other.actions;
  }
};

/// Attributes read by a condition, sorted.
std::set<std::string> attributes_read(const Expr& condition);

/// Immutable, validated, ordered rule collection. Construction checks that
/// names are distinct and that the read->write attribute graph is acyclic,
/// throwing ParseError otherwise.
class RuleSet {
 public:
  RuleSet() = default;
  explicit RuleSet(std::vector<Rule> rules);

  const std::vector<Rule>& rules() const { return rules_; }
  std::size_t size() const { return rules_.size(); }
  bool empty() const { return rules_.empty(); }

  const Rule* find(std::string_view name) const;

  /// Indices of rules whose actions write the attribute, in declaration order.
  const std::vector<std::size_t>& writers(const std::string& attribute) const;
  /// Attributes read by rule i.
  const std::set<std::string>& reads(std::size_t rule_index) const;

  /// Every attribute mentioned by any rule.
  std::set<std::string> attributes() const;

  bool operator==(const RuleSet& other) const { return rules_ == other.rules_; }

 private:
  std::vector<Rule> rules_;
  std::vector<std::set<std::string>> reads_;
  std::map<std::string, std::vector<std::size_t>> writers_;
};

}  // namespace rankwise::rules
