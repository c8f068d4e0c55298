#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rankwise/error.hpp"
#include "rankwise/rank.hpp"
#include "rankwise/rules/ast.hpp"

namespace rankwise::inference {

using rules::Value;

struct Fact {
  std::string attribute;
  Value value;
  std::optional<std::string> derived_by;  // empty: asserted

  bool operator==(const Fact&) const = default;
};

/// Attribute -> value store for one evaluation. Scalar attributes are
/// single-assignment; the eligible attribute is a set of ranks.
class WorkingMemory {
 public:
  /// Throws ValidationError if the attribute already has a value or is not a
  /// valid attribute name.
  void assert_fact(const std::string& attribute, Value value);
  void assert_eligible(Rank rank);

  /// Used by the engines; no single-assignment check.
  void add_fact(Fact fact);
  void add_eligible(Rank rank, std::optional<std::string> granted_by);

  const Fact* find(const std::string& attribute) const;
  std::optional<Value> value(const std::string& attribute) const;

  const std::map<std::string, Fact>& facts() const { return facts_; }
  /// Rank -> rule that granted it (empty: asserted).
  const std::map<Rank, std::optional<std::string>>& eligible() const { return eligible_; }
  std::set<Rank> eligible_ranks() const;

  bool operator==(const WorkingMemory&) const = default;

 private:
  std::map<std::string, Fact> facts_;
  std::map<Rank, std::optional<std::string>> eligible_;
};

struct FiredRule {
  std::size_t sequence = 0;  // dense from 1
  std::string rule;
  /// Values of the attributes the condition read, as seen when it fired.
  std::map<std::string, std::optional<Value>> snapshot;
  std::vector<rules::Action> actions;

  bool operator==(const FiredRule&) const = default;
};

struct ForwardResult {
  WorkingMemory memory;
  std::vector<FiredRule> firings;
};

/// Two different values for one scalar attribute.
class RuleConflictError : public ValidationError {
 public:
  RuleConflictError(std::string attribute, std::string first, std::string second, const Value& first_value,
                    const Value& second_value);

  const std::string& attribute() const noexcept { return attribute_; }
  /// Rule names; "asserted" stands for an input fact.
  const std::string& first() const noexcept { return first_; }
  const std::string& second() const noexcept { return second_; }

 private:
  std::string attribute_;
  std::string first_;
  std::string second_;
};

using ValueLookup = std::function<std::optional<Value>(const std::string&)>;

/// A comparison against an attribute without a value is false; NOT negates.
bool compare(const std::optional<Value>& actual, rules::RelOp op, const Value& literal);
bool holds(const rules::Expr& condition, const ValueLookup& lookup);

/// Data-driven evaluation to fixpoint. A rule is considered once every
/// attribute it reads is settled (all rules writing it have been considered),
/// so the final memory does not depend on declaration order. Among ready rules,
/// declaration order decides firing order. A rule whose actions would add
/// nothing new is not recorded as fired. Throws RuleConflictError.
ForwardResult forward_chain(const rules::RuleSet& rules, WorkingMemory memory);

struct Goal {
  enum class Kind { Equals, EligibleContains };

  Kind kind = Kind::Equals;
  std::string attribute;
  Value value;
  Rank rank = Rank::CadetOfficer;

  static Goal equals(std::string attribute, Value value);
  static Goal eligible_contains(Rank rank);

  std::string describe() const;
};

struct ProofNode {
  std::string attribute;
  std::optional<Value> value;       // empty: attribute has no value
  std::optional<std::string> rule;  // rule that concluded it
  bool asserted = false;
  std::vector<ProofNode> premises;  // one per attribute the rule's condition read

  std::size_t depth() const;
};

struct FailedSubgoal {
  std::string goal;
  std::string reason;
};

struct ProofResult {
  bool proven = false;
  std::optional<ProofNode> proof;
  std::vector<FailedSubgoal> failed;
};

/// Goal-driven search: to learn an attribute's value, every rule concluding it
/// is tried depth-first in declaration order, recursively resolving the
/// attributes its condition reads. Resolved attributes are memoized.
/// Proven iff forward_chain from the same memory derives the goal fact.
ProofResult backward_chain(const rules::RuleSet& rules, const WorkingMemory& memory, const Goal& goal);

}  // namespace rankwise::inference
