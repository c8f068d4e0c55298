#pragma once

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "rankwise/rules/ast.hpp"

namespace rankwise::rules {

/// Closed numeric range, inclusive on both ends.
struct NumericDomain {
  Fixed2 min;
  Fixed2 max;
};

struct SymbolDomain {
  std::set<std::string> symbols;
};

/// The set-valued eligible attribute.
struct RankSetDomain {};

using AttributeDomain = std::variant<NumericDomain, SymbolDomain, RankSetDomain>;
using Vocabulary = std::map<std::string, AttributeDomain>;

/// composite and the twelve component marks in [0, 100]; stage, eligible_none,
/// current_rank as symbol sets; eligible.
Vocabulary standard_vocabulary();

enum class DiagnosticKind {
  UnknownAttribute,
  ValueOutOfDomain,
  UnreachableRule,
  OverlappingConditions,
};

std::string_view to_string(DiagnosticKind kind);

struct Diagnostic {
  DiagnosticKind kind;
  std::string rule;
  std::string message;
};

/// Static checks over declared attribute ranges. An empty result means OK.
/// Overlap is reported for two rules that assign different values to the same
/// scalar attribute under jointly satisfiable conditions.
std::vector<Diagnostic> validate_ruleset(const RuleSet& rules, const Vocabulary& vocabulary);

/// True if some assignment of in-domain values to the attributes makes the
/// condition true. Attributes outside the vocabulary are unconstrained.
bool satisfiable(const Expr& condition, const Vocabulary& vocabulary);

}  // namespace rankwise::rules
