#pragma once

#include <functional>
#include <optional>
#include <string>

#include "rankwise/rules/ast.hpp"

namespace rankwise::rules {

/// Canonical text: one block per rule, blank line between blocks, every AND/OR
/// node parenthesized. parse_rules(pretty_print(r)) == r.
std::string pretty_print(const RuleSet& rules);

std::string print_rule(const Rule& rule);
std::string print_condition(const Expr& condition);
std::string print_action(const Action& action);

/// Prints a condition with each attribute followed by its value in
/// parentheses, e.g. "(composite(85.00) >= 80 AND composite(85.00) <= 100)".
/// The lookup returns nullopt for attributes without a value ("?" is shown).
using ValueLookup = std::function<std::optional<Value>(const std::string&)>;
std::string print_condition_with_values(const Expr& condition, const ValueLookup& lookup);

}  // namespace rankwise::rules
