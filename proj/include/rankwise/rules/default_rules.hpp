#pragma once

#include <string_view>

#include "rankwise/rules/ast.hpp"

namespace rankwise::rules {

/// Text of rules/default.rules, compiled in.
std::string_view default_rules_text();

/// Parsed default rule base (8 rules).
const RuleSet& default_rules();

}  // namespace rankwise::rules
