#pragma once

#include <string>
#include <string_view>

#include "rankwise/error.hpp"
#include "rankwise/rules/ast.hpp"

namespace rankwise::rules {

enum class ParseErrorKind {
  Lexical,
  Syntax,
  DuplicateRule,
  CyclicDependency,
  UnknownRank,
  DuplicateRank,
  TooDeep,
};

std::string_view to_string(ParseErrorKind kind);

class ParseError : public ValidationError {
 public:
  ParseError(ParseErrorKind kind, SourcePos pos, std::string message);

  ParseErrorKind kind() const noexcept { return kind_; }
  const SourcePos& pos() const noexcept { return pos_; }
  /// Message without the "line:column: kind:" prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ParseErrorKind kind_;
  SourcePos pos_;
  std::string detail_;
};

/// Maximum nesting of parentheses and NOT before the parser gives up.
inline constexpr int kMaxNesting = 200;

/// Parses rule-language text. Throws ParseError carrying a 1-based line and
/// column on any lexical, syntactic or structural problem.
///
///   ruleset    = { rule } ;
///   rule       = "RULE" ident "IF" expr "THEN" action { "," action } ;
///   expr       = term { "OR" term } ;
///   term       = factor { "AND" factor } ;
///   factor     = comparison | "(" expr ")" | "NOT" factor ;
///   comparison = ident relop literal ;
///   action     = ident "=" literal | "ELIGIBLE" "(" rank { "," rank } ")" ;
///   literal    = number | symbol ;
RuleSet parse_rules(std::string_view text);

}  // namespace rankwise::rules
