#include <doctest.h>

#include <chrono>
#include <cstring>

#include "generators.hpp"
#include "oracles.hpp"
#include "rankwise/rules/default_rules.hpp"
#include "rankwise/rules/parser.hpp"
#include "rankwise/rules/printer.hpp"
#include "rankwise/rules/validate.hpp"
#include "temp_dir.hpp"

using namespace rankwise;
using namespace rankwise::rules;
using namespace rankwise::testing;

namespace {

Fixed2 n(std::int64_t whole) { return Fixed2::from_integer(whole); }
Expr cmp(const char* a, RelOp op, Value v) { return Expr::compare(a, op, std::move(v)); }

ParseError parse_failure(std::string_view text) {
  try {
    parse_rules(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error for: " << text);
  throw std::logic_error("unreachable");
}

struct Token {
  std::size_t offset;
  std::string text;
};

// Test-side tokenizer for generated canonical text.
std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') {
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' || text[j] == '.')) ++j;
    } else if ((c == '>' || c == '<' || c == '=' || c == '!') && j < text.size() && text[j] == '=') {
      ++j;
    }
    out.push_back({i, text.substr(i, j - i)});
    i = j;
  }
  return out;
}

const char* const kVocabulary[] = {"RULE", "IF", "THEN", "AND", "OR", "NOT", "ELIGIBLE", "(", ")", ",", ">=", "<=",
                                   ">", "<", "==", "!=", "=", "a0", "a1", "a3", "r0", "r1", "s1", "7", "-2.5",
                                   "SUO", "Corporal", "Colonel", "eligible", "Bad", "1.234", "!", "@", "stage"};

}  // namespace

TEST_CASE("minimal rule") {
  const RuleSet set = parse_rules("RULE r1 IF composite >= 80 THEN stage = HIGH");
  REQUIRE(set.size() == 1);
  const Rule& r = set.rules()[0];
  CHECK(r.name == "r1");
  CHECK(r.condition == cmp("composite", RelOp::Ge, n(80)));
  REQUIRE(r.actions.size() == 1);
  CHECK(r.actions[0] == Action::assign("stage", Symbol{"HIGH"}));
  CHECK(r.pos.line == 1);
  CHECK(r.pos.column == 1);
}

TEST_CASE("missing operand is a positioned syntax error") {
  const ParseError e = parse_failure("RULE r1 IF composite > THEN");
  CHECK(e.kind() == ParseErrorKind::Syntax);
  CHECK(e.pos().line == 1);
  CHECK(e.pos().column == 24);
  CHECK(std::string(e.what()).find("expected literal") != std::string::npos);
  CHECK(std::string(e.what()).rfind("1:24: syntax error:", 0) == 0);
}

TEST_CASE("default fixture matches the hand-built rule list") {
  const std::vector<Rule> expected = {
      {"stage_high", Expr::all_of({cmp("composite", RelOp::Ge, n(80)), cmp("composite", RelOp::Le, n(100))}),
       {Action::assign("stage", Symbol{"HIGH"})}, {}},
      {"stage_average", Expr::all_of({cmp("composite", RelOp::Ge, n(60)), cmp("composite", RelOp::Lt, n(80))}),
       {Action::assign("stage", Symbol{"AVERAGE"})}, {}},
      {"stage_low", Expr::all_of({cmp("composite", RelOp::Ge, n(50)), cmp("composite", RelOp::Lt, n(60))}),
       {Action::assign("stage", Symbol{"LOW"})}, {}},
      {"stage_fail", cmp("composite", RelOp::Lt, n(50)), {Action::assign("stage", Symbol{"FAIL"})}, {}},
      {"eligible_high", cmp("stage", RelOp::Eq, Symbol{"HIGH"}),
       {Action::eligible({Rank::Corporal, Rank::Sergeant, Rank::JUO, Rank::SUO})}, {}},
      {"eligible_average", cmp("stage", RelOp::Eq, Symbol{"AVERAGE"}),
       {Action::eligible({Rank::Corporal, Rank::Sergeant})}, {}},
      {"eligible_low", cmp("stage", RelOp::Eq, Symbol{"LOW"}), {Action::eligible({Rank::LanceCorporal})}, {}},
      {"eligible_fail", cmp("stage", RelOp::Eq, Symbol{"FAIL"}), {Action::assign("eligible_none", Symbol{"true"})},
       {}},
  };
  const RuleSet& set = default_rules();
  REQUIRE(set.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CAPTURE(i);
    CHECK(set.rules()[i] == expected[i]);
  }
  CHECK(set == parse_rules(slurp(std::string(RANKWISE_SOURCE_DIR) + "/rules/default.rules")));
}

TEST_CASE("pretty printing") {
  CHECK(pretty_print(RuleSet{}) == "");
  const RuleSet one = parse_rules("RULE r1 IF composite >= 80 THEN stage = HIGH");
  CHECK(pretty_print(one) == "RULE r1\n  IF composite >= 80\n  THEN stage = HIGH\n");
  CHECK(parse_rules(pretty_print(one)) == one);
  CHECK(parse_rules(pretty_print(default_rules())) == default_rules());

  const RuleSet nested = parse_rules(
      "RULE x IF NOT (a == 1 OR b != s) AND c < -2.5 THEN d = 1, ELIGIBLE(SUO, JUO), e = sym");
  CHECK(pretty_print(nested) ==
        "RULE x\n  IF (NOT (a == 1 OR b != s) AND c < -2.5)\n  THEN d = 1,\n       ELIGIBLE(SUO, JUO),\n       e = sym\n");
  CHECK(parse_rules(pretty_print(nested)) == nested);
}

TEST_CASE("round trip on generated rule sets") {
  Rng rng(424242);
  GenOptions o;
  o.max_depth = 5;
  o.fancy_literals = true;
  for (int i = 0; i < 1000; ++i) {
    const auto g = random_acyclic_rules(rng, o);
    const std::string text = pretty_print(g.rules);
    const RuleSet again = parse_rules(text);
    REQUIRE(again == g.rules);
    REQUIRE(pretty_print(again) == text);
  }
}

TEST_CASE("declaration order is preserved") {
  const RuleSet set = parse_rules("RULE z IF a == 1 THEN b = 1 RULE a IF a == 1 THEN c = 1 RULE m IF a == 2 THEN d = 1");
  CHECK(set.rules()[0].name == "z");
  CHECK(set.rules()[1].name == "a");
  CHECK(set.rules()[2].name == "m");
}

TEST_CASE("each error kind is identified") {
  CHECK(parse_failure("RULE r IF a == 1 THEN b = 2 @").kind() == ParseErrorKind::Lexical);
  CHECK(parse_failure("RULE r IF a == 1.234 THEN b = 2").kind() == ParseErrorKind::Lexical);
  CHECK(parse_failure("RULE r IF a = 1 THEN b = 2").kind() == ParseErrorKind::Syntax);
  CHECK(parse_failure("RULE r IF a >= HIGH THEN b = 2").kind() == ParseErrorKind::Syntax);
  CHECK(parse_failure("RULE r IF eligible == SUO THEN b = 2").kind() == ParseErrorKind::Syntax);
  CHECK(parse_failure("RULE r IF a == 1 THEN eligible = SUO").kind() == ParseErrorKind::Syntax);
  CHECK(parse_failure("RULE r IF Grade == 1 THEN b = 2").kind() == ParseErrorKind::Syntax);
  CHECK(parse_failure("RULE r IF a == 1 THEN ELIGIBLE()").kind() == ParseErrorKind::Syntax);
  CHECK(parse_failure("RULE r IF a == 1 THEN ELIGIBLE(Colonel)").kind() == ParseErrorKind::UnknownRank);
  CHECK(parse_failure("RULE r IF a == 1 THEN ELIGIBLE(SUO, SUO)").kind() == ParseErrorKind::DuplicateRank);

  const ParseError dup = parse_failure("RULE r IF a == 1 THEN b = 2\nRULE r IF a == 2 THEN c = 2");
  CHECK(dup.kind() == ParseErrorKind::DuplicateRule);
  CHECK(dup.pos().line == 1);

  const ParseError cycle = parse_failure("RULE p IF x == 1 THEN y = 1\nRULE q IF a == 1 THEN b = 1\nRULE r IF y == 1 THEN x = 2");
  CHECK(cycle.kind() == ParseErrorKind::CyclicDependency);
  CHECK(cycle.pos().line == 1);
  CHECK(parse_failure("RULE s IF x == 1 THEN x = 2").kind() == ParseErrorKind::CyclicDependency);

  std::string deep = "RULE r IF ";
  for (int i = 0; i < 300; ++i) deep += "NOT ";
  deep += "a == 1 THEN b = 1";
  CHECK(parse_failure(deep).kind() == ParseErrorKind::TooDeep);

  std::string parens = "RULE r IF ";
  for (int i = 0; i < 100000; ++i) parens += "(";
  CHECK(parse_failure(parens).kind() == ParseErrorKind::TooDeep);
}

TEST_CASE("comments and whitespace") {
  const RuleSet set = parse_rules("# header\n\nRULE r # trailing\n\tIF a==1 THEN b=2 # done");
  CHECK(set.size() == 1);
  CHECK(parse_rules("").empty());
  CHECK(parse_rules("   # only a comment\n").empty());
}

TEST_CASE("errors report the line and column of their offset") {
  const ParseError e = parse_failure("RULE a IF x == 1 THEN y = 1\n\n  RULE b IF x == THEN y = 2");
  CHECK(e.pos().line == 3);
  CHECK(e.pos().column == 18);
}

TEST_CASE("fuzzing never crashes and always positions the failure") {
  Rng rng(1234);
  const std::string seed_text = std::string(default_rules_text());
  for (int i = 0; i < 600; ++i) {
    std::string input;
    const std::size_t mode = i % 3;
    const std::size_t len = uniform(rng, 0, i % 50 == 0 ? 65536 : 512);
    if (mode == 0) {
      for (std::size_t k = 0; k < len; ++k) input.push_back(static_cast<char>(uniform(rng, 0, 255)));
    } else if (mode == 1) {
      while (input.size() < len) {
        input += kVocabulary[uniform(rng, 0, std::size(kVocabulary) - 1)];
        input += chance(rng, 0.1) ? "\n" : " ";
      }
    } else {
      input = seed_text;
      for (int k = 0; k < 3; ++k) input[uniform(rng, 0, input.size() - 1)] = static_cast<char>(uniform(rng, 0, 255));
    }
    try {
      parse_rules(input);
    } catch (const ParseError& e) {
      REQUIRE(e.pos().offset <= input.size());
      REQUIRE(line_column(input, e.pos().offset) == std::make_pair(e.pos().line, e.pos().column));
    }
  }
}

TEST_CASE("single-token mutations are reported relative to the mutation point") {
  Rng rng(777);
  int syntax_like = 0, semantic = 0;
  for (int round = 0; round < 300; ++round) {
    const auto g = random_acyclic_rules(rng);
    const std::string text = pretty_print(g.rules);
    const auto tokens = tokenize(text);
    if (tokens.empty()) continue;
    const std::size_t at = uniform(rng, 0, tokens.size() - 1);
    const Token& t = tokens[at];
    std::string mutated;
    const std::size_t op = uniform(rng, 0, 2);
    const std::string replacement = kVocabulary[uniform(rng, 0, std::size(kVocabulary) - 1)];
    if (op == 0) {
      mutated = text.substr(0, t.offset) + " " + text.substr(t.offset + t.text.size());
    } else if (op == 1) {
      mutated = text.substr(0, t.offset) + " " + replacement + " " + text.substr(t.offset + t.text.size());
    } else {
      mutated = text.substr(0, t.offset) + " " + replacement + " " + text.substr(t.offset);
    }
    try {
      parse_rules(mutated);
    } catch (const ParseError& e) {
      CAPTURE(mutated);
      CAPTURE(t.offset);
      const std::string message = e.what();
      CAPTURE(message);
      switch (e.kind()) {
        case ParseErrorKind::DuplicateRule:
        case ParseErrorKind::CyclicDependency:
          ++semantic;
          CHECK(e.pos().offset <= t.offset);
          break;
        default:
          ++syntax_like;
          CHECK(e.pos().offset >= t.offset);
          break;
      }
    }
  }
  CHECK(syntax_like > 50);
}

TEST_CASE("validator accepts the default fixture") {
  CHECK(validate_ruleset(default_rules(), standard_vocabulary()).empty());
}

TEST_CASE("validator diagnostics") {
  const Vocabulary vocab = standard_vocabulary();
  auto kinds = [&](const char* text) {
    std::vector<DiagnosticKind> out;
    for (const auto& d : validate_ruleset(parse_rules(text), vocab)) out.push_back(d.kind);
    return out;
  };
  CHECK(kinds("RULE t IF grdae == HIGH THEN stage = HIGH") ==
        std::vector{DiagnosticKind::UnknownAttribute});
  CHECK(kinds("RULE t IF composite >= 50 THEN stage = GREAT") == std::vector{DiagnosticKind::ValueOutOfDomain});
  CHECK(kinds("RULE t IF composite > 100 THEN stage = HIGH") == std::vector{DiagnosticKind::UnreachableRule});
  CHECK(kinds("RULE t IF composite >= 60 AND composite < 50 THEN stage = HIGH") ==
        std::vector{DiagnosticKind::UnreachableRule});
  CHECK(kinds("RULE a IF composite >= 50 AND composite < 60 THEN stage = LOW\n"
              "RULE b IF composite >= 55 AND composite < 65 THEN stage = AVERAGE") ==
        std::vector{DiagnosticKind::OverlappingConditions});
  CHECK(kinds("RULE a IF composite >= 50 AND composite < 60 THEN stage = LOW\n"
              "RULE b IF composite >= 60 AND composite < 65 THEN stage = AVERAGE")
            .empty());
  CHECK(kinds("RULE a IF composite >= 50 AND composite <= 60 THEN stage = LOW\n"
              "RULE b IF composite >= 60 AND composite < 65 THEN stage = AVERAGE") ==
        std::vector{DiagnosticKind::OverlappingConditions});
  CHECK(kinds("RULE a IF composite >= 50 THEN stage = LOW\n"
              "RULE b IF composite >= 55 THEN stage = LOW")
            .empty());
  CHECK(kinds("RULE a IF stage == HIGH OR stage == LOW THEN eligible_none = false\n"
              "RULE b IF stage != HIGH AND stage != LOW THEN eligible_none = true")
            .empty());
  CHECK(kinds("RULE a IF NOT stage == FAIL THEN eligible_none = false\n"
              "RULE b IF stage == LOW THEN eligible_none = true") ==
        std::vector{DiagnosticKind::OverlappingConditions});
}

TEST_CASE("satisfiability over domains") {
  const Vocabulary vocab = standard_vocabulary();
  CHECK(satisfiable(parse_rules("RULE t IF composite >= 79.99 AND composite < 80 THEN x = 1").rules()[0].condition,
                    vocab));
  CHECK_FALSE(satisfiable(
      parse_rules("RULE t IF composite > 79.99 AND composite < 80 THEN x = 1").rules()[0].condition, vocab));
  CHECK_FALSE(satisfiable(
      parse_rules("RULE t IF composite == 50 AND composite != 50 THEN x = 1").rules()[0].condition, vocab));
  CHECK(satisfiable(parse_rules("RULE t IF unknown_attr == 1 THEN x = 1").rules()[0].condition, vocab));
}
