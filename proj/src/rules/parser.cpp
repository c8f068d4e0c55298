#include "rankwise/rules/parser.hpp"

#include <algorithm>
#include <optional>

namespace rankwise::rules {

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::Lexical: return "lexical error";
    case ParseErrorKind::Syntax: return "syntax error";
    case ParseErrorKind::DuplicateRule: return "duplicate rule";
    case ParseErrorKind::CyclicDependency: return "cyclic dependency";
    case ParseErrorKind::UnknownRank: return "unknown rank";
    case ParseErrorKind::DuplicateRank: return "duplicate rank";
    case ParseErrorKind::TooDeep: return "nesting too deep";
  }
  return "error";
}

ParseError::ParseError(ParseErrorKind kind, SourcePos pos, std::string message)
    : ValidationError(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " +
                          std::string(to_string(kind)) + ": " + message,
                      "rules"),
      kind_(kind),
      pos_(pos),
      detail_(std::move(message)) {}

namespace {

enum class Tok {
  Rule,
  If,
  Then,
  And,
  Or,
  Not,
  Eligible,
  Word,
  Number,
  RelOp,
  Assign,
  LParen,
  RParen,
  Comma,
  End,
};

struct Token {
  Tok type;
  std::string_view text;
  SourcePos pos;
  RelOp op = RelOp::Eq;   // RelOp
  Fixed2 number{};        // Number
};

bool is_word_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_word_char(char c) { return is_word_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_blank();
    const SourcePos start = here();
    if (at_end()) return {Tok::End, {}, start};
    const char c = peek();
    if (is_word_start(c)) return word(start);
    if (is_digit(c) || (c == '-' && is_digit(peek(1)))) return number(start);
    return punct(start);
  }

 private:
  bool at_end() const { return offset_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return offset_ + ahead < text_.size() ? text_[offset_ + ahead] : '\0';
  }
  SourcePos here() const { return {line_, column_, offset_}; }

  void advance() {
    if (text_[offset_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++offset_;
  }

  void skip_blank() {
    while (!at_end()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        return;
      }
    }
  }

  Token word(SourcePos start) {
    while (!at_end() && is_word_char(peek())) advance();
    const std::string_view w = text_.substr(start.offset, offset_ - start.offset);
    Tok type = Tok::Word;
    if (w == "RULE") type = Tok::Rule;
    else if (w == "IF") type = Tok::If;
    else if (w == "THEN") type = Tok::Then;
    else if (w == "AND") type = Tok::And;
    else if (w == "OR") type = Tok::Or;
    else if (w == "NOT") type = Tok::Not;
    else if (w == "ELIGIBLE") type = Tok::Eligible;
    return {type, w, start};
  }

  Token number(SourcePos start) {
    if (peek() == '-') advance();
    while (!at_end() && is_digit(peek())) advance();
    if (peek() == '.' && is_digit(peek(1))) {
      advance();
      while (!at_end() && is_digit(peek())) advance();
    }
    const std::string_view n = text_.substr(start.offset, offset_ - start.offset);
    const auto value = Fixed2::parse(n);
    if (!value) {
      throw ParseError(ParseErrorKind::Lexical, start,
                       "number '" + std::string(n) + "' must have at most 12 integer and 2 fraction digits");
    }
    Token t{Tok::Number, n, start};
    t.number = *value;
    return t;
  }

  Token punct(SourcePos start) {
    const char c = peek();
    const char next = peek(1);
    auto make = [&](Tok type, std::size_t len, RelOp op = RelOp::Eq) {
      for (std::size_t i = 0; i < len; ++i) advance();
      Token t{type, text_.substr(start.offset, len), start};
      t.op = op;
      return t;
    };
    switch (c) {
      case '(': return make(Tok::LParen, 1);
      case ')': return make(Tok::RParen, 1);
      case ',': return make(Tok::Comma, 1);
      case '>': return next == '=' ? make(Tok::RelOp, 2, RelOp::Ge) : make(Tok::RelOp, 1, RelOp::Gt);
      case '<': return next == '=' ? make(Tok::RelOp, 2, RelOp::Le) : make(Tok::RelOp, 1, RelOp::Lt);
      case '=': return next == '=' ? make(Tok::RelOp, 2, RelOp::Eq) : make(Tok::Assign, 1);
      case '!':
        if (next == '=') return make(Tok::RelOp, 2, RelOp::Ne);
        throw ParseError(ParseErrorKind::Lexical, start, "'!' must be followed by '='");
      default: break;
    }
    const auto byte = static_cast<unsigned char>(c);
    std::string shown;
    if (byte >= 0x20 && byte < 0x7f) {
      shown = std::string("'") + c + "'";
    } else {
      static constexpr char kHex[] = "0123456789abcdef";
      shown = std::string("byte 0x") + kHex[byte >> 4] + kHex[byte & 0xf];
    }
    throw ParseError(ParseErrorKind::Lexical, start, "unexpected character " + shown);
  }

  std::string_view text_;
  std::size_t offset_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

std::string describe(const Token& t) {
  if (t.type == Tok::End) return "end of input";
  return "'" + std::string(t.text) + "'";
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text), current_(lexer_.next()) {}

  std::vector<Rule> ruleset() {
    std::vector<Rule> rules;
    while (peek().type != Tok::End) {
      if (peek().type != Tok::Rule) fail("expected 'RULE' or end of input");
      rules.push_back(rule());
    }
    return rules;
  }

 private:
  const Token& peek() const { return current_; }
  Token take() {
    Token t = current_;
    if (t.type != Tok::End) current_ = lexer_.next();
    return t;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError(ParseErrorKind::Syntax, peek().pos, expected + ", found " + describe(peek()));
  }

  Rule rule() {
    Rule r;
    r.pos = take().pos;  // RULE
    r.name = std::string(expect(Tok::Word, "rule name after 'RULE'").text);
    expect(Tok::If, "'IF' after rule name '" + r.name + "'");
    r.condition = expr(0);
    expect(Tok::Then, "'THEN' or a boolean operator after condition");
    r.actions.push_back(action());
    while (peek().type == Tok::Comma) {
      take();
      r.actions.push_back(action());
    }
    return r;
  }

  Token expect(Tok type, const std::string& what) {
    if (peek().type != type) fail("expected " + what);
    return take();
  }

  void guard_depth(int depth) const {
    if (depth > kMaxNesting) {
      throw ParseError(ParseErrorKind::TooDeep, peek().pos,
                       "condition nests deeper than " + std::to_string(kMaxNesting) + " levels");
    }
  }

  Expr expr(int depth) {
    std::vector<Expr> terms;
    terms.push_back(term(depth));
    while (peek().type == Tok::Or) {
      take();
      terms.push_back(term(depth));
    }
    return terms.size() == 1 ? std::move(terms.front()) : Expr::any_of(std::move(terms));
  }

  Expr term(int depth) {
    std::vector<Expr> factors;
    factors.push_back(factor(depth));
    while (peek().type == Tok::And) {
      take();
      factors.push_back(factor(depth));
    }
    return factors.size() == 1 ? std::move(factors.front()) : Expr::all_of(std::move(factors));
  }

  Expr factor(int depth) {
    guard_depth(depth);
    switch (peek().type) {
      case Tok::LParen: {
        take();
        Expr inner = expr(depth + 1);
        expect(Tok::RParen, "')' to close '('");
        return inner;
      }
      case Tok::Not:
        take();
        return Expr::negate(factor(depth + 1));
      case Tok::Word:
        return comparison();
      default:
        fail("expected comparison, '(' or 'NOT'");
    }
  }

  std::string attribute_name(const Token& t) const {
    const std::string name(t.text);
    if (!is_attribute_name(name)) {
      throw ParseError(ParseErrorKind::Syntax, t.pos,
                       "attribute name '" + name + "' must match [a-z][a-z0-9_]*");
    }
    return name;
  }

  Expr comparison() {
    const Token attr_tok = take();
    std::string attribute = attribute_name(attr_tok);
    if (attribute == kEligibleAttribute) {
      throw ParseError(ParseErrorKind::Syntax, attr_tok.pos,
                       "'eligible' is set-valued and cannot appear in a condition");
    }
    if (peek().type != Tok::RelOp) fail("expected relational operator after '" + attribute + "'");
    const Token op_tok = take();
    const RelOp op = op_tok.op;
    if (peek().type != Tok::Number && peek().type != Tok::Word) {
      fail("expected literal (number or symbol) after '" + attribute + " " + std::string(op_tok.text) + "'");
    }
    const Token lit_tok = take();
    Value literal = literal_value(lit_tok);
    if (is_ordering(op) && std::holds_alternative<Symbol>(literal)) {
      throw ParseError(ParseErrorKind::Syntax, lit_tok.pos,
                       "operator '" + std::string(op_tok.text) + "' needs a numeric literal, found symbol " +
                           describe(lit_tok));
    }
    return Expr::compare(std::move(attribute), op, std::move(literal));
  }

  static Value literal_value(const Token& t) {
    if (t.type == Tok::Number) return t.number;
    return Symbol{std::string(t.text)};
  }

  Action action() {
    if (peek().type == Tok::Eligible) {
      take();
      expect(Tok::LParen, "'(' after 'ELIGIBLE'");
      std::vector<Rank> ranks;
      for (;;) {
        const Token t = expect(Tok::Word, "rank name");
        const auto rank = parse_rank(t.text);
        if (!rank) {
          throw ParseError(ParseErrorKind::UnknownRank, t.pos,
                           "unknown rank '" + std::string(t.text) +
                               "' (expected CadetOfficer, LanceCorporal, Corporal, Sergeant, JUO or SUO)");
        }
        if (std::find(ranks.begin(), ranks.end(), *rank) != ranks.end()) {
          throw ParseError(ParseErrorKind::DuplicateRank, t.pos,
                           "rank '" + std::string(t.text) + "' listed twice in one ELIGIBLE action");
        }
        ranks.push_back(*rank);
        if (peek().type != Tok::Comma) break;
        take();
      }
      expect(Tok::RParen, "',' or ')' in ELIGIBLE rank list");
      return Action::eligible(std::move(ranks));
    }
    if (peek().type != Tok::Word) fail("expected action (attribute assignment or ELIGIBLE)");
    const Token attr_tok = take();
    std::string attribute = attribute_name(attr_tok);
    if (attribute == kEligibleAttribute) {
      throw ParseError(ParseErrorKind::Syntax, attr_tok.pos, "'eligible' can only be extended with ELIGIBLE(...)");
    }
    expect(Tok::Assign, "'=' after '" + attribute + "'");
    if (peek().type != Tok::Number && peek().type != Tok::Word) {
      fail("expected literal (number or symbol) after '" + attribute + " ='");
    }
    return Action::assign(std::move(attribute), literal_value(take()));
  }

  Lexer lexer_;
  Token current_;
};

}  // namespace

RuleSet parse_rules(std::string_view text) {
  Parser parser(text);
  return RuleSet(parser.ruleset());
}

}  // namespace rankwise::rules
