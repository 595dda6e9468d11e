#include <array>
#include <charconv>
#include <optional>

#include "provoscope/error.hpp"
#include "provoscope/filter.hpp"

namespace provoscope {

namespace {

enum class Tok {
  Ident,
  QuotedIdent,
  String,
  Number,
  Op,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  End,
};

struct Token {
  Tok kind;
  std::string text;  // decoded value for identifiers/strings, spelling otherwise
  std::size_t offset;
};

bool ident_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}
bool ident_char(unsigned char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

constexpr std::array<std::string_view, 8> kKeywords = {
    "and", "or", "not", "contains", "startswith", "in", "is", "missing"};

bool is_keyword(std::string_view word) {
  auto lower = lower_ascii(word);
  for (auto k : kKeywords) {
    if (lower == k) return true;
  }
  return false;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "end of input", pos_});
        return out;
      }
      out.push_back(next(out.size() + 1));
    }
  }

 private:
  void skip_space() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  [[noreturn]] void fail(std::size_t token, std::string expected, const std::string& found) {
    throw ParseError(token, pos_, std::move(expected), found);
  }

  Token next(std::size_t token_no) {
    const std::size_t start = pos_;
    const char c = src_[pos_];
    switch (c) {
      case '(': ++pos_; return {Tok::LParen, "(", start};
      case ')': ++pos_; return {Tok::RParen, ")", start};
      case '[': ++pos_; return {Tok::LBracket, "[", start};
      case ']': ++pos_; return {Tok::RBracket, "]", start};
      case ',': ++pos_; return {Tok::Comma, ",", start};
      case '=':
        if (peek(1) == '=') { pos_ += 2; return {Tok::Op, "==", start}; }
        fail(token_no, "\"==\"", "\"=\"");
      case '!':
        if (peek(1) == '=') { pos_ += 2; return {Tok::Op, "!=", start}; }
        fail(token_no, "\"!=\"", "\"!\"");
      case '<':
      case '>':
        if (peek(1) == '=') {
          pos_ += 2;
          return {Tok::Op, std::string{c, '='}, start};
        }
        ++pos_;
        return {Tok::Op, std::string(1, c), start};
      case '"': return string_token(token_no);
      case '`': return quoted_ident(token_no);
      default: break;
    }
    if (digit(c) || ((c == '-' || c == '.') && (digit(peek(1)) || (c == '-' && peek(1) == '.')))) {
      return number(token_no);
    }
    if (ident_start(static_cast<unsigned char>(c))) {
      while (pos_ < src_.size() && ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return {Tok::Ident, std::string(src_.substr(start, pos_ - start)), start};
    }
    fail(token_no, "a token", "'" + std::string(1, c) + "'");
  }

  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  Token string_token(std::size_t token_no) {
    const std::size_t start = pos_++;
    std::string value;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '"') {
        ++pos_;
        return {Tok::String, std::move(value), start};
      }
      if (c == '\\' && (peek(1) == '"' || peek(1) == '\\')) {
        value += peek(1);
        pos_ += 2;
        continue;
      }
      value += c;
      ++pos_;
    }
    pos_ = start;
    fail(token_no, "closing '\"'", "end of input");
  }

  Token quoted_ident(std::size_t token_no) {
    const std::size_t start = pos_++;
    std::string value;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '`') {
        if (peek(1) == '`') {
          value += '`';
          pos_ += 2;
          continue;
        }
        ++pos_;
        return {Tok::QuotedIdent, std::move(value), start};
      }
      value += c;
      ++pos_;
    }
    pos_ = start;
    fail(token_no, "closing '`'", "end of input");
  }

  Token number(std::size_t token_no) {
    const std::size_t start = pos_;
    if (src_[pos_] == '-') ++pos_;
    while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && digit(src_[pos_])) {
        while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
      } else {
        pos_ = save;
      }
    }
    std::string text(src_.substr(start, pos_ - start));
    if (!parse_decimal(text)) {
      pos_ = start;
      fail(token_no, "a finite number", "\"" + text + "\"");
    }
    return {Tok::Number, std::move(text), start};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::String: return "string \"" + t.text + "\"";
    case Tok::QuotedIdent: return "`" + t.text + "`";
    default: return "\"" + t.text + "\"";
  }
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  FilterExpr parse() {
    auto expr = parse_or();
    if (cur().kind != Tok::End) fail("\"and\", \"or\" or end of input");
    return expr;
  }

 private:
  const Token& cur() const { return tokens_[pos_]; }

  [[noreturn]] void fail(std::string expected) const {
    throw ParseError(pos_ + 1, cur().offset, std::move(expected), describe(cur()));
  }

  bool at_keyword(std::string_view kw) const {
    return cur().kind == Tok::Ident && lower_ascii(cur().text) == kw;
  }

  void expect(Tok kind, std::string_view what) {
    if (cur().kind != kind) fail(std::string(what));
    ++pos_;
  }

  FilterExpr parse_or() {
    auto lhs = parse_and();
    while (at_keyword("or")) {
      ++pos_;
      lhs = FilterExpr::any(std::move(lhs), parse_and());
    }
    return lhs;
  }

  FilterExpr parse_and() {
    auto lhs = parse_not();
    while (at_keyword("and")) {
      ++pos_;
      lhs = FilterExpr::all(std::move(lhs), parse_not());
    }
    return lhs;
  }

  FilterExpr parse_not() {
    if (at_keyword("not")) {
      ++pos_;
      return FilterExpr::negate(parse_atom());
    }
    return parse_atom();
  }

  FilterExpr parse_atom() {
    if (cur().kind == Tok::LParen) {
      ++pos_;
      auto inner = parse_or();
      expect(Tok::RParen, "\")\"");
      return inner;
    }
    return parse_predicate();
  }

  std::string parse_column() {
    if (cur().kind == Tok::QuotedIdent) return tokens_[pos_++].text;
    if (cur().kind == Tok::Ident && !is_keyword(cur().text)) return tokens_[pos_++].text;
    fail("a column name");
  }

  Literal parse_literal() {
    if (cur().kind == Tok::Number) {
      // The lexer already validated the spelling.
      return number_literal(*parse_decimal(tokens_[pos_++].text));
    }
    if (cur().kind == Tok::String) return text_literal(tokens_[pos_++].text);
    fail("a number or string literal");
  }

  std::string parse_string() {
    if (cur().kind != Tok::String) fail("a string literal");
    return tokens_[pos_++].text;
  }

  FilterExpr parse_predicate() {
    auto column = parse_column();
    if (cur().kind == Tok::Op) {
      const std::string& op = tokens_[pos_++].text;
      CompareOp cmp = op == "==" ? CompareOp::Eq
                    : op == "!=" ? CompareOp::Ne
                    : op == "<"  ? CompareOp::Lt
                    : op == "<=" ? CompareOp::Le
                    : op == ">"  ? CompareOp::Gt
                                 : CompareOp::Ge;
      return FilterExpr::compare(std::move(column), cmp, parse_literal());
    }
    if (at_keyword("contains")) {
      ++pos_;
      return FilterExpr::contains(std::move(column), parse_string());
    }
    if (at_keyword("startswith")) {
      ++pos_;
      return FilterExpr::starts_with(std::move(column), parse_string());
    }
    if (at_keyword("in")) {
      ++pos_;
      expect(Tok::LBracket, "\"[\"");
      std::vector<Literal> values;
      values.push_back(parse_literal());
      while (cur().kind == Tok::Comma) {
        ++pos_;
        values.push_back(parse_literal());
      }
      expect(Tok::RBracket, "\",\" or \"]\"");
      return FilterExpr::in_set(std::move(column), std::move(values));
    }
    if (at_keyword("is")) {
      ++pos_;
      if (!at_keyword("missing")) fail("\"missing\"");
      ++pos_;
      return FilterExpr::is_missing(std::move(column));
    }
    fail("a comparison operator, \"contains\", \"startswith\", \"in\" or \"is\"");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// ---- printing ---------------------------------------------------------------

bool plain_identifier(std::string_view name) {
  if (name.empty() || !ident_start(static_cast<unsigned char>(name.front()))) return false;
  for (char c : name) {
    if (!ident_char(static_cast<unsigned char>(c))) return false;
  }
  return !is_keyword(name);
}

void print_column(std::string& out, std::string_view name) {
  if (plain_identifier(name)) {
    out += name;
    return;
  }
  out += '`';
  for (char c : name) {
    if (c == '`') out += '`';
    out += c;
  }
  out += '`';
}

void print_string(std::string& out, std::string_view text) {
  out += '"';
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
}

void print_literal(std::string& out, const Literal& lit) {
  if (!lit.is_number()) {
    print_string(out, lit.text());
    return;
  }
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), lit.number());
  out.append(buf.data(), end);
}

void print_expr(std::string& out, const FilterExpr& e);

// Binary children are parenthesized; `not` binds tighter than either.
void print_operand(std::string& out, const FilterExpr& e) {
  const bool binary = std::holds_alternative<filter::And>(e.node()) ||
                      std::holds_alternative<filter::Or>(e.node());
  if (binary) out += '(';
  print_expr(out, e);
  if (binary) out += ')';
}

struct Printer {
  std::string& out;

  void operator()(const filter::Compare& n) const {
    print_column(out, n.column);
    out += ' ';
    out += to_string(n.op);
    out += ' ';
    print_literal(out, n.value);
  }
  void operator()(const filter::Contains& n) const {
    print_column(out, n.column);
    out += " contains ";
    print_string(out, n.text);
  }
  void operator()(const filter::StartsWith& n) const {
    print_column(out, n.column);
    out += " startswith ";
    print_string(out, n.text);
  }
  void operator()(const filter::InSet& n) const {
    print_column(out, n.column);
    out += " in [";
    for (std::size_t i = 0; i < n.values.size(); ++i) {
      if (i) out += ", ";
      print_literal(out, n.values[i]);
    }
    out += ']';
  }
  void operator()(const filter::IsMissing& n) const {
    print_column(out, n.column);
    out += " is missing";
  }
  void operator()(const filter::And& n) const {
    print_operand(out, *n.lhs);
    out += " and ";
    print_operand(out, *n.rhs);
  }
  void operator()(const filter::Or& n) const {
    print_operand(out, *n.lhs);
    out += " or ";
    print_operand(out, *n.rhs);
  }
  void operator()(const filter::Not& n) const {
    out += "not ";
    if (n.operand->is_predicate()) {
      print_expr(out, *n.operand);
    } else {
      out += '(';
      print_expr(out, *n.operand);
      out += ')';
    }
  }
};

void print_expr(std::string& out, const FilterExpr& e) { std::visit(Printer{out}, e.node()); }

}  // namespace

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

FilterExpr parse_filter(std::string_view source) {
  return Parser(Lexer(source).run()).parse();
}

std::string print_filter(const FilterExpr& expr) {
  std::string out;
  print_expr(out, expr);
  return out;
}

}  // namespace provoscope
