#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "provoscope/dataset.hpp"

// A closed boolean filter language evaluated row by row. Grammar:
//
//   expr  := or
//   or    := and { "or" and }
//   and   := not { "and" not }
//   not   := ["not"] atom
//   atom  := "(" expr ")" | pred
//   pred  := col op lit | col "contains" str | col "startswith" str
//          | col "in" "[" lit {"," lit} "]" | col "is" "missing"
//   op    := "==" | "!=" | "<" | "<=" | ">" | ">="
//   col   := ident | "`" chars "`"
//   lit   := number | str            str := '"' chars '"'
//
// Keywords are case-insensitive; column names are case-sensitive. Inside a
// backtick name a doubled backtick stands for one; inside a string `\"` and
// `\\` are escapes.
namespace provoscope {

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CompareOp op);

struct Literal {
  std::variant<double, std::string> value;

  bool is_number() const noexcept { return std::holds_alternative<double>(value); }
  double number() const { return std::get<double>(value); }
  const std::string& text() const { return std::get<std::string>(value); }

  friend bool operator==(const Literal&, const Literal&) = default;
};

Literal number_literal(double v);
Literal text_literal(std::string v);

class FilterExpr;
using FilterPtr = std::shared_ptr<const FilterExpr>;

namespace filter {

struct Compare {
  std::string column;
  CompareOp op;
  Literal value;
  friend bool operator==(const Compare&, const Compare&) = default;
};

// Case-insensitive substring test.
struct Contains {
  std::string column;
  std::string text;
  friend bool operator==(const Contains&, const Contains&) = default;
};

// Case-insensitive prefix test.
struct StartsWith {
  std::string column;
  std::string text;
  friend bool operator==(const StartsWith&, const StartsWith&) = default;
};

struct InSet {
  std::string column;
  std::vector<Literal> values;
  friend bool operator==(const InSet&, const InSet&) = default;
};

struct IsMissing {
  std::string column;
  friend bool operator==(const IsMissing&, const IsMissing&) = default;
};

struct And {
  FilterPtr lhs;
  FilterPtr rhs;
};

struct Or {
  FilterPtr lhs;
  FilterPtr rhs;
};

struct Not {
  FilterPtr operand;
};

bool operator==(const And& a, const And& b);
bool operator==(const Or& a, const Or& b);
bool operator==(const Not& a, const Not& b);

}  // namespace filter

// Immutable AST value. Children are shared, so copies are cheap.
class FilterExpr {
 public:
  using Node = std::variant<filter::Compare, filter::Contains, filter::StartsWith,
                            filter::InSet, filter::IsMissing, filter::And, filter::Or,
                            filter::Not>;

  explicit FilterExpr(Node node) : node_(std::move(node)) {}

  static FilterExpr compare(std::string column, CompareOp op, Literal value);
  static FilterExpr contains(std::string column, std::string text);
  static FilterExpr starts_with(std::string column, std::string text);
  static FilterExpr in_set(std::string column, std::vector<Literal> values);
  static FilterExpr is_missing(std::string column);
  static FilterExpr all(FilterExpr lhs, FilterExpr rhs);
  static FilterExpr any(FilterExpr lhs, FilterExpr rhs);
  static FilterExpr negate(FilterExpr operand);

  const Node& node() const noexcept { return node_; }
  bool is_predicate() const noexcept;

  // Structural equality.
  friend bool operator==(const FilterExpr& a, const FilterExpr& b) { return a.node_ == b.node_; }

 private:
  Node node_;
};

// Throws ParseError (1-based token index, byte offset, expectation).
FilterExpr parse_filter(std::string_view source);

// Canonical text: lowercase keywords, binary sub-expressions parenthesized.
// parse_filter(print_filter(e)) == e.
std::string print_filter(const FilterExpr& expr);

// Every column the expression mentions, first occurrence first, no repeats.
std::vector<std::string> referenced_columns(const FilterExpr& expr);

// Referenced columns the dataset lacks, first occurrence first.
std::vector<std::string> validate_columns(const FilterExpr& expr, const Dataset& dataset);

struct EvalOutcome {
  bool matched = false;
  // Row-independent text, e.g. "missing value in column `Rating`".
  std::vector<std::string> warnings;
};

// Total: never throws. Missing cells fail every predicate except `is missing`;
// values that cannot be compared numerically fail with a warning.
EvalOutcome eval_filter(const FilterExpr& expr, const Row& row, const Dataset& dataset);

}  // namespace provoscope
