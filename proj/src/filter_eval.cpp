#include <algorithm>

#include "provoscope/filter.hpp"

namespace provoscope {

Literal number_literal(double v) { return Literal{v}; }
Literal text_literal(std::string v) { return Literal{std::move(v)}; }

namespace filter {

bool operator==(const And& a, const And& b) { return *a.lhs == *b.lhs && *a.rhs == *b.rhs; }
bool operator==(const Or& a, const Or& b) { return *a.lhs == *b.lhs && *a.rhs == *b.rhs; }
bool operator==(const Not& a, const Not& b) { return *a.operand == *b.operand; }

}  // namespace filter

FilterExpr FilterExpr::compare(std::string column, CompareOp op, Literal value) {
  return FilterExpr(filter::Compare{std::move(column), op, std::move(value)});
}
FilterExpr FilterExpr::contains(std::string column, std::string text) {
  return FilterExpr(filter::Contains{std::move(column), std::move(text)});
}
FilterExpr FilterExpr::starts_with(std::string column, std::string text) {
  return FilterExpr(filter::StartsWith{std::move(column), std::move(text)});
}
FilterExpr FilterExpr::in_set(std::string column, std::vector<Literal> values) {
  return FilterExpr(filter::InSet{std::move(column), std::move(values)});
}
FilterExpr FilterExpr::is_missing(std::string column) {
  return FilterExpr(filter::IsMissing{std::move(column)});
}
FilterExpr FilterExpr::all(FilterExpr lhs, FilterExpr rhs) {
  return FilterExpr(filter::And{std::make_shared<const FilterExpr>(std::move(lhs)),
                                std::make_shared<const FilterExpr>(std::move(rhs))});
}
FilterExpr FilterExpr::any(FilterExpr lhs, FilterExpr rhs) {
  return FilterExpr(filter::Or{std::make_shared<const FilterExpr>(std::move(lhs)),
                               std::make_shared<const FilterExpr>(std::move(rhs))});
}
FilterExpr FilterExpr::negate(FilterExpr operand) {
  return FilterExpr(filter::Not{std::make_shared<const FilterExpr>(std::move(operand))});
}

bool FilterExpr::is_predicate() const noexcept {
  return !std::holds_alternative<filter::And>(node_) &&
         !std::holds_alternative<filter::Or>(node_) &&
         !std::holds_alternative<filter::Not>(node_);
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void collect_columns(const FilterExpr& e, std::vector<std::string>& out) {
  const auto add = [&](const std::string& c) {
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  };
  std::visit(Overloaded{
                 [&](const filter::And& n) {
                   collect_columns(*n.lhs, out);
                   collect_columns(*n.rhs, out);
                 },
                 [&](const filter::Or& n) {
                   collect_columns(*n.lhs, out);
                   collect_columns(*n.rhs, out);
                 },
                 [&](const filter::Not& n) { collect_columns(*n.operand, out); },
                 [&](const auto& pred) { add(pred.column); },
             },
             e.node());
}

char fold(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool contains_folded(std::string_view haystack, std::string_view needle) {
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                        [](char a, char b) { return fold(a) == fold(b); });
  return it != haystack.end() || needle.empty();
}

bool starts_with_folded(std::string_view s, std::string_view prefix) {
  if (prefix.size() > s.size()) return false;
  return std::equal(prefix.begin(), prefix.end(), s.begin(),
                    [](char a, char b) { return fold(a) == fold(b); });
}

template <class T>
bool apply(CompareOp op, const T& a, const T& b) {
  switch (op) {
    case CompareOp::Eq: return a == b;
    case CompareOp::Ne: return !(a == b);
    case CompareOp::Lt: return a < b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Gt: return a > b;
    case CompareOp::Ge: return a >= b;
  }
  return false;
}

std::string quoted(const std::string& column) { return "column `" + column + "`"; }

class Evaluator {
 public:
  Evaluator(const Row& row, const Dataset& dataset, std::vector<std::string>& warnings)
      : row_(row), dataset_(dataset), warnings_(warnings) {}

  bool eval(const FilterExpr& e) {
    return std::visit(
        Overloaded{
            [&](const filter::And& n) { return eval(*n.lhs) && eval(*n.rhs); },
            [&](const filter::Or& n) { return eval(*n.lhs) || eval(*n.rhs); },
            [&](const filter::Not& n) { return !eval(*n.operand); },
            [&](const filter::IsMissing& n) {
              const Cell* cell = lookup(n.column);
              return cell && cell->is_missing();
            },
            [&](const filter::Compare& n) {
              const Cell* cell = present(n.column);
              return cell && compare(n.column, *cell, n.op, n.value);
            },
            [&](const filter::Contains& n) {
              const Cell* cell = present(n.column);
              return cell && contains_folded(cell->raw(), n.text);
            },
            [&](const filter::StartsWith& n) {
              const Cell* cell = present(n.column);
              return cell && starts_with_folded(cell->raw(), n.text);
            },
            [&](const filter::InSet& n) {
              const Cell* cell = present(n.column);
              if (!cell) return false;
              return std::any_of(n.values.begin(), n.values.end(), [&](const Literal& lit) {
                return compare(n.column, *cell, CompareOp::Eq, lit);
              });
            },
        },
        e.node());
  }

 private:
  void warn(std::string text) {
    if (std::find(warnings_.begin(), warnings_.end(), text) == warnings_.end()) {
      warnings_.push_back(std::move(text));
    }
  }

  const Cell* lookup(const std::string& column) {
    auto index = dataset_.column_index(column);
    if (!index || *index >= row_.cells.size()) {
      warn("unknown " + quoted(column));
      return nullptr;
    }
    return &row_.cells[*index];
  }

  // Null when the column is unknown or the cell is missing.
  const Cell* present(const std::string& column) {
    const Cell* cell = lookup(column);
    if (cell && cell->is_missing()) {
      warn("missing value in " + quoted(column));
      return nullptr;
    }
    return cell;
  }

  bool compare(const std::string& column, const Cell& cell, CompareOp op, const Literal& lit) {
    std::optional<double> rhs;
    if (lit.is_number()) {
      rhs = lit.number();
    } else if (dataset_.column_type(column).kind == ColumnKind::Numeric) {
      rhs = parse_decimal(lit.text());
    }
    if (!rhs) return apply(op, std::string_view(cell.raw()), std::string_view(lit.text()));

    std::optional<double> lhs = cell.is_number() ? std::optional<double>(cell.number())
                                                 : parse_decimal(cell.raw());
    if (!lhs) {
      warn("non-numeric value in " + quoted(column));
      return false;
    }
    return apply(op, *lhs, *rhs);
  }

  const Row& row_;
  const Dataset& dataset_;
  std::vector<std::string>& warnings_;
};

}  // namespace

std::vector<std::string> referenced_columns(const FilterExpr& expr) {
  std::vector<std::string> out;
  collect_columns(expr, out);
  return out;
}

std::vector<std::string> validate_columns(const FilterExpr& expr, const Dataset& dataset) {
  std::vector<std::string> unknown;
  for (auto& column : referenced_columns(expr)) {
    if (!dataset.has_column(column)) unknown.push_back(std::move(column));
  }
  return unknown;
}

EvalOutcome eval_filter(const FilterExpr& expr, const Row& row, const Dataset& dataset) {
  EvalOutcome outcome;
  outcome.matched = Evaluator(row, dataset, outcome.warnings).eval(expr);
  return outcome;
}

}  // namespace provoscope
