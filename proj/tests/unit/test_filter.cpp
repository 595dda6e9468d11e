#include <chrono>

#include "doctest.h"
#include "oracles/filter_oracle.hpp"
#include "provoscope/error.hpp"
#include "provoscope/filter.hpp"

using namespace provoscope;

namespace {

Dataset movies() {
  return load_csv(
      "Title,Genre,Rating,Budget\n"
      "Alpha,Dark Comedy,8.1,10\n"
      "Beta,Drama,3.9,\n"
      "Gamma,comedy,4.0,abc\n",
      "movies.csv");
}

// Every column the default generator can produce, three rows.
oracle::ToyTable toy_table() {
  oracle::ToyTable t;
  t.columns = {"Rating", "Genre", "Release Year", "and", "odd`name", "_x1", "Título"};
  t.numeric_columns = {"Rating", "Release Year", "_x1"};
  t.rows = {
      {{{"Rating", "7.5"}, {"Genre", "Dark Comedy"}, {"Release Year", "0"}, {"and", "NOT"},
        {"odd`name", "say \"hi\""}, {"_x1", "-3"}, {"Título", "é"}}},
      {{{"Rating", "4.0"}, {"Genre", "Comedy"}, {"Release Year", std::nullopt}, {"and", "4.0"},
        {"odd`name", ""}, {"_x1", "123456.789"}, {"Título", "back\\slash"}}},
      {{{"Rating", "9"}, {"Genre", "comedy"}, {"Release Year", "1e20"}, {"and", "Comedy"},
        {"odd`name", "Dark"}, {"_x1", "0.1"}, {"Título", std::nullopt}}},
  };
  return t;
}

Dataset to_dataset(const oracle::ToyTable& t) {
  std::vector<std::vector<std::string>> records;
  for (const auto& row : t.rows) {
    std::vector<std::string> rec;
    for (const auto& c : t.columns) rec.push_back(row.cells.at(c).value_or(""));
    records.push_back(rec);
  }
  return Dataset::from_records("toy", t.columns, records);
}

}  // namespace

TEST_CASE("parse a single comparison") {
  CHECK(parse_filter("Rating >= 7.5") ==
        FilterExpr::compare("Rating", CompareOp::Ge, number_literal(7.5)));
}

TEST_CASE("parse a conjunction of contains and comparison") {
  auto expected = FilterExpr::all(FilterExpr::contains("Genre", "Comedy"),
                                  FilterExpr::compare("Rating", CompareOp::Le, number_literal(4.0)));
  CHECK(parse_filter("Genre contains \"Comedy\" and Rating <= 4.0") == expected);
  CHECK(parse_filter("Genre CONTAINS \"Comedy\" AND Rating <= 4.0") == expected);
  CHECK(parse_filter("(Genre Contains \"Comedy\") And (Rating<=4)") == expected);
}

TEST_CASE("malformed input reports the failing token") {
  try {
    parse_filter("and and");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.token() == 1);
    CHECK(e.offset() == 0);
  }
  const auto token_of = [](std::string_view src) -> std::size_t {
    try {
      parse_filter(src);
    } catch (const ParseError& e) {
      return e.token();
    }
    return 0;
  };
  CHECK(token_of("Rating >=") == 3);
  CHECK(token_of("Rating = 3") == 2);
  CHECK(token_of("Rating >= 7 Genre") == 4);
  CHECK(token_of("Genre in []") == 4);
  CHECK(token_of("Genre in [1,") == 6);
  CHECK(token_of("Genre is there") == 3);
  CHECK(token_of("Genre contains 3") == 3);
  CHECK(token_of("(Rating > 1") == 5);
  CHECK(token_of("Genre contains \"open") == 3);
  CHECK(token_of("`open") == 1);
  CHECK(token_of("") == 1);
  CHECK(token_of("not not Rating > 1") == 2);
}

TEST_CASE("precedence is not > and > or") {
  auto a = FilterExpr::compare("a", CompareOp::Eq, number_literal(1));
  auto b = FilterExpr::compare("b", CompareOp::Eq, number_literal(2));
  auto c = FilterExpr::compare("c", CompareOp::Eq, number_literal(3));
  CHECK(parse_filter("a == 1 or b == 2 and not c == 3") ==
        FilterExpr::any(a, FilterExpr::all(b, FilterExpr::negate(c))));
  CHECK(parse_filter("a == 1 and b == 2 or c == 3") ==
        FilterExpr::any(FilterExpr::all(a, b), c));
  CHECK(parse_filter("a == 1 and b == 2 and c == 3") ==
        FilterExpr::all(FilterExpr::all(a, b), c));
}

TEST_CASE("quoted column names and string escapes") {
  CHECK(parse_filter("`Release Year` < 2000") ==
        FilterExpr::compare("Release Year", CompareOp::Lt, number_literal(2000)));
  CHECK(parse_filter("`a``b` is missing") == FilterExpr::is_missing("a`b"));
  CHECK(parse_filter("`and` is MISSING") == FilterExpr::is_missing("and"));
  CHECK(parse_filter(R"(Title == "say \"hi\" \\ C:\temp")") ==
        FilterExpr::compare("Title", CompareOp::Eq, text_literal(R"(say "hi" \ C:\temp)")));
  CHECK(parse_filter("Genre in [\"A\", 2, -3.5]") ==
        FilterExpr::in_set("Genre", {text_literal("A"), number_literal(2), number_literal(-3.5)}));
}

TEST_CASE("print canonical forms") {
  CHECK(print_filter(FilterExpr::compare("Rating", CompareOp::Ge, number_literal(7.5))) ==
        "Rating >= 7.5");
  auto a = FilterExpr::compare("a", CompareOp::Ne, number_literal(1));
  auto b = FilterExpr::contains("b", "x");
  auto c = FilterExpr::is_missing("Release Year");
  CHECK(print_filter(FilterExpr::all(FilterExpr::any(a, b), c)) ==
        "(a != 1 or b contains \"x\") and `Release Year` is missing");
  CHECK(print_filter(FilterExpr::any(a, FilterExpr::all(b, c))) ==
        "a != 1 or (b contains \"x\" and `Release Year` is missing)");
  CHECK(print_filter(FilterExpr::negate(FilterExpr::all(a, b))) ==
        "not (a != 1 and b contains \"x\")");
  CHECK(print_filter(FilterExpr::negate(FilterExpr::negate(a))) == "not (not a != 1)");
  CHECK(print_filter(FilterExpr::in_set("or", {text_literal("q\""), number_literal(1e20)})) ==
        "`or` in [\"q\\\"\", 1e+20]");
}

TEST_CASE("property: random ASTs round-trip through print and parse") {
  oracle::ExprGen gen(1234);
  for (int i = 0; i < 1000; ++i) {
    auto e = gen.expr(4);
    auto text = print_filter(e);
    INFO(text);
    REQUIRE(parse_filter(text) == e);
    CHECK(print_filter(parse_filter(text)) == text);
  }
}

TEST_CASE("validate_columns reports unknown names in first-occurrence order") {
  auto d = movies();
  CHECK(validate_columns(parse_filter("Rating > 1 and Genre contains \"x\""), d).empty());
  CHECK(validate_columns(parse_filter("Budget2 > 1"), d) == std::vector<std::string>{"Budget2"});
  CHECK(validate_columns(parse_filter("Zed > 1 or (Rating > 2 and Alpha is missing) or Zed < 0"), d) ==
        std::vector<std::string>{"Zed", "Alpha"});
  CHECK(validate_columns(parse_filter("rating > 1"), d) == std::vector<std::string>{"rating"});
}

TEST_CASE("eval_filter basic semantics") {
  auto d = movies();
  const auto& rows = d.rows();
  CHECK(eval_filter(parse_filter("Rating >= 7.5"), rows[0], d).matched);
  CHECK_FALSE(eval_filter(parse_filter("Rating >= 7.5"), rows[1], d).matched);
  CHECK(eval_filter(parse_filter("Genre contains \"comedy\""), rows[0], d).matched);
  CHECK(eval_filter(parse_filter("Genre startswith \"DARK\""), rows[0], d).matched);
  CHECK_FALSE(eval_filter(parse_filter("Genre startswith \"comedy\""), rows[0], d).matched);
  // Equality on text is case-sensitive.
  CHECK_FALSE(eval_filter(parse_filter("Genre == \"Comedy\""), rows[2], d).matched);
  CHECK(eval_filter(parse_filter("Genre == \"comedy\""), rows[2], d).matched);
  CHECK(eval_filter(parse_filter("Genre in [\"Drama\", \"x\"]"), rows[1], d).matched);
  // A string literal against a numeric column compares numerically.
  CHECK(eval_filter(parse_filter("Rating == \"4\""), rows[2], d).matched);
  // Code-point ordering for text comparisons.
  CHECK(eval_filter(parse_filter("Title < \"Beta\""), rows[0], d).matched);
  CHECK(eval_filter(parse_filter("Title > \"B\""), rows[1], d).matched);
}

TEST_CASE("missing cells fail predicates with a warning") {
  auto d = movies();
  const auto& beta = d.rows()[1];
  auto out = eval_filter(parse_filter("Budget > 5"), beta, d);
  CHECK_FALSE(out.matched);
  REQUIRE(out.warnings.size() == 1);
  CHECK(out.warnings[0] == "missing value in column `Budget`");

  CHECK(eval_filter(parse_filter("Budget is missing"), beta, d).matched);
  CHECK(eval_filter(parse_filter("Budget is missing"), beta, d).warnings.empty());
  CHECK_FALSE(eval_filter(parse_filter("Budget != 5"), beta, d).matched);
  CHECK(eval_filter(parse_filter("not Budget > 5"), beta, d).matched);
}

TEST_CASE("non-numeric cells under numeric comparison are non-matches") {
  auto d = movies();
  auto out = eval_filter(parse_filter("Budget < 100"), d.rows()[2], d);
  CHECK_FALSE(out.matched);
  REQUIRE(out.warnings.size() == 1);
  CHECK(out.warnings[0] == "non-numeric value in column `Budget`");
  auto text = eval_filter(parse_filter("Title > 3"), d.rows()[0], d);
  CHECK_FALSE(text.matched);
  CHECK_FALSE(text.warnings.empty());
}

TEST_CASE("eval is total even with unknown columns") {
  auto d = movies();
  auto out = eval_filter(parse_filter("Nope > 1 or Rating > 1"), d.rows()[0], d);
  CHECK(out.matched);
  CHECK(out.warnings == std::vector<std::string>{"unknown column `Nope`"});
}

TEST_CASE("exhaustive check against the reference evaluator on a 3-row table") {
  auto table = toy_table();
  auto d = to_dataset(table);
  REQUIRE(d.column_type("Rating").kind == ColumnKind::Numeric);
  REQUIRE(d.column_type("Release Year").kind == ColumnKind::Numeric);
  REQUIRE(d.column_type("_x1").kind == ColumnKind::Numeric);
  REQUIRE(d.column_type("Genre").kind == ColumnKind::Text);

  oracle::ExprGen gen(99);
  std::size_t matches = 0;
  for (int i = 0; i < 2000; ++i) {
    auto e = gen.expr(3);
    for (std::size_t r = 0; r < d.row_count(); ++r) {
      bool expected = oracle::eval(table, table.rows[r], e);
      INFO(print_filter(e), " row ", r);
      REQUIRE(eval_filter(e, d.rows()[r], d).matched == expected);
      matches += expected;
    }
  }
  // The generated set exercises both outcomes.
  CHECK(matches > 500);
  CHECK(matches < 5500);
}

TEST_CASE("property: De Morgan and conjunction monotonicity") {
  auto table = toy_table();
  auto d = to_dataset(table);
  oracle::ExprGen gen(5);
  for (int i = 0; i < 1000; ++i) {
    auto a = gen.expr(2);
    auto b = gen.expr(2);
    const auto& row = d.rows()[gen.rng()() % d.row_count()];
    bool lhs = eval_filter(FilterExpr::negate(FilterExpr::all(a, b)), row, d).matched;
    bool rhs = eval_filter(FilterExpr::any(FilterExpr::negate(a), FilterExpr::negate(b)), row, d).matched;
    REQUIRE(lhs == rhs);
    if (eval_filter(FilterExpr::all(a, b), row, d).matched) {
      REQUIRE(eval_filter(a, row, d).matched);
    }
  }
}

TEST_CASE("evaluation is deterministic") {
  auto d = movies();
  auto e = parse_filter("Budget > 1 or Genre contains \"com\"");
  for (const auto& row : d.rows()) {
    auto first = eval_filter(e, row, d);
    auto second = eval_filter(e, row, d);
    CHECK(first.matched == second.matched);
    CHECK(first.warnings == second.warnings);
  }
}
