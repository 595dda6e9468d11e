#include <random>

#include "doctest.h"
#include "oracles/ranking_oracle.hpp"
#include "provoscope/error.hpp"
#include "provoscope/factor.hpp"

using namespace provoscope;

namespace {

Dataset ratings() {
  return load_csv(
      "Title,Rating,Genre\n"
      "A,7.2,Drama\n"
      "B,3.5,Comedy\n"
      "C,6.8,Comedy\n"
      "D,4.0,Horror\n"
      "E,9.1,\n",
      "ratings.csv");
}

Factor make_factor(std::string id, std::string title, std::vector<std::string> sources,
                   Importance importance, std::string filter) {
  Factor f;
  f.id = std::move(id);
  f.title = std::move(title);
  f.source_columns = std::move(sources);
  f.criteria = "criteria for " + f.title;
  f.importance = importance;
  f.filter = parse_filter(filter);
  f.refresh_status();
  return f;
}

// Marks the factor analyzed with an explicit local shortlist.
Factor analyzed(std::string id, Importance importance, std::vector<RowId> rows,
                std::vector<std::string> sources = {"x"}) {
  Factor f;
  f.id = id;
  f.title = id;
  f.source_columns = std::move(sources);
  f.importance = importance;
  f.status = FactorStatus::Analyzed;
  FactorAnalysis a;
  a.factor_id = id;
  for (RowId r : rows) a.local_shortlist.push_back({r, "", false});
  f.analysis = a;
  return f;
}

Dataset blank_rows(std::size_t n, std::vector<std::string> headers = {"x"}) {
  std::vector<std::vector<std::string>> records(n, std::vector<std::string>(headers.size(), "v"));
  return Dataset::from_records("blank", headers, records);
}

}  // namespace

TEST_CASE("importance weights") {
  CHECK(importance_weight(Importance::High) == 1.0);
  CHECK(importance_weight(Importance::Medium) == 0.66);
  CHECK(importance_weight(Importance::Low) == 0.33);
  CHECK(weight_of(Importance::High).hundredths == 100);
  CHECK(weight_of(Importance::Medium).hundredths == 66);
  CHECK(weight_of(Importance::Low).hundredths == 33);
  CHECK(Importance::High > Importance::Medium);
  CHECK(Importance::Medium > Importance::Low);
  CHECK(parse_importance("HIGH") == Importance::High);
  CHECK(parse_importance(" medium ") == Importance::Medium);
  CHECK_FALSE(parse_importance("urgent"));
}

TEST_CASE("format_weight renders hundredths") {
  CHECK(format_weight({100}) == "1.0");
  CHECK(format_weight({66}) == "0.66");
  CHECK(format_weight({33}) == "0.33");
  CHECK(format_weight({166}) == "1.66");
  CHECK(format_weight({130}) == "1.3");
  CHECK(format_weight({0}) == "0.0");
}

TEST_CASE("analyze_factor shortlists exactly the matching rows") {
  auto d = ratings();
  auto f = make_factor("f1", "Bad", {"Rating"}, Importance::High, "Rating <= 4.0");
  REQUIRE(f.status == FactorStatus::Draft);

  // Oracle: scan the raw text of the Rating column.
  std::vector<RowId> expected;
  for (const auto& row : d.rows()) {
    if (std::stod(row.cells[1].raw()) <= 4.0) expected.push_back(row.id);
  }
  REQUIRE(expected == std::vector<RowId>{1, 3});

  auto a = analyze_factor(f, d);
  std::vector<RowId> got;
  for (const auto& m : a.local_shortlist) got.push_back(m.row_id);
  CHECK(got == expected);
  CHECK(f.status == FactorStatus::Analyzed);
  REQUIRE(f.analysis);
  CHECK(*f.analysis == a);
  REQUIRE(a.profiles.size() == 1);
  CHECK(a.profiles[0].is_numeric());
  CHECK(a.filter_text == "Rating <= 4");
  CHECK(a.local_shortlist[0].reason == "Matches Rating <= 4");
  CHECK(a.message.empty());
}

TEST_CASE("factors without source columns cannot be analyzed") {
  auto d = ratings();
  auto f = make_factor("f1", "Vibes", {}, Importance::High, "Rating > 1");
  CHECK(f.status == FactorStatus::Unrunnable);
  CHECK_THROWS_AS(analyze_factor(f, d), UnrunnableFactor);
  CHECK(f.status == FactorStatus::Unrunnable);

  auto g = make_factor("f2", "Budget", {"Budget"}, Importance::High, "Budget > 1");
  CHECK_THROWS_AS(analyze_factor(g, d), UnrunnableFactor);
  auto h = make_factor("f3", "Mixed", {"Rating"}, Importance::High, "Budget > 1");
  CHECK_THROWS_AS(analyze_factor(h, d), UnrunnableFactor);
}

TEST_CASE("zero matches produce an empty shortlist and a note") {
  auto d = ratings();
  auto f = make_factor("f1", "Perfect", {"Rating"}, Importance::Low, "Rating > 10");
  auto a = analyze_factor(f, d);
  CHECK(a.local_shortlist.empty());
  CHECK(a.message == "No rows matched this factor.");
}

TEST_CASE("analysis message merges model text, notes and warnings") {
  auto d = ratings();
  auto f = make_factor("f1", "Comedy", {"Genre"}, Importance::Medium, "Genre contains \"comedy\"");
  AnalysisInputs in;
  in.message = "Genre labels are coarse";
  in.notes = {"Filter accepted after one retry."};
  in.row_reasons = {{2, "Comedy listed"}, {0, "not a comedy"}};
  auto a = analyze_factor(f, d, in);
  REQUIRE(a.local_shortlist.size() == 2);
  CHECK(a.local_shortlist[0].row_id == 1);
  CHECK_FALSE(a.local_shortlist[0].from_model);
  CHECK(a.local_shortlist[1].reason == "Comedy listed");
  CHECK(a.local_shortlist[1].from_model);
  CHECK(a.message ==
        "Genre labels are coarse. Filter accepted after one retry. "
        "Warnings: missing value in column `Genre` (1 row).");
  REQUIRE(a.profiles.size() == 1);
  CHECK_FALSE(a.profiles[0].is_numeric());
}

TEST_CASE("degraded analysis uses explicit row ids") {
  auto d = ratings();
  Factor f;
  f.id = "f1";
  f.title = "Manual";
  f.source_columns = {"Title"};
  f.refresh_status();
  AnalysisInputs in;
  in.explicit_rows = std::vector<RowId>{4, 0, 4, 99};
  auto a = analyze_factor(f, d, in);
  CHECK(a.degraded);
  REQUIRE(a.local_shortlist.size() == 2);
  CHECK(a.local_shortlist[0].row_id == 0);
  CHECK(a.local_shortlist[1].row_id == 4);
  CHECK(a.message.find("outside the dataset (1 row)") != std::string::npos);

  Factor g = f;
  CHECK_THROWS_AS(analyze_factor(g, d), Error);
}

TEST_CASE("editing criteria or sources returns the factor to Draft") {
  auto d = ratings();
  auto f = make_factor("f1", "Bad", {"Rating"}, Importance::High, "Rating <= 4.0");
  f.provocation = "Low ratings may reflect niche appeal.";
  analyze_factor(f, d);
  REQUIRE(f.status == FactorStatus::Analyzed);

  f.set_importance(Importance::Low);
  CHECK(f.status == FactorStatus::Analyzed);

  f.set_criteria("very bad movies");
  CHECK(f.status == FactorStatus::Draft);
  CHECK_FALSE(f.filter);
  REQUIRE(f.analysis);
  CHECK(f.analysis->stale);
  CHECK(f.provocation_stale);

  f.set_source_columns({});
  CHECK(f.status == FactorStatus::Unrunnable);
  f.set_source_columns({"Rating"});
  CHECK(f.status == FactorStatus::Draft);
}

TEST_CASE("highlight shades") {
  CHECK(highlight_shade(1.0) == Shade::Strong);
  CHECK(highlight_shade(0.66) == Shade::Mid);
  CHECK(highlight_shade(0.33) == Shade::Light);
  CHECK(highlight_shade(0.0) == Shade::None);
  CHECK(highlight_shade(Weight{100}) == Shade::Strong);
  CHECK_THROWS_AS(highlight_shade(0.5), UnknownWeight);
  CHECK_THROWS_AS(highlight_shade(Weight{166}), UnknownWeight);
  const std::vector<Weight> ws = {{0}, {33}, {66}, {100}};
  for (std::size_t i = 1; i < ws.size(); ++i) {
    CHECK(highlight_shade(ws[i - 1]) < highlight_shade(ws[i]));
  }
}

TEST_CASE("one High and one Medium membership scores 1.66") {
  auto d = blank_rows(3);
  std::vector<Factor> fs = {analyzed("a", Importance::High, {1}), analyzed("b", Importance::Medium, {1, 2})};
  auto g = compute_global_shortlist(d, fs);
  REQUIRE(g.entries.size() == 3);
  CHECK(g.entries[0].row_id == 1);
  CHECK(g.entries[0].score.hundredths == 166);
  CHECK(g.entries[0].score.value() == doctest::Approx(1.66));
  CHECK(g.entries[1].row_id == 2);
  CHECK(g.entries[2].row_id == 0);
  CHECK(g.entries[2].score.hundredths == 0);
  CHECK(g.entries[0].contributors ==
        std::vector<Contribution>{{"a", Weight{100}}, {"b", Weight{66}}});
}

TEST_CASE("4 rows x 3 factors matches the hand-computed oracle") {
  auto d = blank_rows(4);
  std::vector<Factor> fs = {analyzed("A", Importance::High, {1, 3}),
                            analyzed("B", Importance::Medium, {0, 1}),
                            analyzed("C", Importance::Low, {3})};
  auto o = oracle::brute_force_rank(4, {{100, {1, 3}}, {66, {0, 1}}, {33, {3}}});
  // Frozen: r0 = 0.66, r1 = 1.66, r2 = 0, r3 = 1.33.
  REQUIRE(o.scores == std::vector<std::int64_t>{66, 166, 0, 133});
  REQUIRE(o.order == std::vector<std::uint64_t>{1, 3, 0, 2});

  auto g = compute_global_shortlist(d, fs);
  std::vector<std::uint64_t> order;
  for (const auto& e : g.entries) {
    order.push_back(e.row_id);
    CHECK(e.score.hundredths == o.scores[e.row_id]);
  }
  CHECK(order == o.order);
}

TEST_CASE("draft and unrunnable factors are excluded") {
  auto d = blank_rows(3);
  auto draft = analyzed("d", Importance::High, {0});
  draft.status = FactorStatus::Draft;
  auto unrunnable = analyzed("u", Importance::High, {0});
  unrunnable.status = FactorStatus::Unrunnable;
  std::vector<Factor> only_inactive = {draft, unrunnable};
  CHECK_THROWS_AS(compute_global_shortlist(d, only_inactive), NoAnalyzedFactors);
  CHECK_THROWS_AS(compute_global_shortlist(d, std::vector<Factor>{}), NoAnalyzedFactors);

  std::vector<Factor> fs = {draft, analyzed("a", Importance::Low, {2}), unrunnable};
  auto g = compute_global_shortlist(d, fs);
  CHECK(g.factor_ids == std::vector<std::string>{"a"});
  CHECK(g.entries[0].row_id == 2);
  CHECK(g.entries[0].score.hundredths == 33);
  CHECK(g.entries[1].score.hundredths == 0);
  CHECK(g.entries[1].reason == "Meets no analyzed factors.");
}

TEST_CASE("highlights use the strongest satisfied factor per column") {
  auto d = blank_rows(2, {"Title", "Rating", "Genre"});
  std::vector<Factor> fs = {analyzed("a", Importance::Low, {0, 1}, {"Rating", "Genre"}),
                            analyzed("b", Importance::High, {0}, {"Rating"})};
  auto g = compute_global_shortlist(d, fs);
  std::vector<CellHighlight> expected = {
      {0, "Rating", Shade::Strong}, {0, "Genre", Shade::Light},
      {1, "Rating", Shade::Light},  {1, "Genre", Shade::Light}};
  CHECK(g.highlights == expected);
}

TEST_CASE("compose_reason templates") {
  std::vector<Factor> fs = {analyzed("A", Importance::High, {0}), analyzed("B", Importance::Low, {0}),
                            analyzed("C", Importance::Medium, {})};
  RankedRow row{0, Weight{133}, {{"A", Weight{100}}, {"B", Weight{33}}}, ""};
  CHECK(compose_reason(row, fs) == "Meets: A (1.0), B (0.33). Does not meet: C.");
  CHECK(compose_reason(row, fs) == compose_reason(row, fs));

  RankedRow none{1, Weight{0}, {}, ""};
  CHECK(compose_reason(none, fs) == "Meets no analyzed factors.");

  fs[0].analysis->local_shortlist[0] = {0, "campy acting", true};
  CHECK(compose_reason(row, fs) ==
        "Meets: A (1.0), B (0.33). Does not meet: C. Notes: A: campy acting");
}

TEST_CASE("property: scores and ranking match the brute-force oracle") {
  std::mt19937_64 rng(31337);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t rows = 1 + rng() % 200;
    const std::size_t nf = 1 + rng() % 5;
    auto d = blank_rows(rows);
    std::vector<Factor> fs;
    std::vector<oracle::OracleFactor> of;
    for (std::size_t k = 0; k < nf; ++k) {
      auto imp = static_cast<Importance>(rng() % 3);
      std::vector<RowId> members;
      for (RowId r = 0; r < rows; ++r) {
        if (rng() % 3 == 0) members.push_back(r);
      }
      fs.push_back(analyzed("f" + std::to_string(k), imp, members));
      of.push_back({weight_of(imp).hundredths, {members.begin(), members.end()}});
    }
    auto o = oracle::brute_force_rank(rows, of);
    auto g = compute_global_shortlist(d, fs);
    REQUIRE(g.entries.size() == rows);
    for (std::size_t i = 0; i < rows; ++i) {
      REQUIRE(g.entries[i].row_id == o.order[i]);
      REQUIRE(g.entries[i].score.hundredths == o.scores[o.order[i]]);
    }
  }
}

TEST_CASE("property: ordering is invariant under uniform weight scaling") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = 1 + rng() % 100;
    std::vector<FactorMembership> base;
    for (std::size_t k = 0, nf = 1 + rng() % 5; k < nf; ++k) {
      FactorMembership m{weight_of(static_cast<Importance>(rng() % 3)), {}};
      for (RowId r = 0; r < rows; ++r) {
        if (rng() % 2) m.rows.push_back(r);
      }
      base.push_back(m);
    }
    const std::int64_t factor = 2 + static_cast<std::int64_t>(rng() % 50);
    auto scaled = base;
    for (auto& m : scaled) m.weight.hundredths *= factor;
    auto a = score_rows(rows, base);
    auto b = score_rows(rows, scaled);
    CHECK(order_by_score(a) == order_by_score(b));
  }
}

TEST_CASE("property: removing or demoting a factor never raises a score") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = 1 + rng() % 60;
    auto d = blank_rows(rows);
    std::vector<Factor> fs;
    for (std::size_t k = 0, nf = 1 + rng() % 5; k < nf; ++k) {
      std::vector<RowId> members;
      for (RowId r = 0; r < rows; ++r) {
        if (rng() % 2) members.push_back(r);
      }
      fs.push_back(analyzed("f" + std::to_string(k), static_cast<Importance>(rng() % 3), members));
    }
    const auto before = compute_global_shortlist(d, fs);
    std::vector<std::int64_t> old_scores(rows);
    for (const auto& e : before.entries) old_scores[e.row_id] = e.score.hundredths;

    auto demoted = fs;
    const std::size_t victim = rng() % fs.size();
    if (demoted[victim].importance != Importance::Low) {
      demoted[victim].importance = static_cast<Importance>(static_cast<int>(demoted[victim].importance) - 1);
    }
    for (const auto& e : compute_global_shortlist(d, demoted).entries) {
      CHECK(e.score.hundredths <= old_scores[e.row_id]);
    }
    auto removed = fs;
    removed.erase(removed.begin() + static_cast<std::ptrdiff_t>(victim));
    if (removed.empty()) continue;
    for (const auto& e : compute_global_shortlist(d, removed).entries) {
      CHECK(e.score.hundredths <= old_scores[e.row_id]);
    }
  }
}

TEST_CASE("equal scores keep file order") {
  auto d = blank_rows(6);
  std::vector<Factor> fs = {analyzed("a", Importance::Medium, {5, 1, 3})};
  auto g = compute_global_shortlist(d, fs);
  std::vector<RowId> order;
  for (const auto& e : g.entries) order.push_back(e.row_id);
  CHECK(order == std::vector<RowId>{1, 3, 5, 0, 2, 4});
}
