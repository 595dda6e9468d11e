#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "provoscope/dataset.hpp"
#include "provoscope/filter.hpp"

namespace provoscope {

// Ordered Low < Medium < High.
enum class Importance { Low, Medium, High };

std::string_view to_string(Importance importance);
// Case-insensitive "high" / "medium" / "low".
std::optional<Importance> parse_importance(std::string_view text);

// Exact factor weight in hundredths (1.0 == 100).
struct Weight {
  std::int64_t hundredths = 0;

  double value() const noexcept { return static_cast<double>(hundredths) / 100.0; }
  friend auto operator<=>(const Weight&, const Weight&) = default;
};

// High 100, Medium 66, Low 33.
Weight weight_of(Importance importance);
// 1.0, 0.66, 0.33.
double importance_weight(Importance importance);
// "1.0", "0.66", "0.33", "1.66", "0.0" ...
std::string format_weight(Weight weight);

enum class FactorStatus { Draft, Analyzed, Unrunnable };

std::string_view to_string(FactorStatus status);

struct RowReason {
  RowId id = 0;
  std::string reason;

  friend bool operator==(const RowReason&, const RowReason&) = default;
};

struct RowMatch {
  RowId row_id = 0;
  std::string reason;
  bool from_model = false;  // reason supplied by the model rather than templated

  friend bool operator==(const RowMatch&, const RowMatch&) = default;
};

struct FactorAnalysis {
  std::string factor_id;
  std::vector<ColumnProfile> profiles;   // one per source column
  std::vector<RowMatch> local_shortlist;  // dataset order
  std::string message;
  std::string filter_text;  // empty in degraded mode
  bool degraded = false;    // shortlist taken from explicit row ids
  bool stale = false;       // criteria or sources edited since this ran

  friend bool operator==(const FactorAnalysis&, const FactorAnalysis&) = default;
};

struct Factor {
  std::string id;
  std::string title;
  std::vector<std::string> source_columns;
  std::string criteria;
  std::string provocation;
  // The provocation was written for criteria that have since been edited.
  bool provocation_stale = false;
  Importance importance = Importance::Medium;
  std::optional<FilterExpr> filter;
  FactorStatus status = FactorStatus::Unrunnable;
  std::optional<FactorAnalysis> analysis;

  // Editing criteria or sources drops the filter and returns the factor to
  // Draft (Unrunnable without source columns). Any analysis is kept but
  // marked stale.
  void set_criteria(std::string text);
  void set_source_columns(std::vector<std::string> columns);
  void set_importance(Importance level) { importance = level; }

  // Re-derives Draft/Unrunnable from the current fields; Analyzed is kept.
  void refresh_status();

  bool runnable() const noexcept { return status != FactorStatus::Unrunnable; }
};

// Model output that accompanies an analysis run.
struct AnalysisInputs {
  std::vector<RowReason> row_reasons;
  std::string message;
  // Degraded mode: shortlist given as explicit row ids instead of a filter.
  std::optional<std::vector<RowId>> explicit_rows;
  std::vector<std::string> notes;  // protocol notes (retries, degraded mode)
};

// Profiles every source column, evaluates the factor's filter over all rows
// and stores the result on the factor (status becomes Analyzed).
// Throws UnrunnableFactor when the factor has no source columns, or when its
// source columns or filter reference unknown columns.
FactorAnalysis analyze_factor(Factor& factor, const Dataset& dataset,
                              const AnalysisInputs& inputs = {});

// ---- global ranking ------------------------------------------------------------

enum class Shade { None, Light, Mid, Strong };

std::string_view to_string(Shade shade);

// 0 -> None, 0.33 -> Light, 0.66 -> Mid, 1.0 -> Strong; UnknownWeight otherwise.
Shade highlight_shade(Weight weight);
Shade highlight_shade(double weight);

struct Contribution {
  std::string factor_id;
  Weight weight;

  friend bool operator==(const Contribution&, const Contribution&) = default;
};

struct RankedRow {
  RowId row_id = 0;
  Weight score;
  std::vector<Contribution> contributors;  // factor-card order
  std::string reason;

  friend bool operator==(const RankedRow&, const RankedRow&) = default;
};

struct CellHighlight {
  RowId row_id = 0;
  std::string column;
  Shade shade = Shade::None;

  friend bool operator==(const CellHighlight&, const CellHighlight&) = default;
};

struct GlobalShortlist {
  // Every row once: score descending, then row id ascending.
  std::vector<RankedRow> entries;
  // Highlighted cells only, by row id then column position.
  std::vector<CellHighlight> highlights;
  std::vector<std::string> factor_ids;  // factors that were scored

  friend bool operator==(const GlobalShortlist&, const GlobalShortlist&) = default;
};

struct FactorMembership {
  Weight weight;
  std::vector<RowId> rows;
};

// score[r] = sum of weights of memberships containing r. Ids outside
// [0, row_count) are ignored; duplicates within one membership count once.
std::vector<Weight> score_rows(std::size_t row_count, std::span<const FactorMembership> memberships);

// Row ids by score descending, ties by ascending id.
std::vector<RowId> order_by_score(std::span<const Weight> scores);

// Ranks every row by the weighted count of analyzed factors whose local
// shortlist contains it. Draft and Unrunnable factors are ignored.
// Throws NoAnalyzedFactors.
GlobalShortlist compute_global_shortlist(const Dataset& dataset, std::span<const Factor> factors);

// "Meets: A (1.0), B (0.33). Does not meet: C." followed by any model-written
// reasons for the row.
std::string compose_reason(const RankedRow& row, std::span<const Factor> factors);

}  // namespace provoscope
