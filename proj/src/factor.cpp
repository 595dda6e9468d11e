#include <algorithm>
#include <map>

#include "provoscope/error.hpp"
#include "provoscope/factor.hpp"

namespace provoscope {

std::string_view to_string(Importance importance) {
  switch (importance) {
    case Importance::High: return "High";
    case Importance::Medium: return "Medium";
    case Importance::Low: return "Low";
  }
  return "Medium";
}

std::optional<Importance> parse_importance(std::string_view text) {
  std::string lower;
  for (char c : text) {
    if (c == ' ' || c == '\t') continue;
    lower += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  if (lower == "high") return Importance::High;
  if (lower == "medium") return Importance::Medium;
  if (lower == "low") return Importance::Low;
  return std::nullopt;
}

Weight weight_of(Importance importance) {
  switch (importance) {
    case Importance::High: return {100};
    case Importance::Medium: return {66};
    case Importance::Low: return {33};
  }
  return {0};
}

double importance_weight(Importance importance) { return weight_of(importance).value(); }

std::string format_weight(Weight weight) {
  std::int64_t h = weight.hundredths;
  std::string sign;
  if (h < 0) {
    sign = "-";
    h = -h;
  }
  std::string out = sign + std::to_string(h / 100) + ".";
  const std::int64_t frac = h % 100;
  if (frac == 0) return out + "0";
  out += static_cast<char>('0' + frac / 10);
  if (frac % 10) out += static_cast<char>('0' + frac % 10);
  return out;
}

std::string_view to_string(FactorStatus status) {
  switch (status) {
    case FactorStatus::Draft: return "Draft";
    case FactorStatus::Analyzed: return "Analyzed";
    case FactorStatus::Unrunnable: return "Unrunnable";
  }
  return "Draft";
}

void Factor::refresh_status() {
  if (source_columns.empty()) {
    status = FactorStatus::Unrunnable;
  } else if (status != FactorStatus::Analyzed) {
    status = FactorStatus::Draft;
  }
}

namespace {

void invalidate(Factor& f) {
  f.filter.reset();
  if (f.analysis) f.analysis->stale = true;
  f.status = FactorStatus::Draft;
  f.refresh_status();
}

}  // namespace

void Factor::set_criteria(std::string text) {
  if (text != criteria && !provocation.empty()) provocation_stale = true;
  criteria = std::move(text);
  invalidate(*this);
}

void Factor::set_source_columns(std::vector<std::string> columns) {
  source_columns = std::move(columns);
  invalidate(*this);
}

namespace {

std::string summarize_warnings(const std::map<std::string, std::size_t>& counts) {
  std::string out;
  for (const auto& [text, rows] : counts) {
    if (!out.empty()) out += "; ";
    out += text + " (" + std::to_string(rows) + (rows == 1 ? " row)" : " rows)");
  }
  return out;
}

void append_sentence(std::string& message, const std::string& sentence) {
  if (sentence.empty()) return;
  if (!message.empty()) message += message.back() == '.' ? " " : ". ";
  message += sentence;
}

}  // namespace

FactorAnalysis analyze_factor(Factor& factor, const Dataset& dataset, const AnalysisInputs& inputs) {
  if (factor.source_columns.empty()) {
    factor.status = FactorStatus::Unrunnable;
    throw UnrunnableFactor("factor \"" + factor.title +
                           "\" has no source columns; choose at least one before analysis");
  }
  std::vector<std::string> unknown;
  for (const auto& column : factor.source_columns) {
    if (!dataset.has_column(column)) unknown.push_back(column);
  }
  if (factor.filter) {
    for (auto& column : validate_columns(*factor.filter, dataset)) {
      if (std::find(unknown.begin(), unknown.end(), column) == unknown.end()) {
        unknown.push_back(std::move(column));
      }
    }
  }
  if (!unknown.empty()) {
    factor.status = FactorStatus::Unrunnable;
    std::string names;
    for (const auto& n : unknown) names += (names.empty() ? "" : ", ") + n;
    throw UnrunnableFactor("factor \"" + factor.title + "\" references unknown column(s): " + names);
  }
  if (!factor.filter && !inputs.explicit_rows) {
    throw Error("MissingFilter", "factor \"" + factor.title + "\" has no filter to apply");
  }

  FactorAnalysis analysis;
  analysis.factor_id = factor.id;
  for (const auto& column : factor.source_columns) {
    analysis.profiles.push_back(profile_column(dataset, column));
  }

  std::map<RowId, const std::string*> model_reasons;
  for (const auto& r : inputs.row_reasons) model_reasons.emplace(r.id, &r.reason);

  std::vector<RowId> matched;
  std::map<std::string, std::size_t> warning_rows;
  std::string templated;
  if (factor.filter) {
    analysis.filter_text = print_filter(*factor.filter);
    templated = "Matches " + analysis.filter_text;
    for (const auto& row : dataset.rows()) {
      auto outcome = eval_filter(*factor.filter, row, dataset);
      for (auto& w : outcome.warnings) ++warning_rows[std::move(w)];
      if (outcome.matched) matched.push_back(row.id);
    }
  } else {
    analysis.degraded = true;
    templated = "Selected by the model";
    std::size_t dropped = 0;
    for (RowId id : *inputs.explicit_rows) {
      if (id < dataset.row_count()) {
        matched.push_back(id);
      } else {
        ++dropped;
      }
    }
    std::sort(matched.begin(), matched.end());
    matched.erase(std::unique(matched.begin(), matched.end()), matched.end());
    if (dropped) warning_rows["model referenced row ids outside the dataset"] = dropped;
  }

  for (RowId id : matched) {
    RowMatch m;
    m.row_id = id;
    if (auto it = model_reasons.find(id); it != model_reasons.end() && !it->second->empty()) {
      m.reason = *it->second;
      m.from_model = true;
    } else {
      m.reason = templated;
    }
    analysis.local_shortlist.push_back(std::move(m));
  }

  std::string message = inputs.message;
  for (const auto& note : inputs.notes) append_sentence(message, note);
  if (matched.empty()) append_sentence(message, "No rows matched this factor.");
  if (!warning_rows.empty()) {
    append_sentence(message, "Warnings: " + summarize_warnings(warning_rows) + ".");
  }
  analysis.message = std::move(message);

  factor.status = FactorStatus::Analyzed;
  factor.analysis = analysis;
  return analysis;
}

}  // namespace provoscope
