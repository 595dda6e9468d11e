#include <algorithm>
#include <cmath>
#include <numeric>

#include "provoscope/error.hpp"
#include "provoscope/factor.hpp"

namespace provoscope {

std::string_view to_string(Shade shade) {
  switch (shade) {
    case Shade::None: return "None";
    case Shade::Light: return "Light";
    case Shade::Mid: return "Mid";
    case Shade::Strong: return "Strong";
  }
  return "None";
}

Shade highlight_shade(Weight weight) {
  switch (weight.hundredths) {
    case 0: return Shade::None;
    case 33: return Shade::Light;
    case 66: return Shade::Mid;
    case 100: return Shade::Strong;
    default: throw UnknownWeight(format_weight(weight));
  }
}

Shade highlight_shade(double weight) {
  const double scaled = weight * 100.0;
  const double rounded = std::round(scaled);
  if (!std::isfinite(scaled) || std::abs(scaled - rounded) > 1e-9) {
    throw UnknownWeight(std::to_string(weight));
  }
  return highlight_shade(Weight{static_cast<std::int64_t>(rounded)});
}

std::vector<Weight> score_rows(std::size_t row_count, std::span<const FactorMembership> memberships) {
  std::vector<Weight> scores(row_count);
  std::vector<char> seen(row_count);
  for (const auto& m : memberships) {
    std::fill(seen.begin(), seen.end(), 0);
    for (RowId id : m.rows) {
      if (id >= row_count || seen[id]) continue;
      seen[id] = 1;
      scores[id].hundredths += m.weight.hundredths;
    }
  }
  return scores;
}

std::vector<RowId> order_by_score(std::span<const Weight> scores) {
  std::vector<RowId> order(scores.size());
  std::iota(order.begin(), order.end(), RowId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](RowId a, RowId b) { return scores[a] > scores[b]; });
  return order;
}

namespace {

const Factor* find_factor(std::span<const Factor> factors, const std::string& id) {
  for (const auto& f : factors) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

std::string display_title(const Factor& f) { return f.title.empty() ? f.id : f.title; }

bool scored(const Factor& f) { return f.status == FactorStatus::Analyzed && f.analysis; }

}  // namespace

GlobalShortlist compute_global_shortlist(const Dataset& dataset, std::span<const Factor> factors) {
  std::vector<const Factor*> analyzed;
  for (const auto& f : factors) {
    if (scored(f)) analyzed.push_back(&f);
  }
  if (analyzed.empty()) throw NoAnalyzedFactors();

  const std::size_t n = dataset.row_count();
  std::vector<FactorMembership> memberships;
  for (const Factor* f : analyzed) {
    FactorMembership m{weight_of(f->importance), {}};
    for (const auto& match : f->analysis->local_shortlist) m.rows.push_back(match.row_id);
    memberships.push_back(std::move(m));
  }
  const auto scores = score_rows(n, memberships);

  // Per-row contributors, in factor-card order.
  std::vector<std::vector<Contribution>> contributors(n);
  for (std::size_t k = 0; k < analyzed.size(); ++k) {
    std::vector<char> seen(n);
    for (RowId id : memberships[k].rows) {
      if (id >= n || seen[id]) continue;
      seen[id] = 1;
      contributors[id].push_back({analyzed[k]->id, memberships[k].weight});
    }
  }

  GlobalShortlist out;
  for (const Factor* f : analyzed) out.factor_ids.push_back(f->id);

  for (RowId id : order_by_score(scores)) {
    RankedRow row;
    row.row_id = id;
    row.score = scores[id];
    row.contributors = std::move(contributors[id]);
    row.reason = compose_reason(row, factors);

    // Strongest satisfied weight per source column.
    std::vector<Weight> cell_weight(dataset.column_count());
    for (const auto& c : row.contributors) {
      const Factor* f = find_factor(factors, c.factor_id);
      for (const auto& column : f->source_columns) {
        if (auto index = dataset.column_index(column)) {
          cell_weight[*index] = std::max(cell_weight[*index], c.weight);
        }
      }
    }
    for (std::size_t col = 0; col < cell_weight.size(); ++col) {
      if (cell_weight[col].hundredths == 0) continue;
      out.highlights.push_back({id, dataset.headers()[col], highlight_shade(cell_weight[col])});
    }
    out.entries.push_back(std::move(row));
  }
  std::stable_sort(out.highlights.begin(), out.highlights.end(),
                   [](const CellHighlight& a, const CellHighlight& b) { return a.row_id < b.row_id; });
  return out;
}

std::string compose_reason(const RankedRow& row, std::span<const Factor> factors) {
  std::string met;
  for (const auto& c : row.contributors) {
    const Factor* f = find_factor(factors, c.factor_id);
    if (!met.empty()) met += ", ";
    met += (f ? display_title(*f) : c.factor_id) + " (" + format_weight(c.weight) + ")";
  }

  std::string unmet;
  std::string notes;
  for (const auto& f : factors) {
    if (!scored(f)) continue;
    const bool satisfied = std::any_of(row.contributors.begin(), row.contributors.end(),
                                       [&](const Contribution& c) { return c.factor_id == f.id; });
    if (!satisfied) {
      if (!unmet.empty()) unmet += ", ";
      unmet += display_title(f);
      continue;
    }
    for (const auto& m : f.analysis->local_shortlist) {
      if (m.row_id == row.row_id && m.from_model) {
        if (!notes.empty()) notes += "; ";
        notes += display_title(f) + ": " + m.reason;
      }
    }
  }

  std::string out;
  if (met.empty()) {
    out = "Meets no analyzed factors.";
  } else {
    out = "Meets: " + met + ".";
    if (!unmet.empty()) out += " Does not meet: " + unmet + ".";
  }
  if (!notes.empty()) out += " Notes: " + notes;
  return out;
}

}  // namespace provoscope
