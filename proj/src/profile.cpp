#include <algorithm>
#include <cmath>
#include <map>

#include "provoscope/dataset.hpp"
#include "provoscope/error.hpp"

namespace provoscope {

namespace {

// Neumaier-compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

NumericProfile profile_numeric(const Dataset& dataset, std::size_t column) {
  NumericProfile p;
  std::vector<double> values;
  values.reserve(dataset.row_count());
  for (const auto& row : dataset.rows()) {
    const Cell& cell = row.cells[column];
    if (cell.is_number()) {
      values.push_back(cell.number());
    } else if (!cell.is_missing()) {
      ++p.non_numeric;
    }
  }
  p.count = values.size();
  p.missing = dataset.row_count() - p.count;
  if (values.empty()) return p;

  const double n = static_cast<double>(p.count);
  CompensatedSum sum;
  for (double x : values) sum.add(x);
  p.mean = sum.value() / n;
  CompensatedSum squares;
  for (double x : values) squares.add((x - p.mean) * (x - p.mean));
  p.stddev = std::sqrt(squares.value() / n);
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  p.min = *lo;
  p.max = *hi;

  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double upper = values[mid];
  if (values.size() % 2 == 1) {
    p.median = upper;
  } else {
    double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    p.median = lower + (upper - lower) / 2.0;
  }
  return p;
}

TextProfile profile_text(const Dataset& dataset, std::size_t column) {
  TextProfile p;
  std::map<std::string, std::size_t> counts;
  for (const auto& row : dataset.rows()) {
    const Cell& cell = row.cells[column];
    if (cell.is_missing()) {
      ++p.missing;
      continue;
    }
    ++p.count;
    ++counts[cell.raw()];
  }
  p.distinct = counts.size();
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // `counts` iterates in ascending value order, so a stable sort by count
  // leaves ties lexicographic.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > TextProfile::kTopValues) ranked.resize(TextProfile::kTopValues);
  p.top_values = std::move(ranked);
  return p;
}

}  // namespace

ColumnProfile profile_column(const Dataset& dataset, std::string_view column) {
  auto index = dataset.column_index(column);
  if (!index) throw UnknownColumn({std::string(column)});
  ColumnProfile profile;
  profile.column = std::string(column);
  if (dataset.column_type(*index).kind == ColumnKind::Numeric) {
    profile.stats = profile_numeric(dataset, *index);
  } else {
    profile.stats = profile_text(dataset, *index);
  }
  return profile;
}

}  // namespace provoscope
