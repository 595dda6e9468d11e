#include "provoscope/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <memory>
#include <unordered_set>

#include "provoscope/error.hpp"
#include "sha256.hpp"

namespace provoscope {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// [+-]? digits [. digits]? ([eE][+-]?digits)?  with at least one mantissa digit.
bool looks_decimal(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t mantissa_digits = 0;
  while (i < s.size() && is_digit(s[i])) ++i, ++mantissa_digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && is_digit(s[i])) ++i, ++mantissa_digits;
  }
  if (mantissa_digits == 0) return false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < s.size() && is_digit(s[i])) ++i, ++exp_digits;
    if (exp_digits == 0) return false;
  }
  return i == s.size();
}

}  // namespace

std::optional<double> parse_decimal(std::string_view text) {
  auto s = trim(text);
  if (!looks_decimal(s)) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string_view to_string(ColumnKind kind) {
  return kind == ColumnKind::Numeric ? "numeric" : "text";
}

Cell::Cell(std::string raw, bool numeric_column) : raw_(std::move(raw)) {
  if (trim(raw_).empty()) {
    kind_ = Kind::Missing;
    return;
  }
  kind_ = Kind::Text;
  if (numeric_column) {
    if (auto value = parse_decimal(raw_)) {
      kind_ = Kind::Number;
      number_ = *value;
    }
  }
}

Dataset Dataset::from_records(std::string name, std::vector<std::string> headers,
                              std::vector<std::vector<std::string>> records,
                              std::vector<std::size_t> record_lines) {
  if (headers.empty()) throw EmptyFile();
  if (headers.size() > kMaxDatasetColumns) {
    throw DatasetTooLarge("dataset has " + std::to_string(headers.size()) +
                          " columns; the limit is " + std::to_string(kMaxDatasetColumns));
  }
  if (records.size() > kMaxDatasetRows) {
    throw DatasetTooLarge("dataset has " + std::to_string(records.size()) +
                          " rows; the limit is " + std::to_string(kMaxDatasetRows));
  }

  Dataset d;
  d.name_ = std::move(name);
  for (std::size_t c = 0; c < headers.size(); ++c) {
    std::string header(trim(headers[c]));
    if (header.empty()) throw EmptyHeader(c);
    if (!d.index_.emplace(header, c).second) throw DuplicateHeader(header);
    d.headers_.push_back(std::move(header));
  }

  const std::size_t width = d.headers_.size();
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].size() != width) {
      // Header is line 1; without line info assume one record per line.
      std::size_t line = r < record_lines.size() ? record_lines[r] : r + 2;
      throw RaggedRow(line, width, records[r].size());
    }
  }

  // Type inference per column.
  d.column_types_.resize(width);
  for (std::size_t c = 0; c < width; ++c) {
    std::size_t present = 0;
    std::size_t numeric = 0;
    for (const auto& record : records) {
      if (trim(record[c]).empty()) continue;
      ++present;
      if (parse_decimal(record[c])) ++numeric;
    }
    auto& type = d.column_types_[c];
    // Integer form of numeric / present >= 0.95.
    if (present > 0 && numeric * 100 >= present * 95) {
      type.kind = ColumnKind::Numeric;
      type.non_numeric = present - numeric;
    }
  }

  d.rows_.reserve(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    Row row;
    row.id = r;
    row.cells.reserve(width);
    for (std::size_t c = 0; c < width; ++c) {
      row.cells.emplace_back(std::move(records[r][c]),
                             d.column_types_[c].kind == ColumnKind::Numeric);
    }
    d.rows_.push_back(std::move(row));
  }
  return d;
}

std::optional<std::size_t> Dataset::column_index(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const ColumnType& Dataset::column_type(std::string_view name) const {
  auto index = column_index(name);
  if (!index) throw UnknownColumn({std::string(name)});
  return column_types_[*index];
}

std::span<const Row> sample_rows(const Dataset& dataset, std::size_t n) {
  const auto& rows = dataset.rows();
  return std::span<const Row>(rows.data(), std::min(n, rows.size()));
}

std::string fingerprint(const Dataset& dataset) {
  detail::Sha256 sha;
  sha.update_field("provoscope-dataset-v1");
  sha.update_u64(dataset.headers().size());
  for (const auto& header : dataset.headers()) sha.update_field(header);
  sha.update_u64(dataset.rows().size());
  for (const auto& row : dataset.rows()) {
    for (const auto& cell : row.cells) sha.update_field(cell.raw());
  }
  return sha.hex();
}

}  // namespace provoscope
