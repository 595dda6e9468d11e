#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace provoscope {

inline constexpr std::size_t kMaxDatasetRows = 100'000;
inline constexpr std::size_t kMaxDatasetColumns = 256;

// Fraction of non-missing cells that must parse as numbers for a column to be
// typed Numeric.
inline constexpr double kNumericColumnThreshold = 0.95;

using RowId = std::uint64_t;

// Parses a finite decimal ("12", "-3.5", "1e6", surrounding whitespace allowed).
std::optional<double> parse_decimal(std::string_view text);

enum class ColumnKind { Numeric, Text };

std::string_view to_string(ColumnKind kind);

struct ColumnType {
  ColumnKind kind = ColumnKind::Text;
  // Non-missing cells of a Numeric column that did not parse as numbers.
  std::size_t non_numeric = 0;

  friend bool operator==(const ColumnType&, const ColumnType&) = default;
};

class Cell {
 public:
  enum class Kind { Missing, Number, Text };

  Cell() = default;
  // Cells are typed by their column: `numeric_column` decides whether a
  // parseable value is stored as a number.
  Cell(std::string raw, bool numeric_column);

  const std::string& raw() const noexcept { return raw_; }
  Kind kind() const noexcept { return kind_; }
  bool is_missing() const noexcept { return kind_ == Kind::Missing; }
  bool is_number() const noexcept { return kind_ == Kind::Number; }
  // Only meaningful when is_number().
  double number() const noexcept { return number_; }

  friend bool operator==(const Cell& a, const Cell& b) {
    return a.raw_ == b.raw_ && a.kind_ == b.kind_;
  }

 private:
  std::string raw_;
  Kind kind_ = Kind::Missing;
  double number_ = 0.0;
};

struct Row {
  RowId id = 0;
  std::vector<Cell> cells;

  friend bool operator==(const Row&, const Row&) = default;
};

// Immutable, header-labeled table. Construct through `load_csv` or
// `Dataset::from_records`.
class Dataset {
 public:
  // Validates headers and row widths, infers column types and assigns row ids
  // in order. `record_lines` (source line of each record) only feeds RaggedRow.
  static Dataset from_records(std::string name, std::vector<std::string> headers,
                              std::vector<std::vector<std::string>> records,
                              std::vector<std::size_t> record_lines = {});

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& headers() const noexcept { return headers_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }
  std::size_t row_count() const noexcept { return rows_.size(); }
  std::size_t column_count() const noexcept { return headers_.size(); }

  std::optional<std::size_t> column_index(std::string_view name) const;
  bool has_column(std::string_view name) const { return column_index(name).has_value(); }

  const ColumnType& column_type(std::size_t index) const { return column_types_.at(index); }
  // Throws UnknownColumn.
  const ColumnType& column_type(std::string_view name) const;
  const std::vector<ColumnType>& column_types() const noexcept { return column_types_; }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.name_ == b.name_ && a.headers_ == b.headers_ && a.rows_ == b.rows_ &&
           a.column_types_ == b.column_types_;
  }

 private:
  std::string name_;
  std::vector<std::string> headers_;
  std::vector<Row> rows_;
  std::vector<ColumnType> column_types_;
  std::unordered_map<std::string, std::size_t> index_;
};

// RFC 4180 reader. UTF-8 with optional BOM; CRLF or LF record separators.
// Throws EmptyFile, DuplicateHeader, EmptyHeader, RaggedRow, EncodingError,
// MalformedCsv, DatasetTooLarge.
Dataset load_csv(std::string_view bytes, std::string name);

// Writes headers and raw cell text back out as CSV; quoting only where needed.
std::string write_csv(const Dataset& dataset);

// First min(n, rows) rows, in order.
std::span<const Row> sample_rows(const Dataset& dataset, std::size_t n);

// SHA-256 (lowercase hex) over headers and raw cells in order. Independent of
// the dataset name.
std::string fingerprint(const Dataset& dataset);

// ---- profiling --------------------------------------------------------------

struct NumericProfile {
  std::size_t count = 0;    // cells contributing to the statistics
  std::size_t missing = 0;  // empty cells plus non-numeric ones
  std::size_t non_numeric = 0;
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  double stddev = 0.0;  // population convention (divide by count)

  friend bool operator==(const NumericProfile&, const NumericProfile&) = default;
};

struct TextProfile {
  std::size_t count = 0;
  std::size_t missing = 0;
  std::size_t distinct = 0;
  // At most kTopValues entries, count descending, ties by value ascending.
  std::vector<std::pair<std::string, std::size_t>> top_values;

  static constexpr std::size_t kTopValues = 5;

  friend bool operator==(const TextProfile&, const TextProfile&) = default;
};

struct ColumnProfile {
  std::string column;
  std::variant<NumericProfile, TextProfile> stats;

  bool is_numeric() const noexcept { return std::holds_alternative<NumericProfile>(stats); }
  const NumericProfile& numeric() const { return std::get<NumericProfile>(stats); }
  const TextProfile& text() const { return std::get<TextProfile>(stats); }

  friend bool operator==(const ColumnProfile&, const ColumnProfile&) = default;
};

// Throws UnknownColumn.
ColumnProfile profile_column(const Dataset& dataset, std::string_view column);

}  // namespace provoscope
