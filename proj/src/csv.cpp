#include <string>
#include <string_view>
#include <vector>

#include "provoscope/dataset.hpp"
#include "provoscope/error.hpp"

namespace provoscope {

namespace {

// Returns the offset of the first invalid byte, or npos.
std::size_t find_invalid_utf8(std::string_view s) {
  std::size_t i = 0;
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  while (i < s.size()) {
    unsigned char c = byte(i);
    if (c < 0x80) {
      ++i;
      continue;
    }
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if ((c & 0xe0) == 0xc0) {
      len = 2;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      len = 3;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > s.size()) return i;
    for (std::size_t k = 1; k < len; ++k) {
      unsigned char cc = byte(i + k);
      if ((cc & 0xc0) != 0x80) return i;
      cp = (cp << 6) | (cc & 0x3f);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xd800 && cp <= 0xdfff) || cp > 0x10ffff) {
      return i;
    }
    i += len;
  }
  return std::string_view::npos;
}

struct Records {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // starting source line of each record
};

Records read_records(std::string_view s) {
  Records out;
  std::vector<std::string> record;
  std::string field;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool record_has_content = false;  // any byte seen since the record started

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    // Blank lines carry no record.
    if (record_has_content) {
      end_field();
      out.rows.push_back(std::move(record));
      out.lines.push_back(record_line);
      // The header does not count toward the row limit.
      if (out.rows.size() > kMaxDatasetRows + 1) {
        throw DatasetTooLarge("dataset exceeds " + std::to_string(kMaxDatasetRows) + " rows");
      }
    }
    record.clear();
    field.clear();
    field_was_quoted = false;
    record_has_content = false;
  };

  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < s.size() && s[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        in_quotes = false;
        ++i;
        if (i < s.size() && s[i] != ',' && s[i] != '\n' && s[i] != '\r') {
          throw MalformedCsv("line " + std::to_string(line) +
                             ": unexpected character after closing quote");
        }
        continue;
      }
      if (c == '\n') ++line;
      field += c;
      ++i;
      continue;
    }
    switch (c) {
      case '"':
        if (field.empty() && !field_was_quoted) {
          in_quotes = true;
          field_was_quoted = true;
          record_has_content = true;
        } else {
          field += c;
        }
        ++i;
        break;
      case ',':
        record_has_content = true;
        end_field();
        ++i;
        break;
      case '\r':
        ++i;
        if (i < s.size() && s[i] == '\n') ++i;
        end_record();
        ++line;
        record_line = line;
        break;
      case '\n':
        ++i;
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        record_has_content = true;
        field += c;
        ++i;
        break;
    }
  }
  if (in_quotes) {
    throw MalformedCsv("line " + std::to_string(record_line) + ": unterminated quoted field");
  }
  end_record();
  return out;
}

bool needs_quotes(std::string_view field) {
  return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

void append_field(std::string& out, std::string_view field) {
  if (!needs_quotes(field)) {
    out += field;
    return;
  }
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

}  // namespace

Dataset load_csv(std::string_view bytes, std::string name) {
  if (auto bad = find_invalid_utf8(bytes); bad != std::string_view::npos) {
    throw EncodingError(bad);
  }
  constexpr std::string_view kBom = "\xEF\xBB\xBF";
  if (bytes.substr(0, kBom.size()) == kBom) bytes.remove_prefix(kBom.size());

  auto records = read_records(bytes);
  if (records.rows.empty()) throw EmptyFile();

  auto headers = std::move(records.rows.front());
  records.rows.erase(records.rows.begin());
  records.lines.erase(records.lines.begin());
  return Dataset::from_records(std::move(name), std::move(headers), std::move(records.rows),
                               std::move(records.lines));
}

std::string write_csv(const Dataset& dataset) {
  std::string out;
  const auto write_record = [&](const auto& fields, auto&& text_of) {
    if (fields.size() == 1 && text_of(fields.front()).empty()) {
      // A bare empty line would read back as a blank line.
      out += "\"\"";
    } else {
      bool first = true;
      for (const auto& f : fields) {
        if (!first) out += ',';
        first = false;
        append_field(out, text_of(f));
      }
    }
    out += "\r\n";
  };
  write_record(dataset.headers(), [](const std::string& h) -> std::string_view { return h; });
  for (const auto& row : dataset.rows()) {
    write_record(row.cells, [](const Cell& c) -> std::string_view { return c.raw(); });
  }
  return out;
}

}  // namespace provoscope
