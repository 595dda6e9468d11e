#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "provoscope/error.hpp"
#include "provoscope/llm.hpp"

namespace provoscope {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

json decode(std::string_view raw) {
  const auto body = extract_fenced_block(raw);
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw NotJson(e.what());
  }
}

std::string required_text(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) throw SchemaError(field, "missing");
  if (!it->is_string()) throw SchemaError(field, "expected a string");
  auto text = it->get<std::string>();
  if (trim(text).empty()) throw SchemaError(field, "empty");
  return text;
}

const json& factor_array(const json& doc) {
  if (doc.is_array()) return doc;
  if (doc.is_object()) {
    auto it = doc.find("factors");
    if (it != doc.end() && it->is_array()) return *it;
  }
  throw SchemaError("factors", "expected an array of factors");
}

}  // namespace

std::string_view extract_fenced_block(std::string_view raw) {
  const auto open = raw.find("```");
  if (open == std::string_view::npos) return trim(raw);
  // Skip an info string such as "json".
  auto start = raw.find('\n', open + 3);
  if (start == std::string_view::npos) return trim(raw.substr(open + 3));
  ++start;
  // The closing fence must open a line; JSON never puts a raw newline in a string.
  const auto close = raw.find("\n```", start - 1);
  if (close == std::string_view::npos) return trim(raw.substr(start));
  if (close < start) return {};
  return trim(raw.substr(start, close - start));
}

FactorDrafts parse_factor_response(std::string_view raw, const Dataset& dataset,
                                   bool require_risk) {
  const json doc = decode(raw);
  const json& items = factor_array(doc);
  if (items.empty()) throw SchemaError("factors", "no factors returned");

  FactorDrafts out;
  std::size_t count = items.size();
  if (count > kMaxGeneratedFactors) {
    out.warnings.push_back("the model returned " + std::to_string(count) +
                           " factors; keeping the first " +
                           std::to_string(kMaxGeneratedFactors));
    count = kMaxGeneratedFactors;
  }

  for (std::size_t i = 0; i < count; ++i) {
    const json& item = items[i];
    if (!item.is_object()) throw SchemaError("factors", "entries must be objects");
    FactorDraft d;
    d.name = required_text(item, "name");
    d.criteria = required_text(item, "criteria");
    const auto level = required_text(item, "importance");
    auto importance = parse_importance(level);
    if (!importance) throw SchemaError("importance", "unknown level \"" + level + "\"");
    d.importance = *importance;
    if (require_risk || item.contains("risk")) d.risk = required_text(item, "risk");

    std::vector<std::string> columns;
    if (auto it = item.find("source_columns"); it != item.end() && !it->is_null()) {
      if (it->is_string()) {
        columns.push_back(it->get<std::string>());
      } else if (it->is_array()) {
        for (const auto& c : *it) {
          if (!c.is_string()) throw SchemaError("source_columns", "expected column names");
          columns.push_back(c.get<std::string>());
        }
      } else {
        throw SchemaError("source_columns", "expected a list of column names");
      }
    }
    for (auto& column : columns) {
      if (!dataset.has_column(column)) {
        out.warnings.push_back("factor \"" + d.name + "\": dropped unknown source column \"" +
                               column + "\"");
        continue;
      }
      if (std::find(d.source_columns.begin(), d.source_columns.end(), column) ==
          d.source_columns.end()) {
        d.source_columns.push_back(std::move(column));
      }
    }
    out.factors.push_back(std::move(d));
  }
  return out;
}

std::string serialize_factor_drafts(std::span<const FactorDraft> drafts) {
  json factors = json::array();
  for (const auto& d : drafts) {
    json item{{"name", d.name},
              {"source_columns", d.source_columns},
              {"criteria", d.criteria},
              {"importance", std::string(to_string(d.importance))}};
    if (!d.risk.empty()) item["risk"] = d.risk;
    factors.push_back(std::move(item));
  }
  return "```json\n" + json{{"factors", factors}}.dump(2) + "\n```\n";
}

void merge_provocations(std::vector<FactorDraft>& drafts, std::string_view raw) {
  const json doc = decode(raw);
  const json& items = factor_array(doc);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const json& item = items[i];
    if (!item.is_object()) throw SchemaError("factors", "entries must be objects");
    const auto risk = required_text(item, "risk");
    // Match by name; fall back to position when the name was reworded.
    FactorDraft* target = nullptr;
    if (auto it = item.find("name"); it != item.end() && it->is_string()) {
      for (auto& d : drafts) {
        if (d.name == it->get<std::string>()) target = &d;
      }
    }
    if (!target && i < drafts.size()) target = &drafts[i];
    if (target && target->risk.empty()) target->risk = risk;
  }
  for (const auto& d : drafts) {
    if (trim(d.risk).empty()) throw SchemaError("risk", "no risk for factor \"" + d.name + "\"");
  }
}

AnalysisResponse parse_analysis_response(std::string_view raw) {
  const json doc = decode(raw);
  if (!doc.is_object()) throw SchemaError("filter", "expected an object");

  AnalysisResponse out;
  if (auto it = doc.find("filter"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError("filter", "expected a string");
    out.filter = it->get<std::string>();
  }
  if (auto it = doc.find("message"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError("message", "expected a string");
    out.message = it->get<std::string>();
  }
  if (auto it = doc.find("per_row"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw SchemaError("per_row", "expected a list");
    for (const auto& entry : *it) {
      if (!entry.is_object()) throw SchemaError("per_row", "entries must be objects");
      auto id = entry.find("id_");
      if (id == entry.end()) throw SchemaError("id_", "missing");
      RowReason r;
      if (id->is_number_unsigned()) {
        r.id = id->get<RowId>();
      } else if (id->is_number_float() && id->get<double>() >= 0 &&
                 std::floor(id->get<double>()) == id->get<double>()) {
        r.id = static_cast<RowId>(id->get<double>());
      } else if (id->is_string()) {
        auto parsed = parse_decimal(id->get<std::string>());
        if (!parsed || *parsed < 0 || std::floor(*parsed) != *parsed) {
          throw SchemaError("id_", "not a row id");
        }
        r.id = static_cast<RowId>(*parsed);
      } else {
        throw SchemaError("id_", "not a row id");
      }
      if (auto reason = entry.find("reason"); reason != entry.end() && reason->is_string()) {
        r.reason = reason->get<std::string>();
      }
      out.per_row.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace provoscope
