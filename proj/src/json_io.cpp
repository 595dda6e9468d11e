#include "provoscope/json_io.hpp"

#include "provoscope/error.hpp"

namespace provoscope {

using nlohmann::json;

namespace {

Shade parse_shade(const std::string& s) {
  if (s == "Light") return Shade::Light;
  if (s == "Mid") return Shade::Mid;
  if (s == "Strong") return Shade::Strong;
  return Shade::None;
}

FactorStatus parse_status(const std::string& s) {
  if (s == "Analyzed") return FactorStatus::Analyzed;
  if (s == "Unrunnable") return FactorStatus::Unrunnable;
  return FactorStatus::Draft;
}

}  // namespace

json dataset_summary(const Dataset& d) {
  json columns = json::array();
  json types = json::object();
  for (std::size_t i = 0; i < d.column_count(); ++i) {
    const auto kind = std::string(to_string(d.column_type(i).kind));
    columns.push_back({{"name", d.headers()[i]},
                       {"kind", kind},
                       {"non_numeric", d.column_type(i).non_numeric}});
    types[d.headers()[i]] = kind;
  }
  return json{{"name", d.name()},
              {"row_count", d.row_count()},
              {"column_count", d.column_count()},
              {"headers", d.headers()},
              {"columns", columns},
              {"column_types", types},
              {"fingerprint", fingerprint(d)}};
}

json to_json(const ColumnProfile& p) {
  if (p.is_numeric()) {
    const auto& n = p.numeric();
    return json{{"column", p.column}, {"kind", "numeric"},   {"count", n.count},
                {"missing", n.missing}, {"non_numeric", n.non_numeric},
                {"mean", n.mean},     {"median", n.median}, {"min", n.min},
                {"max", n.max},       {"stddev", n.stddev}};
  }
  const auto& t = p.text();
  json top = json::array();
  for (const auto& [value, count] : t.top_values) top.push_back({{"value", value}, {"count", count}});
  return json{{"column", p.column},   {"kind", "text"},       {"count", t.count},
              {"missing", t.missing}, {"distinct", t.distinct}, {"top_values", top}};
}

ColumnProfile profile_from_json(const json& doc) {
  ColumnProfile p;
  p.column = doc.at("column").get<std::string>();
  if (doc.at("kind") == "numeric") {
    NumericProfile n;
    n.count = doc.at("count");
    n.missing = doc.at("missing");
    n.non_numeric = doc.at("non_numeric");
    n.mean = doc.at("mean");
    n.median = doc.at("median");
    n.min = doc.at("min");
    n.max = doc.at("max");
    n.stddev = doc.at("stddev");
    p.stats = n;
  } else {
    TextProfile t;
    t.count = doc.at("count");
    t.missing = doc.at("missing");
    t.distinct = doc.at("distinct");
    for (const auto& v : doc.at("top_values")) {
      t.top_values.emplace_back(v.at("value").get<std::string>(), v.at("count").get<std::size_t>());
    }
    p.stats = t;
  }
  return p;
}

json to_json(const FactorAnalysis& a) {
  json profiles = json::array();
  for (const auto& p : a.profiles) profiles.push_back(to_json(p));
  json rows = json::array();
  for (const auto& m : a.local_shortlist) {
    rows.push_back({{"row_id", m.row_id}, {"reason", m.reason}, {"from_model", m.from_model}});
  }
  return json{{"factor_id", a.factor_id},
              {"filter", a.filter_text.empty() ? json(nullptr) : json(a.filter_text)},
              {"degraded", a.degraded},
              {"stale", a.stale},
              {"message", a.message},
              {"match_count", a.local_shortlist.size()},
              {"profiles", profiles},
              {"local_shortlist", rows}};
}

FactorAnalysis analysis_from_json(const json& doc) {
  FactorAnalysis a;
  a.factor_id = doc.at("factor_id").get<std::string>();
  if (!doc.at("filter").is_null()) a.filter_text = doc.at("filter").get<std::string>();
  a.degraded = doc.at("degraded");
  a.stale = doc.at("stale");
  a.message = doc.at("message").get<std::string>();
  for (const auto& p : doc.at("profiles")) a.profiles.push_back(profile_from_json(p));
  for (const auto& r : doc.at("local_shortlist")) {
    a.local_shortlist.push_back(
        {r.at("row_id").get<RowId>(), r.at("reason").get<std::string>(), r.at("from_model").get<bool>()});
  }
  return a;
}

json to_json(const Factor& f) {
  return json{{"id", f.id},
              {"title", f.title},
              {"source_columns", f.source_columns},
              {"criteria", f.criteria},
              {"provocation", f.provocation},
              {"provocation_stale", f.provocation_stale},
              {"importance", std::string(to_string(f.importance))},
              {"weight", weight_of(f.importance).value()},
              {"status", std::string(to_string(f.status))},
              {"filter", f.filter ? json(print_filter(*f.filter)) : json(nullptr)},
              {"analysis", f.analysis ? to_json(*f.analysis) : json(nullptr)}};
}

Factor factor_from_json(const json& doc) {
  Factor f;
  f.id = doc.at("id").get<std::string>();
  f.title = doc.at("title").get<std::string>();
  f.source_columns = doc.at("source_columns").get<std::vector<std::string>>();
  f.criteria = doc.at("criteria").get<std::string>();
  f.provocation = doc.at("provocation").get<std::string>();
  f.provocation_stale = doc.at("provocation_stale");
  auto importance = parse_importance(doc.at("importance").get<std::string>());
  if (!importance) throw Error("InvalidSnapshot", "unknown importance in snapshot");
  f.importance = *importance;
  f.status = parse_status(doc.at("status").get<std::string>());
  if (!doc.at("filter").is_null()) f.filter = parse_filter(doc.at("filter").get<std::string>());
  if (!doc.at("analysis").is_null()) f.analysis = analysis_from_json(doc.at("analysis"));
  return f;
}

json to_json(const GlobalShortlist& g, const Dataset& d) {
  json entries = json::array();
  std::size_t rank = 0;
  for (const auto& e : g.entries) {
    json contributors = json::array();
    for (const auto& c : e.contributors) {
      contributors.push_back({{"factor_id", c.factor_id}, {"weight", c.weight.value()}});
    }
    json cells = json::array();
    if (e.row_id < d.row_count()) {
      for (const auto& cell : d.rows()[e.row_id].cells) cells.push_back(cell.raw());
    }
    entries.push_back({{"rank", ++rank},
                       {"row_id", e.row_id},
                       {"score", e.score.value()},
                       {"score_hundredths", e.score.hundredths},
                       {"score_text", format_weight(e.score)},
                       {"contributors", contributors},
                       {"reason", e.reason},
                       {"cells", cells}});
  }
  json highlights = json::array();
  for (const auto& h : g.highlights) {
    highlights.push_back(
        {{"row_id", h.row_id}, {"column", h.column}, {"shade", std::string(to_string(h.shade))}});
  }
  return json{{"factor_ids", g.factor_ids},
              {"columns", d.headers()},
              {"entries", entries},
              {"highlights", highlights}};
}

GlobalShortlist shortlist_from_json(const json& doc) {
  GlobalShortlist g;
  g.factor_ids = doc.at("factor_ids").get<std::vector<std::string>>();
  for (const auto& e : doc.at("entries")) {
    RankedRow r;
    r.row_id = e.at("row_id");
    r.score = Weight{e.at("score_hundredths").get<std::int64_t>()};
    r.reason = e.at("reason").get<std::string>();
    for (const auto& c : e.at("contributors")) {
      // Weights on the wire are exact hundredths.
      const double w = c.at("weight");
      r.contributors.push_back(
          {c.at("factor_id").get<std::string>(), Weight{static_cast<std::int64_t>(w * 100.0 + 0.5)}});
    }
    g.entries.push_back(std::move(r));
  }
  for (const auto& h : doc.at("highlights")) {
    g.highlights.push_back(
        {h.at("row_id").get<RowId>(), h.at("column").get<std::string>(), parse_shade(h.at("shade"))});
  }
  return g;
}

}  // namespace provoscope
