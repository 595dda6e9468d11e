#include "provoscope/service.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "provoscope/error.hpp"
#include "provoscope/json_io.hpp"

namespace provoscope {

namespace fs = std::filesystem;
using nlohmann::json;

int http_status_for(const Error& error) {
  static const std::map<std::string, int> kStatus = {
      {"UnknownSession", 404},   {"UnknownFactor", 404},     {"UnknownScenario", 404},
      {"NoDataset", 409},        {"FactorCapReached", 409},  {"UnrunnableFactor", 409},
      {"NoAnalyzedFactors", 409},
      {"EmptyFile", 422},        {"DuplicateHeader", 422},   {"EmptyHeader", 422},
      {"RaggedRow", 422},        {"EncodingError", 422},     {"MalformedCsv", 422},
      {"DatasetTooLarge", 422},  {"UnknownColumn", 422},     {"EmptyQuery", 422},
      {"EmptyCriteria", 422},    {"InvalidRequest", 422},
      {"ProviderError", 502},    {"RateLimited", 502},       {"NotJson", 502},
      {"SchemaError", 502},      {"UnusableAnalysis", 502},  {"CacheMiss", 502},
      {"AlterationTargetMissing", 502},
      {"ProviderUnavailable", 503},
      {"Timeout", 504},
  };
  auto it = kStatus.find(error.code());
  return it == kStatus.end() ? 500 : it->second;
}

json error_body(const Error& error) {
  json body{{"code", error.code()}, {"message", error.what()}, {"retriable", error.retriable()}};
  json details = json::object();
  if (auto* e = dynamic_cast<const UnknownColumn*>(&error)) details["unknown_columns"] = e->names();
  if (auto* e = dynamic_cast<const RaggedRow*>(&error)) details["line"] = e->line();
  if (auto* e = dynamic_cast<const DuplicateHeader*>(&error)) details["column"] = e->name();
  if (auto* e = dynamic_cast<const EncodingError*>(&error)) details["offset"] = e->offset();
  if (auto* e = dynamic_cast<const SchemaError*>(&error)) details["field"] = e->field();
  if (auto* e = dynamic_cast<const ProviderError*>(&error)) details["provider_status"] = e->status();
  if (auto* e = dynamic_cast<const CacheMiss*>(&error)) details["key"] = e->key();
  if (!details.empty()) body["details"] = details;
  return body;
}

namespace {

template <typename F>
ApiResponse guarded(F&& handler) {
  try {
    return handler();
  } catch (const Error& e) {
    return {http_status_for(e), error_body(e)};
  } catch (const std::exception& e) {
    return {500, json{{"code", "Internal"}, {"message", e.what()}, {"retriable", false}}};
  }
}

std::string new_session_id() {
  static std::mutex mutex;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mutex);
  std::ostringstream out;
  out << std::hex;
  for (int i = 0; i < 2; ++i) {
    const auto v = rng();
    for (int b = 60; b >= 0; b -= 4) out << ((v >> b) & 0xf);
  }
  return out.str();
}

Factor* find_factor(Session& s, const std::string& fid) {
  for (auto& f : s.factors) {
    if (f.id == fid) return &f;
  }
  return nullptr;
}

const Dataset& require_dataset(const Session& s) {
  if (!s.dataset) throw NoDataset();
  return *s.dataset;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

void mark_shortlist_stale(Session& s) {
  if (s.shortlist) s.shortlist_stale = true;
}

}  // namespace

json session_to_json(const Session& s) {
  json factors = json::array();
  for (const auto& f : s.factors) factors.push_back(to_json(f));
  return json{{"session_id", s.id},
              {"scenario", s.scenario},
              {"version", s.version},
              {"dataset", s.dataset ? dataset_summary(*s.dataset) : json(nullptr)},
              {"query", s.query ? json(*s.query) : json(nullptr)},
              {"factors", factors},
              {"warnings", s.warnings},
              {"shortlist", s.shortlist && s.dataset ? to_json(*s.shortlist, *s.dataset) : json(nullptr)},
              {"shortlist_stale", s.shortlist_stale}};
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  auto add = [&](Scenario scenario) {
    if (scenarios_.count(scenario.display_name)) {
      throw ScenarioError("two scenarios are named \"" + scenario.display_name + "\"");
    }
    ScenarioRuntime rt;
    rt.scenario = scenario;
    try {
      rt.completer = std::make_shared<ScenarioCompleter>(scenario, config_.live, config_.model);
    } catch (const ScenarioError& e) {
      rt.unavailable = e.what();
    }
    scenario_order_.push_back(scenario.display_name);
    scenarios_.emplace(scenario.display_name, std::move(rt));
  };
  const bool has_default =
      std::any_of(config_.scenarios.begin(), config_.scenarios.end(),
                  [](const Scenario& s) { return s.display_name == "default"; });
  if (!has_default) add(Scenario::default_scenario());
  for (const auto& s : config_.scenarios) add(s);

  auto it = scenarios_.find(config_.startup_scenario);
  if (it == scenarios_.end()) throw ScenarioError("unknown scenario \"" + config_.startup_scenario + "\"");
  if (!it->second.completer && it->second.scenario.mode != ScenarioMode::Live) {
    throw ScenarioError(it->second.unavailable);
  }
  (void)autostart(it->second.scenario);  // fail fast on a missing auto-upload file
  if (config_.persist_dir) load_snapshots();
}

std::shared_ptr<Service::Slot> Service::find_slot(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSession(id);
  return it->second;
}

const Service::ScenarioRuntime& Service::runtime(const std::string& name) const {
  auto it = scenarios_.find(name);
  if (it == scenarios_.end()) throw UnknownScenario(name);
  return it->second;
}

Completer& Service::completer_for(const Session& session) const {
  const auto& rt = runtime(session.scenario);
  if (!rt.completer) {
    throw ProviderUnavailable("scenario \"" + session.scenario + "\" cannot reach a model: " +
                              rt.unavailable);
  }
  return *rt.completer;
}

void Service::apply_seed(Session& session, const Scenario& scenario) {
  auto seed = autostart(scenario);
  if (seed.dataset) session.dataset = std::move(seed.dataset);
}

void Service::touch(Session& session) {
  ++session.version;
  persist(session);
}

void Service::run_analysis(Session& session, Factor& factor) {
  const Dataset& dataset = require_dataset(session);
  if (factor.source_columns.empty()) {
    factor.status = FactorStatus::Unrunnable;
    throw UnrunnableFactor("factor \"" + factor.title +
                           "\" has no source columns; choose at least one before analysis");
  }
  auto plan = generate_filter_with_fallback(factor, dataset, completer_for(session));
  factor.filter = std::move(plan.filter);
  provoscope::analyze_factor(factor, dataset, plan.inputs);
  mark_shortlist_stale(session);
}

ApiResponse Service::create_session() {
  return guarded([&]() -> ApiResponse {
    auto slot = std::make_shared<Slot>();
    Session& s = slot->session;
    s.id = new_session_id();
    s.scenario = config_.startup_scenario;
    apply_seed(s, runtime(s.scenario).scenario);
    {
      std::unique_lock lock(sessions_mutex_);
      sessions_.emplace(s.id, slot);
    }
    persist(s);
    return {201, json{{"session_id", s.id},
                      {"scenario", s.scenario},
                      {"version", s.version},
                      {"dataset", s.dataset ? dataset_summary(*s.dataset) : json(nullptr)}}};
  });
}

ApiResponse Service::get_session(const std::string& id) const {
  return guarded([&]() -> ApiResponse {
    auto slot = find_slot(id);
    std::shared_lock lock(slot->mutex);
    return {200, session_to_json(slot->session)};
  });
}

ApiResponse Service::get_rows(const std::string& id, std::size_t offset, std::size_t limit) const {
  return guarded([&]() -> ApiResponse {
    auto slot = find_slot(id);
    std::shared_lock lock(slot->mutex);
    const Dataset& d = require_dataset(slot->session);
    json rows = json::array();
    const std::size_t end = std::min(d.row_count(), offset + std::min(limit, d.row_count()));
    for (std::size_t i = offset; i < end; ++i) {
      json cells = json::array();
      for (const auto& c : d.rows()[i].cells) cells.push_back(c.raw());
      rows.push_back({{"row_id", d.rows()[i].id}, {"cells", cells}});
    }
    return {200, json{{"columns", d.headers()},
                      {"row_count", d.row_count()},
                      {"offset", offset},
                      {"rows", rows}}};
  });
}

ApiResponse Service::upload_dataset(const std::string& id, const std::string& filename,
                                    const std::string& bytes) {
  return guarded([&]() -> ApiResponse {
    auto slot = find_slot(id);
    std::unique_lock lock(slot->mutex);
    Session& s = slot->session;
    Dataset d = load_csv(bytes, filename.empty() ? "dataset.csv" : filename);
    // A new dataset restarts the flow.
    s.dataset = std::move(d);
    s.query.reset();
    s.factors.clear();
    s.shortlist.reset();
    s.shortlist_stale = false;
    s.warnings.clear();
    touch(s);
    json body = dataset_summary(*s.dataset);
    body["version"] = s.version;
    return {200, body};
  });
}

ApiResponse Service::submit_query(const std::string& id, const json& body) {
  return guarded([&]() -> ApiResponse {
    if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
      throw InvalidRequest("expected {\"text\": \"...\"}");
    }
    const std::string text = body["text"].get<std::string>();
    if (blank(text)) throw EmptyQuery();

    auto slot = find_slot(id);
    std::unique_lock lock(slot->mutex);
    Session& s = slot->session;
    const Dataset& dataset = require_dataset(s);
    auto generated = generate_factors(text, dataset, completer_for(s), config_.provocation_mode);

    s.query = text;
    s.factors.clear();
    s.shortlist.reset();
    s.shortlist_stale = false;
    s.warnings = std::move(generated.warnings);
    for (const auto& draft : generated.drafts) {
      Factor f = factor_from_draft(draft);
      f.id = "f" + std::to_string(s.next_factor++);
      s.factors.push_back(std::move(f));
    }
    touch(s);

    if (runtime(s.scenario).scenario.analyze_factors_immediately) {
      for (auto& f : s.factors) {
        if (!f.runnable() || blank(f.criteria)) continue;
        try {
          run_analysis(s, f);
        } catch (const UnusableAnalysis& e) {
          s.warnings.push_back(e.what());
        }
      }
      touch(s);
    }

    json factors = json::array();
    for (const auto& f : s.factors) factors.push_back(to_json(f));
    return {200, json{{"factors", factors}, {"warnings", s.warnings}, {"version", s.version}}};
  });
}

ApiResponse Service::spawn_factor(const std::string& id) {
  return guarded([&]() -> ApiResponse {
    auto slot = find_slot(id);
    std::unique_lock lock(slot->mutex);
    Session& s = slot->session;
    require_dataset(s);
    if (s.factors.size() >= kMaxSessionFactors) throw FactorCapReached(kMaxSessionFactors);
    Factor f;
    f.id = "f" + std::to_string(s.next_factor++);
    f.refresh_status();
    s.factors.push_back(f);
    touch(s);
    json out = to_json(f);
    out["version"] = s.version;
    return {201, out};
  });
}

ApiResponse Service::patch_factor(const std::string& id, const std::string& fid, const json& body) {
  return guarded([&]() -> ApiResponse {
    if (!body.is_object()) throw InvalidRequest("expected a JSON object");
    static const std::set<std::string> kFields = {"title", "source_columns", "criteria", "importance"};
    for (const auto& [key, value] : body.items()) {
      if (!kFields.count(key)) throw InvalidRequest("unknown field \"" + key + "\"");
    }

    auto slot = find_slot(id);
    std::unique_lock lock(slot->mutex);
    Session& s = slot->session;
    Factor* f = find_factor(s, fid);
    if (!f) throw UnknownFactor(fid);

    // Validate everything before touching the factor.
    std::optional<std::string> title, criteria;
    std::optional<std::vector<std::string>> columns;
    std::optional<Importance> importance;
    if (body.contains("title")) {
      if (!body["title"].is_string()) throw InvalidRequest("\"title\" must be a string");
      title = body["title"].get<std::string>();
    }
    if (body.contains("criteria")) {
      if (!body["criteria"].is_string()) throw InvalidRequest("\"criteria\" must be a string");
      criteria = body["criteria"].get<std::string>();
    }
    if (body.contains("importance")) {
      const auto& v = body["importance"];
      if (v.is_string()) importance = parse_importance(v.get<std::string>());
      if (!importance) throw InvalidRequest("\"importance\" must be High, Medium or Low");
    }
    if (body.contains("source_columns")) {
      const auto& v = body["source_columns"];
      if (!v.is_array()) throw InvalidRequest("\"source_columns\" must be a list of column names");
      std::vector<std::string> names, unknown;
      const Dataset& d = require_dataset(s);
      for (const auto& c : v) {
        if (!c.is_string()) throw InvalidRequest("\"source_columns\" must be a list of column names");
        auto name = c.get<std::string>();
        if (!d.has_column(name)) {
          unknown.push_back(name);
        } else if (std::find(names.begin(), names.end(), name) == names.end()) {
          names.push_back(name);
        }
      }
      if (!unknown.empty()) throw UnknownColumn(unknown);
      columns = std::move(names);
    }

    bool changed = false;
    if (title && *title != f->title) {
      f->title = *title;
      changed = true;
    }
    if (columns && *columns != f->source_columns) {
      f->set_source_columns(*columns);
      changed = true;
    }
    if (criteria && *criteria != f->criteria) {
      f->set_criteria(*criteria);
      changed = true;
    }
    if (importance && *importance != f->importance) {
      f->set_importance(*importance);
      changed = true;
    }
    if (changed) {
      mark_shortlist_stale(s);
      touch(s);
    }
    json out = to_json(*f);
    out["version"] = s.version;
    return {200, out};
  });
}

ApiResponse Service::delete_factor(const std::string& id, const std::string& fid) {
  return guarded([&]() -> ApiResponse {
    auto slot = find_slot(id);
    std::unique_lock lock(slot->mutex);
    Session& s = slot->session;
    auto it = std::find_if(s.factors.begin(), s.factors.end(),
                           [&](const Factor& f) { return f.id == fid; });
    if (it == s.factors.end()) throw UnknownFactor(fid);
    s.factors.erase(it);
    mark_shortlist_stale(s);
    touch(s);
    return {204, nullptr};
  });
}

ApiResponse Service::analyze_factor(const std::string& id, const std::string& fid) {
  return guarded([&]() -> ApiResponse {
    auto slot = find_slot(id);
    std::unique_lock lock(slot->mutex);
    Session& s = slot->session;
    Factor* f = find_factor(s, fid);
    if (!f) throw UnknownFactor(fid);
    try {
      run_analysis(s, *f);
    } catch (const UnrunnableFactor&) {
      touch(s);  // status may have changed
      throw;
    }
    touch(s);
    json out = to_json(*f->analysis);
    out["factor_status"] = std::string(to_string(f->status));
    out["version"] = s.version;
    return {200, out};
  });
}

ApiResponse Service::compute_shortlist(const std::string& id) {
  return guarded([&]() -> ApiResponse {
    auto slot = find_slot(id);
    std::unique_lock lock(slot->mutex);
    Session& s = slot->session;
    const Dataset& d = require_dataset(s);
    auto shortlist = compute_global_shortlist(d, s.factors);
    if (!s.shortlist || *s.shortlist != shortlist || s.shortlist_stale) {
      s.shortlist = std::move(shortlist);
      s.shortlist_stale = false;
      touch(s);
    }
    return {200, to_json(*s.shortlist, d)};
  });
}

ApiResponse Service::list_scenarios() const {
  json out = json::array();
  for (const auto& name : scenario_order_) {
    const auto& rt = scenarios_.at(name);
    json item = scenario_summary(rt.scenario);
    item["available"] = rt.completer != nullptr;
    item["startup"] = name == config_.startup_scenario;
    out.push_back(item);
  }
  return {200, json{{"scenarios", out}}};
}

ApiResponse Service::bind_scenario(const std::string& id, const json& body) {
  return guarded([&]() -> ApiResponse {
    if (!body.is_object() || !body.contains("name") || !body["name"].is_string()) {
      throw InvalidRequest("expected {\"name\": \"...\"}");
    }
    const std::string name = body["name"].get<std::string>();
    auto slot = find_slot(id);
    const auto& rt = runtime(name);
    std::unique_lock lock(slot->mutex);
    Session& s = slot->session;
    s.scenario = name;
    if (!s.dataset) apply_seed(s, rt.scenario);
    touch(s);
    json out{{"scenario", scenario_summary(rt.scenario)},
             {"dataset", s.dataset ? dataset_summary(*s.dataset) : json(nullptr)},
             {"version", s.version}};
    return {200, out};
  });
}

std::size_t Service::provider_calls() const {
  std::size_t total = 0;
  for (const auto& [name, rt] : scenarios_) {
    if (rt.completer) total += rt.completer->provider_calls();
  }
  return total;
}

// ---- persistence ---------------------------------------------------------------

void Service::persist(const Session& s) const {
  if (!config_.persist_dir) return;
  json doc = session_to_json(s);
  doc["next_factor"] = s.next_factor;
  doc["dataset"] = s.dataset ? json{{"name", s.dataset->name()}, {"csv", write_csv(*s.dataset)}}
                             : json(nullptr);
  fs::create_directories(*config_.persist_dir);
  const fs::path target = *config_.persist_dir / (s.id + ".json");
  const fs::path temp = *config_.persist_dir / (".tmp-" + s.id);
  {
    std::ofstream out(temp, std::ios::binary);
    out << doc.dump();
  }
  fs::rename(temp, target);
}

void Service::load_snapshots() {
  if (!fs::is_directory(*config_.persist_dir)) return;
  for (const auto& entry : fs::directory_iterator(*config_.persist_dir)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    const json doc = json::parse(buf.str());

    auto slot = std::make_shared<Slot>();
    Session& s = slot->session;
    s.id = doc.at("session_id").get<std::string>();
    s.scenario = doc.at("scenario").get<std::string>();
    if (!scenarios_.count(s.scenario)) s.scenario = config_.startup_scenario;
    s.version = doc.at("version");
    s.next_factor = doc.at("next_factor");
    if (!doc.at("dataset").is_null()) {
      s.dataset = load_csv(doc["dataset"].at("csv").get<std::string>(),
                           doc["dataset"].at("name").get<std::string>());
    }
    if (!doc.at("query").is_null()) s.query = doc["query"].get<std::string>();
    for (const auto& f : doc.at("factors")) s.factors.push_back(factor_from_json(f));
    s.warnings = doc.at("warnings").get<std::vector<std::string>>();
    if (!doc.at("shortlist").is_null()) s.shortlist = shortlist_from_json(doc["shortlist"]);
    s.shortlist_stale = doc.at("shortlist_stale");
    sessions_.emplace(s.id, slot);
  }
}

}  // namespace provoscope
