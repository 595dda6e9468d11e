#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "provoscope/error.hpp"
#include "provoscope/scenario.hpp"
#include "sha256.hpp"

namespace provoscope {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ScenarioMode mode) {
  switch (mode) {
    case ScenarioMode::Live: return "live";
    case ScenarioMode::Record: return "record";
    case ScenarioMode::Replay: return "replay";
  }
  return "live";
}

std::optional<ScenarioMode> parse_scenario_mode(std::string_view text) {
  std::string lower;
  for (char c : text) lower += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  if (lower == "live") return ScenarioMode::Live;
  if (lower == "record") return ScenarioMode::Record;
  if (lower == "replay") return ScenarioMode::Replay;
  return std::nullopt;
}

Scenario Scenario::default_scenario() {
  Scenario s;
  s.display_name = "default";
  return s;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingScenarioFile(path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// First present key among the snake_case name and its camelCase alias.
const json* field(const json& doc, const char* snake, const char* camel = nullptr) {
  if (auto it = doc.find(snake); it != doc.end() && !it->is_null()) return &*it;
  if (camel) {
    if (auto it = doc.find(camel); it != doc.end() && !it->is_null()) return &*it;
  }
  return nullptr;
}

std::string text_field(const json& v, const std::string& name, const fs::path& path) {
  if (!v.is_string()) throw ScenarioError(path.string() + ": \"" + name + "\" must be a string");
  return v.get<std::string>();
}

}  // namespace

Scenario load_scenario_manifest(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw MissingScenarioFile(path.string());
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ScenarioError(path.string() + ": manifest must be an object");
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  Scenario s;
  const json* name = field(doc, "display_name", "displayName");
  if (!name) throw ScenarioError(path.string() + ": \"display_name\" is required");
  s.display_name = text_field(*name, "display_name", path);
  if (s.display_name.empty()) throw ScenarioError(path.string() + ": empty display_name");

  if (const json* mode = field(doc, "mode")) {
    auto parsed = parse_scenario_mode(text_field(*mode, "mode", path));
    if (!parsed) throw ScenarioError(path.string() + ": mode must be live, record or replay");
    s.mode = *parsed;
  }
  if (const json* upload = field(doc, "auto_upload_filename", "autoUploadFilename")) {
    s.auto_upload_filename = resolve(text_field(*upload, "auto_upload_filename", path));
  }
  if (const json* flag = field(doc, "analyze_factors_immediately", "analyzeFactorsImmediately")) {
    if (!flag->is_boolean()) {
      throw ScenarioError(path.string() + ": analyze_factors_immediately must be a boolean");
    }
    s.analyze_factors_immediately = flag->get<bool>();
  }
  if (const json* dir = field(doc, "cache_dir", "cacheDir")) {
    s.cache_dir = resolve(text_field(*dir, "cache_dir", path));
  }
  if (const json* model = field(doc, "model")) s.model = text_field(*model, "model", path);
  if (s.mode != ScenarioMode::Live && s.cache_dir.empty()) {
    throw ScenarioError(path.string() + ": record and replay scenarios need a cache_dir");
  }
  if (const json* alts = field(doc, "alterations")) {
    if (!alts->is_array()) throw ScenarioError(path.string() + ": alterations must be a list");
    for (const auto& a : *alts) {
      if (!a.is_object() || !a.contains("field_path") || !a.contains("replacement")) {
        throw ScenarioError(path.string() + ": each alteration needs field_path and replacement");
      }
      Alteration alt;
      if (const json* m = field(a, "match")) alt.match = text_field(*m, "match", path);
      alt.field_path = text_field(a["field_path"], "field_path", path);
      alt.replacement = a["replacement"];
      s.alterations.push_back(std::move(alt));
    }
  }
  return s;
}

std::vector<Scenario> load_scenario_directory(const fs::path& dir) {
  std::vector<fs::path> manifests;
  if (!fs::is_directory(dir)) return {};
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      manifests.push_back(entry.path());
    } else if (entry.is_directory() && fs::is_regular_file(entry.path() / "manifest.json")) {
      manifests.push_back(entry.path() / "manifest.json");
    }
  }
  std::sort(manifests.begin(), manifests.end());
  std::vector<Scenario> out;
  for (const auto& m : manifests) out.push_back(load_scenario_manifest(m));
  return out;
}

json scenario_summary(const Scenario& s) {
  json out{{"display_name", s.display_name},
           {"mode", std::string(to_string(s.mode))},
           {"analyze_factors_immediately", s.analyze_factors_immediately},
           {"auto_upload_filename", nullptr},
           {"alterations", s.alterations.size()}};
  if (s.auto_upload_filename) out["auto_upload_filename"] = s.auto_upload_filename->filename().string();
  return out;
}

// ---- cache ---------------------------------------------------------------------

json to_json(const CacheEntry& e) {
  return json{{"key", e.key},
              {"kind", e.kind},
              {"template_version", e.template_version},
              {"model", e.model},
              {"dataset_fingerprint", e.dataset_fingerprint},
              {"request_snapshot", e.request_snapshot},
              {"response", e.response},
              {"recorded_at", e.recorded_at}};
}

CacheEntry cache_entry_from_json(const json& doc) {
  CacheEntry e;
  try {
    e.key = doc.at("key").get<std::string>();
    e.kind = doc.value("kind", "");
    e.template_version = doc.value("template_version", "");
    e.model = doc.value("model", "");
    e.dataset_fingerprint = doc.value("dataset_fingerprint", "");
    e.request_snapshot = doc.value("request_snapshot", "");
    e.response = doc.at("response").get<std::string>();
    e.recorded_at = doc.value("recorded_at", "");
  } catch (const json::exception& ex) {
    throw ScenarioError(std::string("malformed cache entry: ") + ex.what());
  }
  return e;
}

std::string cache_key(const CompletionRequest& request, std::string_view model) {
  detail::Sha256 sha;
  sha.update_field("provoscope-cache-v1");
  sha.update_field(request.template_version);
  sha.update_field(model);
  sha.update_field(request.dataset_fingerprint);
  sha.update_field(to_string(request.kind));
  sha.update_field(request.prompt);
  return sha.hex();
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {}

std::optional<CacheEntry> ResponseCache::find(const std::string& key) const {
  const fs::path file = dir_ / (key + ".json");
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ScenarioError(file.string() + ": " + e.what());
  }
  auto entry = cache_entry_from_json(doc);
  if (entry.key != key) throw ScenarioError(file.string() + ": key does not match file name");
  return entry;
}

bool ResponseCache::store(const CacheEntry& entry) {
  std::lock_guard lock(write_mutex_);
  fs::create_directories(dir_);
  const fs::path target = dir_ / (entry.key + ".json");
  if (fs::exists(target)) return false;

  std::random_device rd;
  const fs::path temp = dir_ / (".tmp-" + entry.key + "-" + std::to_string(rd()));
  {
    std::ofstream out(temp, std::ios::binary);
    out << to_json(entry).dump(2) << "\n";
    if (!out) throw ScenarioError("failed to write " + temp.string());
  }
  fs::rename(temp, target);
  return true;
}

std::vector<std::string> ResponseCache::keys() const {
  std::vector<std::string> out;
  if (!fs::is_directory(dir_)) return out;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && entry.path().extension() == ".json" && name[0] != '.') {
      out.push_back(entry.path().stem().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---- interception --------------------------------------------------------------

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ScenarioCompleter::ScenarioCompleter(Scenario scenario, std::shared_ptr<Completer> live,
                                     std::string fallback_model)
    : scenario_(std::move(scenario)),
      live_(std::move(live)),
      fallback_model_(std::move(fallback_model)),
      clock_(utc_timestamp) {
  if (scenario_.mode != ScenarioMode::Live) {
    cache_ = std::make_unique<ResponseCache>(scenario_.cache_dir);
  } else if (!scenario_.cache_dir.empty()) {
    log_ = std::make_unique<ResponseCache>(scenario_.cache_dir / "live-log");
  }
  if (scenario_.mode != ScenarioMode::Replay && !live_) {
    throw ScenarioError("scenario \"" + scenario_.display_name + "\" (" +
                        std::string(to_string(scenario_.mode)) + ") needs a live provider");
  }
  if (scenario_.mode == ScenarioMode::Replay && cache_->keys().empty()) {
    throw ScenarioError("scenario \"" + scenario_.display_name + "\" replays from an empty cache: " +
                        scenario_.cache_dir.string());
  }
}

std::string ScenarioCompleter::model() const {
  if (scenario_.model) return *scenario_.model;
  if (live_) return live_->model();
  return fallback_model_;
}

CacheEntry ScenarioCompleter::make_entry(const CompletionRequest& request, const std::string& key,
                                         std::string response) const {
  CacheEntry e;
  e.key = key;
  e.kind = to_string(request.kind);
  e.template_version = request.template_version;
  e.model = model();
  e.dataset_fingerprint = request.dataset_fingerprint;
  e.request_snapshot = request.prompt;
  e.response = std::move(response);
  e.recorded_at = clock_();
  return e;
}

std::string ScenarioCompleter::complete(const CompletionRequest& request) {
  const std::string key = cache_key(request, model());
  switch (scenario_.mode) {
    case ScenarioMode::Replay: {
      auto entry = cache_->find(key);
      if (!entry) throw CacheMiss(key);
      ++cache_hits_;
      return apply_alterations(scenario_, *entry);
    }
    case ScenarioMode::Record: {
      if (auto entry = cache_->find(key)) {
        ++cache_hits_;
        return apply_alterations(scenario_, *entry);
      }
      ++provider_calls_;
      auto entry = make_entry(request, key, live_->complete(request));
      cache_->store(entry);
      return apply_alterations(scenario_, entry);
    }
    case ScenarioMode::Live:
      break;
  }
  ++provider_calls_;
  auto entry = make_entry(request, key, live_->complete(request));
  if (log_) log_->store(entry);
  return apply_alterations(scenario_, entry);
}

// ---- automation ----------------------------------------------------------------

SessionSeed autostart(const Scenario& scenario) {
  SessionSeed seed;
  seed.analyze_factors_immediately = scenario.analyze_factors_immediately;
  if (scenario.auto_upload_filename) {
    const auto& path = *scenario.auto_upload_filename;
    if (!fs::is_regular_file(path)) throw MissingScenarioFile(path.string());
    seed.dataset = load_csv(read_file(path), path.filename().string());
  }
  return seed;
}

}  // namespace provoscope
