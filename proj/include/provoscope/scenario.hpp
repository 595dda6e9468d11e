#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "provoscope/dataset.hpp"
#include "provoscope/llm.hpp"

namespace provoscope {

enum class ScenarioMode { Live, Record, Replay };

std::string_view to_string(ScenarioMode mode);
std::optional<ScenarioMode> parse_scenario_mode(std::string_view text);

// Replaces the value at `field_path` in every response whose cache key equals
// `match`, or whose request contains it. An empty `match` selects everything.
//   field_path: factors[name=Runtime].risk, factors[0].importance, message
struct Alteration {
  std::string match;
  std::string field_path;
  nlohmann::json replacement;
};

struct Scenario {
  std::string display_name;
  ScenarioMode mode = ScenarioMode::Live;
  std::optional<std::filesystem::path> auto_upload_filename;
  bool analyze_factors_immediately = false;
  std::filesystem::path cache_dir;
  // Model name used in cache keys; falls back to the provider's.
  std::optional<std::string> model;
  std::vector<Alteration> alterations;

  // Live, no automation, no cache.
  static Scenario default_scenario();
};

// Relative paths in the manifest resolve against its directory.
// Throws MissingScenarioFile, ScenarioError.
Scenario load_scenario_manifest(const std::filesystem::path& path);
// Every *.json file in `dir` and every `*/manifest.json` below it, by path.
std::vector<Scenario> load_scenario_directory(const std::filesystem::path& dir);

nlohmann::json scenario_summary(const Scenario& scenario);

// ---- cache ---------------------------------------------------------------------

struct CacheEntry {
  std::string key;
  std::string kind;
  std::string template_version;
  std::string model;
  std::string dataset_fingerprint;
  std::string request_snapshot;  // the prompt
  std::string response;          // raw model text
  std::string recorded_at;       // ISO 8601, UTC

  friend bool operator==(const CacheEntry&, const CacheEntry&) = default;
};

nlohmann::json to_json(const CacheEntry& entry);
CacheEntry cache_entry_from_json(const nlohmann::json& doc);

// SHA-256 over template version, model, dataset fingerprint and the request.
// Timestamps and credentials never take part.
std::string cache_key(const CompletionRequest& request, std::string_view model);

// One JSON file per entry, named <key>.json. Entries are never overwritten.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<CacheEntry> find(const std::string& key) const;
  // Writes via a temporary file and rename. False when the key already exists.
  bool store(const CacheEntry& entry);
  std::vector<std::string> keys() const;
  std::size_t size() const { return keys().size(); }
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  std::mutex write_mutex_;
};

// ---- alterations ---------------------------------------------------------------

// Replaces the bytes of one JSON value inside `text` (the first fenced block
// when there is one); every other byte is preserved.
// Throws AlterationTargetMissing, NotJson.
std::string splice_json_field(std::string_view text, std::string_view field_path,
                              const nlohmann::json& replacement);

bool alteration_matches(const Alteration& alteration, const CacheEntry& entry);

// The entry's response with every matching alteration applied in order.
std::string apply_alterations(const Scenario& scenario, const CacheEntry& entry);

// ---- interception --------------------------------------------------------------

// Routes completions according to the scenario mode.
class ScenarioCompleter : public Completer {
 public:
  // `live` may be null for Replay. Throws ScenarioError when Record has no
  // live provider or Replay has an empty cache.
  ScenarioCompleter(Scenario scenario, std::shared_ptr<Completer> live,
                    std::string fallback_model = "");

  // Replay: cached response or CacheMiss. Record: cached response when present,
  // otherwise a live call that is stored first. Live: pass-through, logged
  // under cache_dir/live-log when a cache_dir is set.
  std::string complete(const CompletionRequest& request) override;
  std::string model() const override;

  const Scenario& scenario() const noexcept { return scenario_; }
  std::size_t provider_calls() const noexcept { return provider_calls_; }
  std::size_t cache_hits() const noexcept { return cache_hits_; }

  void set_clock(std::function<std::string()> clock) { clock_ = std::move(clock); }

 private:
  CacheEntry make_entry(const CompletionRequest& request, const std::string& key,
                        std::string response) const;

  Scenario scenario_;
  std::shared_ptr<Completer> live_;
  std::string fallback_model_;
  std::unique_ptr<ResponseCache> cache_;
  std::unique_ptr<ResponseCache> log_;
  std::function<std::string()> clock_;
  std::atomic<std::size_t> provider_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

// Current UTC time as 2024-05-01T12:00:00Z.
std::string utc_timestamp();

// ---- automation ----------------------------------------------------------------

struct SessionSeed {
  std::optional<Dataset> dataset;
  bool analyze_factors_immediately = false;
};

// Loads the scenario's auto-upload dataset, if any. Throws MissingScenarioFile
// and the dataset load errors.
SessionSeed autostart(const Scenario& scenario);

}  // namespace provoscope
