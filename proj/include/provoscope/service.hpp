#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "provoscope/dataset.hpp"
#include "provoscope/error.hpp"
#include "provoscope/factor.hpp"
#include "provoscope/llm.hpp"
#include "provoscope/scenario.hpp"

namespace provoscope {

inline constexpr std::size_t kMaxSessionFactors = 8;

struct ServiceConfig {
  // "default" is added when absent.
  std::vector<Scenario> scenarios;
  std::string startup_scenario = "default";
  std::shared_ptr<Completer> live;  // null when no provider is configured
  std::string model;                // cache-key model when there is no live provider
  ProvocationMode provocation_mode = ProvocationMode::Joint;
  std::optional<std::filesystem::path> persist_dir;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;  // null for 204
};

// Maps an error to its HTTP status.
int http_status_for(const Error& error);
// {code, message, retriable} plus error-specific details.
nlohmann::json error_body(const Error& error);

struct Session {
  std::string id;
  std::string scenario;
  std::uint64_t version = 0;
  std::optional<Dataset> dataset;
  std::optional<std::string> query;
  std::vector<Factor> factors;
  std::optional<GlobalShortlist> shortlist;
  bool shortlist_stale = false;
  std::vector<std::string> warnings;  // from the last factor generation
  std::uint64_t next_factor = 1;
};

// Handler-level API; the HTTP layer only translates requests and responses.
// Requests on different sessions run concurrently; writes within one session
// are serialized and reads share a lock.
class Service {
 public:
  // Throws ScenarioError when the startup scenario is unknown or unusable.
  explicit Service(ServiceConfig config);

  ApiResponse create_session();
  ApiResponse get_session(const std::string& id) const;
  // Raw rows in dataset order, for displaying the table before ranking.
  ApiResponse get_rows(const std::string& id, std::size_t offset, std::size_t limit) const;
  ApiResponse upload_dataset(const std::string& id, const std::string& filename,
                             const std::string& bytes);
  ApiResponse submit_query(const std::string& id, const nlohmann::json& body);
  ApiResponse spawn_factor(const std::string& id);
  ApiResponse patch_factor(const std::string& id, const std::string& fid,
                           const nlohmann::json& body);
  ApiResponse delete_factor(const std::string& id, const std::string& fid);
  ApiResponse analyze_factor(const std::string& id, const std::string& fid);
  ApiResponse compute_shortlist(const std::string& id);
  ApiResponse list_scenarios() const;
  ApiResponse bind_scenario(const std::string& id, const nlohmann::json& body);

  // Provider calls made through every scenario since startup.
  std::size_t provider_calls() const;

 private:
  struct Slot {
    mutable std::shared_mutex mutex;
    Session session;
  };
  struct ScenarioRuntime {
    Scenario scenario;
    std::shared_ptr<ScenarioCompleter> completer;  // null when unusable
    std::string unavailable;                       // why completer is null
  };

  std::shared_ptr<Slot> find_slot(const std::string& id) const;
  const ScenarioRuntime& runtime(const std::string& name) const;
  Completer& completer_for(const Session& session) const;
  void apply_seed(Session& session, const Scenario& scenario);
  void run_analysis(Session& session, Factor& factor);
  void touch(Session& session);
  void persist(const Session& session) const;
  void load_snapshots();

  ServiceConfig config_;
  std::map<std::string, ScenarioRuntime> scenarios_;
  std::vector<std::string> scenario_order_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

nlohmann::json session_to_json(const Session& session);

}  // namespace provoscope
