#include <csignal>
#include <cstdlib>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <httplib.h>

#include "provoscope/error.hpp"
#include "provoscope/http_api.hpp"
#include "provoscope/llm.hpp"
#include "provoscope/scenario.hpp"
#include "provoscope/service.hpp"

using namespace provoscope;
namespace fs = std::filesystem;

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string scenario = "default";
  std::string scenario_dir;
  std::string cache_dir;
  std::string base_url;
  std::string model;
  bool record = false;
  bool replay = false;
  std::string persist;
  std::string static_dir;
  bool separate_provocations = false;
  int timeout_ms = 90'000;
  int max_retries = 1;
  double temperature = 0.0;
};

std::vector<Scenario> load_scenarios(const std::string& dir) {
  if (dir.empty()) return {};
  if (!fs::is_directory(dir)) throw ScenarioError("scenario directory not found: " + dir);
  return load_scenario_directory(dir);
}

// Command-line overrides rewrite the startup scenario.
void apply_overrides(std::vector<Scenario>& scenarios, const ServeOptions& o) {
  auto it = std::find_if(scenarios.begin(), scenarios.end(),
                         [&](const Scenario& s) { return s.display_name == o.scenario; });
  if (it == scenarios.end()) {
    if (o.scenario != "default") throw ScenarioError("unknown scenario \"" + o.scenario + "\"");
    scenarios.push_back(Scenario::default_scenario());
    it = scenarios.end() - 1;
  }
  if (!o.cache_dir.empty()) it->cache_dir = o.cache_dir;
  if (o.record) it->mode = ScenarioMode::Record;
  if (o.replay) it->mode = ScenarioMode::Replay;
  if (it->mode != ScenarioMode::Live && it->cache_dir.empty()) {
    throw ScenarioError("--record and --replay need --cache-dir");
  }
  if (!o.model.empty() && !it->model) it->model = o.model;
}

int serve(const ServeOptions& o) {
  ServiceConfig config;
  config.scenarios = load_scenarios(o.scenario_dir);
  apply_overrides(config.scenarios, o);
  config.startup_scenario = o.scenario;
  config.model = o.model;
  config.provocation_mode = o.separate_provocations ? ProvocationMode::Separate : ProvocationMode::Joint;
  if (!o.persist.empty()) config.persist_dir = fs::path(o.persist);

  if (!o.base_url.empty()) {
    ProviderConfig provider;
    provider.base_url = o.base_url;
    provider.model = o.model;
    provider.api_key = api_key_from_env();
    provider.temperature = o.temperature;
    provider.timeout = std::chrono::milliseconds(o.timeout_ms);
    provider.max_retries = o.max_retries;
    provider.validate();
    config.live = std::make_shared<ProviderClient>(provider, std::make_shared<HttpTransport>());
  }

  Service service(std::move(config));
  httplib::Server server;
  std::optional<fs::path> static_dir;
  if (!o.static_dir.empty()) static_dir = fs::path(o.static_dir);
  register_routes(server, service, static_dir);

  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  if (!server.bind_to_port(o.host, o.port)) {
    std::cerr << "provoscope: cannot listen on " << o.host << ":" << o.port << "\n";
    return 1;
  }
  std::cerr << "provoscope: serving on http://" << o.host << ":" << o.port << " (scenario "
            << o.scenario << ")\n";
  server.listen_after_bind();
  g_server = nullptr;
  return 0;
}

int list(const std::string& dir) {
  auto scenarios = load_scenarios(dir);
  scenarios.insert(scenarios.begin(), Scenario::default_scenario());
  for (const auto& s : scenarios) std::cout << scenario_summary(s).dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"provoscope: shortlisting with model-written factors and provocations"};
  app.require_subcommand(1);

  ServeOptions o;
  if (const char* env = std::getenv("PROVOSCOPE_SCENARIO_DIR")) o.scenario_dir = env;

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--host", o.host, "Address to bind")->capture_default_str();
  serve_cmd->add_option("--port", o.port, "Port to listen on")->capture_default_str();
  serve_cmd->add_option("--scenario", o.scenario, "Startup scenario")->capture_default_str();
  serve_cmd->add_option("--scenario-dir", o.scenario_dir,
                        "Manifest directory (default: $PROVOSCOPE_SCENARIO_DIR)");
  serve_cmd->add_option("--cache-dir", o.cache_dir, "Response cache for the startup scenario");
  serve_cmd->add_option("--llm-base-url", o.base_url, "OpenAI-compatible endpoint, e.g. https://api.openai.com/v1");
  serve_cmd->add_option("--model", o.model, "Model name");
  auto* rec = serve_cmd->add_flag("--record", o.record, "Record provider responses");
  serve_cmd->add_flag("--replay", o.replay, "Answer only from the cache")->excludes(rec);
  serve_cmd->add_option("--persist", o.persist, "Directory for session snapshots");
  serve_cmd->add_option("--static-dir", o.static_dir, "UI bundle served at /");
  serve_cmd->add_flag("--separate-provocations", o.separate_provocations,
                      "Request provocations in a second call");
  serve_cmd->add_option("--timeout", o.timeout_ms, "Provider timeout in ms")->capture_default_str();
  serve_cmd->add_option("--max-retries", o.max_retries, "Provider retries")->capture_default_str();
  serve_cmd->add_option("--temperature", o.temperature, "Sampling temperature")->capture_default_str();

  auto* list_cmd = app.add_subcommand("scenarios", "List available scenarios");
  list_cmd->add_option("--scenario-dir", o.scenario_dir, "Manifest directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*serve_cmd) return serve(o);
    return list(o.scenario_dir);
  } catch (const std::exception& e) {
    std::cerr << "provoscope: " << e.what() << "\n";
    return 1;
  }
}
