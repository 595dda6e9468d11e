// Regenerates a scenario's replay cache from the scripted provider.
//   record_fixture <manifest.json> <output cache dir>

#include <filesystem>
#include <iostream>
#include <memory>

#include "provoscope/error.hpp"
#include "provoscope/llm.hpp"
#include "provoscope/scenario.hpp"
#include "support/scripted_provider.hpp"

using namespace provoscope;

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: record_fixture <manifest.json> <output cache dir>\n";
    return 2;
  }
  try {
    Scenario scenario = load_scenario_manifest(argv[1]);
    auto seed = autostart(scenario);
    if (!seed.dataset) throw ScenarioError("the scenario has no auto-upload dataset");

    scenario.mode = ScenarioMode::Record;
    scenario.cache_dir = std::filesystem::path(argv[2]);
    scenario.alterations.clear();
    auto provider = std::make_shared<testing::ScriptedProvider>();
    ScenarioCompleter completer(scenario, provider, testing::kScriptedModel);
    completer.set_clock([] { return std::string("2026-01-01T00:00:00Z"); });

    auto generated = generate_factors(testing::kBadMoviesQuery, *seed.dataset, completer,
                                      ProvocationMode::Joint);
    for (const auto& draft : generated.drafts) {
      Factor f = factor_from_draft(draft);
      (void)generate_filter_with_fallback(f, *seed.dataset, completer);
    }
    std::cout << "recorded " << completer.provider_calls() << " responses into " << argv[2]
              << "\n";
  } catch (const std::exception& e) {
    std::cerr << "record_fixture: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
