#pragma once

#include <nlohmann/json.hpp>

#include "provoscope/dataset.hpp"
#include "provoscope/factor.hpp"

namespace provoscope {

// Headers, counts, per-column types and the fingerprint; no row data.
nlohmann::json dataset_summary(const Dataset& dataset);

nlohmann::json to_json(const ColumnProfile& profile);
ColumnProfile profile_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const FactorAnalysis& analysis);
FactorAnalysis analysis_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const Factor& factor);
Factor factor_from_json(const nlohmann::json& doc);

// Entries carry the row's raw cells so a client can render the table as is.
nlohmann::json to_json(const GlobalShortlist& shortlist, const Dataset& dataset);
GlobalShortlist shortlist_from_json(const nlohmann::json& doc);

}  // namespace provoscope
