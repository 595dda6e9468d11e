#pragma once

// Deterministic stand-in for a model provider, used to record the bad-movies
// replay fixture and in tests. It reads only the prompt, as a real model would.

#include <atomic>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "provoscope/llm.hpp"

namespace testing {

inline constexpr const char* kBadMoviesQuery = "Family movie night of bad movies";
inline constexpr const char* kScriptedModel = "scripted-fixture";

struct ScriptedFactor {
  const char* name;
  std::vector<std::string> source_columns;
  const char* criteria;
  const char* importance;
  const char* risk;
  const char* filter;
  const char* first_filter;  // non-null: the first answer carries this malformed filter
  const char* message;
};

inline const std::vector<ScriptedFactor>& bad_movie_factors() {
  static const std::vector<ScriptedFactor> factors = {
      {"Low critic rating", {"Rating"},
       "Movies rated 4.5 or lower, so the film is reliably bad.", "High",
       "A low rating may reflect a dull film rather than an entertainingly bad one. Consider "
       "how divisive or talked-about a movie is, or cult status. Even if there would be no "
       "risk, a well-rated comedy can still make for a better family evening than a tedious "
       "flop.",
       "Rating <= 4.5", nullptr,
       "Ratings come from aggregate audience scores and say nothing about how fun a film is to "
       "mock."},
      {"Family friendly", {"AgeRating"}, "Rated G or PG so every family member can watch.",
       "High",
       "Age ratings are coarse and differ between countries; a PG-13 film may suit older "
       "children better than a dull G film. Consider content descriptors or the ages of the "
       "children. If the children are teenagers, a stricter rating may cut out the funniest "
       "bad movies.",
       "AgeRating in [\"G\", \"PG\"]", nullptr, ""},
      {"Comedic potential", {"Genre", "Description", "Tone"},
       "Comedies, or plots described as ridiculous, invite laughing along.", "Medium",
       "Intentional comedies that fail can be more awkward than funny. Consider earnest "
       "dramas or action films with absurd premises, which are often funnier to mock. A "
       "sincere, serious bad film can be the better pick when the group enjoys irony.",
       "Genre contains \"comedy\" or Description contains \"ridiculous\"", nullptr,
       "Humour is judged only from the genre label and the description text."},
      {"Manageable runtime", {"Runtime"}, "At most 100 minutes so younger viewers stay engaged.",
       "Medium",
       "Short runtimes exclude epics whose excess is part of the fun. Consider the pacing of "
       "the film instead. A longer movie can be better for a sleepover where the evening has "
       "no fixed end.",
       "Runtime <= 100", "Runtime =< 100", ""},
      {"Box office performance", {"BoxOffice"},
       "Earned under 20 million dollars, a sign of a notorious flop.", "Low",
       "Box office takings track marketing budgets more than quality, and older films earned "
       "less in absolute terms. Consider inflation-adjusted figures or cult following. A "
       "commercially successful bad movie is easier to find and stream.",
       "BoxOffice < 20", nullptr,
       "Some movies have no box office figure and cannot meet this factor."},
  };
  return factors;
}

// Rows embedded in a prompt: header after "id_|", cells unescaped.
inline std::vector<std::vector<std::string>> prompt_rows(const std::string& prompt,
                                                         std::vector<std::string>* headers) {
  auto split = [](const std::string& line) {
    std::vector<std::string> out(1);
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '\\' && i + 1 < line.size()) {
        const char n = line[++i];
        out.back() += n == 'n' ? '\n' : n == 'r' ? '\r' : n;
      } else if (line[i] == '|') {
        out.emplace_back();
      } else {
        out.back() += line[i];
      }
    }
    return out;
  };
  std::vector<std::vector<std::string>> rows;
  auto pos = prompt.find("\nid_|");
  if (pos == std::string::npos) return rows;
  ++pos;
  bool first = true;
  while (pos < prompt.size()) {
    const auto end = prompt.find('\n', pos);
    const std::string line = prompt.substr(pos, end - pos);
    if (line.empty()) break;
    auto cells = split(line);
    if (first) {
      if (headers) *headers = std::vector<std::string>(cells.begin() + 1, cells.end());
      first = false;
    } else {
      rows.push_back(std::move(cells));
    }
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return rows;
}

class ScriptedProvider : public provoscope::Completer {
 public:
  std::string complete(const provoscope::CompletionRequest& request) override {
    ++calls;
    if (request.kind == provoscope::RequestKind::Factors) return factor_answer();
    return analysis_answer(request.prompt);
  }
  std::string model() const override { return kScriptedModel; }

  std::atomic<std::size_t> calls{0};

 private:
  static std::string factor_answer() {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& f : bad_movie_factors()) {
      items.push_back({{"name", f.name},
                       {"source_columns", f.source_columns},
                       {"criteria", f.criteria},
                       {"importance", f.importance},
                       {"risk", f.risk}});
    }
    return "Here are factors to weigh for this shortlist.\n\n```json\n" +
           nlohmann::json{{"factors", items}}.dump(2) + "\n```\n";
  }

  static std::string analysis_answer(const std::string& prompt) {
    const auto at = prompt.find("\nFactor: ");
    const auto eol = prompt.find('\n', at + 1);
    const std::string title = at == std::string::npos ? "" : prompt.substr(at + 9, eol - at - 9);
    const bool retry = prompt.find("Your previous answer could not be used") != std::string::npos;

    const ScriptedFactor* factor = nullptr;
    for (const auto& f : bad_movie_factors()) {
      if (title == f.name) factor = &f;
    }
    if (!factor) {
      return "```json\n" +
             nlohmann::json{{"filter", nullptr},
                            {"per_row", nlohmann::json::array()},
                            {"message", "These criteria cannot be expressed as a filter."}}
                 .dump(2) +
             "\n```\n";
    }
    const std::string filter = (factor->first_filter && !retry) ? factor->first_filter : factor->filter;

    // Reasons for the sample rows that the intended filter selects.
    std::vector<std::string> headers;
    auto rows = prompt_rows(prompt, &headers);
    nlohmann::json per_row = nlohmann::json::array();
    if (!rows.empty()) {
      std::vector<std::vector<std::string>> records;
      for (const auto& r : rows) records.emplace_back(r.begin() + 1, r.end());
      auto sample = provoscope::Dataset::from_records("sample", headers, records);
      const auto expr = provoscope::parse_filter(factor->filter);
      const auto column = factor->source_columns.front();
      const auto index = *sample.column_index(column);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!provoscope::eval_filter(expr, sample.rows()[i], sample).matched) continue;
        per_row.push_back({{"id_", std::stoull(rows[i][0])},
                           {"reason", column + " is " + records[i][index] + "."}});
      }
    }
    return "```json\n" +
           nlohmann::json{{"filter", filter}, {"per_row", per_row}, {"message", factor->message}}
               .dump(2) +
           "\n```\n";
  }
};

}  // namespace testing
