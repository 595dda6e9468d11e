#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "provoscope/dataset.hpp"
#include "provoscope/factor.hpp"

namespace provoscope {

inline constexpr std::size_t kFactorPromptRows = 40;
inline constexpr std::size_t kAnalysisPromptRows = 5;
inline constexpr std::size_t kMaxGeneratedFactors = 5;
inline constexpr std::size_t kPromptCellLimit = 120;  // code points

// Bumped whenever the wording of a template changes; part of every cache key.
inline constexpr std::string_view kFactorTemplateVersion = "factors/1";
inline constexpr std::string_view kProvocationTemplateVersion = "provocations/1";
inline constexpr std::string_view kAnalysisTemplateVersion = "analysis/1";

enum class ProvocationMode {
  Joint,     // factors and their risks in one call
  Separate,  // a second call writes the risks
};

struct ProviderConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key;
  double temperature = 0.0;
  std::chrono::milliseconds timeout{90'000};
  int max_retries = 1;
  std::chrono::milliseconds retry_backoff{500};
  std::size_t max_in_flight = 4;

  // Throws Error("InvalidConfig").
  void validate() const;
};

// PROVOSCOPE_API_KEY, or empty.
std::string api_key_from_env();

enum class RequestKind { Factors, Provocations, Analysis };

std::string_view to_string(RequestKind kind);

struct CompletionRequest {
  RequestKind kind = RequestKind::Factors;
  std::string template_version;
  std::string dataset_fingerprint;
  std::string prompt;
};

// Turns a prompt into model text. Implemented by the provider client and by
// the scenario interceptor that wraps it.
class Completer {
 public:
  virtual ~Completer() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string model() const = 0;
};

// ---- transport -----------------------------------------------------------------

struct HttpResult {
  enum class Failure { None, Connection, Timeout };

  Failure failure = Failure::None;
  int status = 0;
  std::string body;
  std::string error;  // transport error text when failure != None
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  // POSTs `body` (JSON) to `url` with the given extra headers.
  virtual HttpResult post(const std::string& url,
                          const std::vector<std::pair<std::string, std::string>>& headers,
                          const std::string& body, std::chrono::milliseconds timeout) = 0;
};

// cpp-httplib backed; http:// and https:// URLs.
class HttpTransport : public ChatTransport {
 public:
  HttpResult post(const std::string& url,
                  const std::vector<std::pair<std::string, std::string>>& headers,
                  const std::string& body, std::chrono::milliseconds timeout) override;
};

// OpenAI-compatible chat request body for a single user message.
std::string build_chat_request(const ProviderConfig& config, std::string_view prompt);
// choices[0].message.content; ProviderError when the body has no such field.
std::string extract_message_content(int status, std::string_view body);

class ProviderClient : public Completer {
 public:
  ProviderClient(ProviderConfig config, std::shared_ptr<ChatTransport> transport);

  // Retries connection failures, 5xx and 429 up to max_retries times.
  // Throws Timeout, ProviderError, RateLimited.
  std::string complete(const CompletionRequest& request) override;
  std::string complete(std::string_view prompt);
  std::string model() const override { return config_.model; }

  const ProviderConfig& config() const noexcept { return config_; }

 private:
  ProviderConfig config_;
  std::shared_ptr<ChatTransport> transport_;
  std::counting_semaphore<> slots_;
};

// ---- prompts -------------------------------------------------------------------

// "id_|h1|h2" followed by one pipe-delimited line per row.
std::string serialize_rows(const Dataset& dataset, std::span<const Row> rows);

// Throws EmptyQuery.
std::string build_factor_prompt(std::string_view query, const Dataset& dataset,
                                ProvocationMode mode = ProvocationMode::Joint);

struct FactorDraft {
  std::string name;
  std::vector<std::string> source_columns;
  std::string criteria;
  Importance importance = Importance::Medium;
  std::string risk;

  friend bool operator==(const FactorDraft&, const FactorDraft&) = default;
};

// Second call of ProvocationMode::Separate.
std::string build_provocation_prompt(std::string_view query, const Dataset& dataset,
                                     std::span<const FactorDraft> drafts);

// Throws EmptyCriteria.
std::string build_analysis_prompt(const Factor& factor, const Dataset& dataset);

// The analysis prompt followed by the reason the previous answer was rejected.
std::string build_analysis_retry_prompt(const Factor& factor, const Dataset& dataset,
                                        std::string_view problem);

// ---- responses -----------------------------------------------------------------

// Contents of the first ``` fenced block, or the whole text when unfenced.
std::string_view extract_fenced_block(std::string_view raw);

struct FactorDrafts {
  std::vector<FactorDraft> factors;  // 1..5
  std::vector<std::string> warnings;
};

// Throws NotJson, SchemaError. With `require_risk` false a missing "risk" is
// accepted (the separate provocation call fills it in).
FactorDrafts parse_factor_response(std::string_view raw, const Dataset& dataset,
                                   bool require_risk = true);

// Fenced JSON in the shape parse_factor_response accepts.
std::string serialize_factor_drafts(std::span<const FactorDraft> drafts);

// Fills `drafts` risks from a provocation response; SchemaError("risk") when
// a draft is left without one.
void merge_provocations(std::vector<FactorDraft>& drafts, std::string_view raw);

struct AnalysisResponse {
  std::optional<std::string> filter;
  std::vector<RowReason> per_row;
  std::string message;
};

// Throws NotJson, SchemaError.
AnalysisResponse parse_analysis_response(std::string_view raw);

// ---- orchestration -------------------------------------------------------------

Factor factor_from_draft(const FactorDraft& draft);

struct GeneratedFactors {
  std::vector<FactorDraft> drafts;
  std::vector<std::string> warnings;
  std::size_t provider_calls = 0;
};

// One provider call in Joint mode, two in Separate mode.
GeneratedFactors generate_factors(std::string_view query, const Dataset& dataset,
                                  Completer& completer,
                                  ProvocationMode mode = ProvocationMode::Joint);

struct AnalysisPlan {
  std::optional<FilterExpr> filter;  // empty in degraded mode
  AnalysisInputs inputs;
  std::size_t provider_calls = 0;
};

// Asks for a filter; on a bad one re-prompts once with the problem appended;
// then falls back to the listed per_row ids. Throws UnusableAnalysis when
// neither route yields anything.
AnalysisPlan generate_filter_with_fallback(const Factor& factor, const Dataset& dataset,
                                           Completer& completer);

}  // namespace provoscope
