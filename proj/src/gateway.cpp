#include <cmath>
#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>

#include "provoscope/error.hpp"
#include "provoscope/llm.hpp"

namespace provoscope {

using nlohmann::json;

void ProviderConfig::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw Error("InvalidConfig", "temperature must lie in [0, 2]");
  }
  if (timeout.count() <= 0) throw Error("InvalidConfig", "timeout must be positive");
  if (max_retries < 0) throw Error("InvalidConfig", "max_retries must not be negative");
  if (max_in_flight == 0) throw Error("InvalidConfig", "max_in_flight must be at least 1");
  if (base_url.empty()) throw Error("InvalidConfig", "provider base URL is not set");
}

std::string api_key_from_env() {
  const char* key = std::getenv("PROVOSCOPE_API_KEY");
  return key ? key : "";
}

std::string_view to_string(RequestKind kind) {
  switch (kind) {
    case RequestKind::Factors: return "factors";
    case RequestKind::Provocations: return "provocations";
    case RequestKind::Analysis: return "analysis";
  }
  return "factors";
}

std::string build_chat_request(const ProviderConfig& config, std::string_view prompt) {
  json body{{"model", config.model},
            {"temperature", config.temperature},
            {"messages", json::array({{{"role", "user"}, {"content", std::string(prompt)}}})}};
  return body.dump();
}

std::string extract_message_content(int status, std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error&) {
    throw ProviderError(status, std::string(body));
  }
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
  } catch (const json::exception&) {
  }
  throw ProviderError(status, std::string(body));
}

ProviderClient::ProviderClient(ProviderConfig config, std::shared_ptr<ChatTransport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      slots_(static_cast<std::ptrdiff_t>(config_.max_in_flight)) {
  config_.validate();
}

std::string ProviderClient::complete(const CompletionRequest& request) {
  return complete(std::string_view(request.prompt));
}

std::string ProviderClient::complete(std::string_view prompt) {
  struct Slot {
    std::counting_semaphore<>& s;
    explicit Slot(std::counting_semaphore<>& sem) : s(sem) { s.acquire(); }
    ~Slot() { s.release(); }
  } slot(slots_);

  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/chat/completions";
  std::vector<std::pair<std::string, std::string>> headers;
  if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);
  const std::string body = build_chat_request(config_, prompt);

  std::exception_ptr last;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.retry_backoff * attempt);
    HttpResult r = transport_->post(url, headers, body, config_.timeout);
    if (r.failure == HttpResult::Failure::Timeout) {
      throw Timeout("no response from the provider within " +
                    std::to_string(config_.timeout.count()) + " ms");
    }
    if (r.failure == HttpResult::Failure::Connection) {
      last = std::make_exception_ptr(ProviderError(0, r.error));
      continue;
    }
    if (r.status == 429) {
      last = std::make_exception_ptr(RateLimited(r.body));
      continue;
    }
    if (r.status >= 500) {
      last = std::make_exception_ptr(ProviderError(r.status, r.body));
      continue;
    }
    if (r.status < 200 || r.status >= 300) throw ProviderError(r.status, r.body);
    return extract_message_content(r.status, r.body);
  }
  std::rethrow_exception(last);
}

Factor factor_from_draft(const FactorDraft& draft) {
  Factor f;
  f.title = draft.name;
  f.source_columns = draft.source_columns;
  f.criteria = draft.criteria;
  f.provocation = draft.risk;
  f.importance = draft.importance;
  f.status = FactorStatus::Draft;
  f.refresh_status();
  return f;
}

GeneratedFactors generate_factors(std::string_view query, const Dataset& dataset,
                                  Completer& completer, ProvocationMode mode) {
  const std::string fp = fingerprint(dataset);
  GeneratedFactors out;

  CompletionRequest request{RequestKind::Factors, std::string(kFactorTemplateVersion), fp,
                            build_factor_prompt(query, dataset, mode)};
  const std::string raw = completer.complete(request);
  ++out.provider_calls;
  auto parsed = parse_factor_response(raw, dataset, mode == ProvocationMode::Joint);
  out.drafts = std::move(parsed.factors);
  out.warnings = std::move(parsed.warnings);

  if (mode == ProvocationMode::Separate) {
    for (auto& d : out.drafts) d.risk.clear();
    CompletionRequest second{RequestKind::Provocations, std::string(kProvocationTemplateVersion),
                             fp, build_provocation_prompt(query, dataset, out.drafts)};
    const std::string risks = completer.complete(second);
    ++out.provider_calls;
    merge_provocations(out.drafts, risks);
  }
  return out;
}

namespace {

struct Attempt {
  std::optional<AnalysisResponse> response;
  std::optional<FilterExpr> filter;
  std::string problem;  // why the filter could not be used
};

Attempt evaluate_response(const std::string& raw, const Dataset& dataset) {
  Attempt a;
  try {
    a.response = parse_analysis_response(raw);
  } catch (const Error& e) {
    a.problem = e.what();
    return a;
  }
  if (!a.response->filter) {
    a.problem = "the answer has no \"filter\"";
    return a;
  }
  try {
    auto expr = parse_filter(*a.response->filter);
    auto unknown = validate_columns(expr, dataset);
    if (!unknown.empty()) {
      std::string names;
      for (const auto& n : unknown) names += (names.empty() ? "" : ", ") + n;
      a.problem = "the filter names unknown column(s): " + names;
      return a;
    }
    a.filter = std::move(expr);
  } catch (const ParseError& e) {
    a.problem = "the filter \"" + *a.response->filter + "\" does not parse: " + e.what();
  }
  return a;
}

}  // namespace

AnalysisPlan generate_filter_with_fallback(const Factor& factor, const Dataset& dataset,
                                           Completer& completer) {
  const std::string fp = fingerprint(dataset);
  AnalysisPlan plan;

  CompletionRequest first{RequestKind::Analysis, std::string(kAnalysisTemplateVersion), fp,
                          build_analysis_prompt(factor, dataset)};
  Attempt a = evaluate_response(completer.complete(first), dataset);
  ++plan.provider_calls;

  auto accept = [&](Attempt& at) {
    plan.filter = std::move(at.filter);
    plan.inputs.row_reasons = std::move(at.response->per_row);
    plan.inputs.message = std::move(at.response->message);
  };

  if (a.filter) {
    accept(a);
    return plan;
  }

  CompletionRequest retry{RequestKind::Analysis, std::string(kAnalysisTemplateVersion), fp,
                          build_analysis_retry_prompt(factor, dataset, a.problem)};
  Attempt b = evaluate_response(completer.complete(retry), dataset);
  ++plan.provider_calls;
  if (b.filter) {
    accept(b);
    plan.inputs.notes.push_back("The filter was accepted after one retry.");
    return plan;
  }

  for (Attempt* at : {&b, &a}) {
    if (!at->response || at->response->per_row.empty()) continue;
    std::vector<RowId> ids;
    for (const auto& r : at->response->per_row) ids.push_back(r.id);
    plan.inputs.explicit_rows = std::move(ids);
    plan.inputs.row_reasons = std::move(at->response->per_row);
    plan.inputs.message = std::move(at->response->message);
    plan.inputs.notes.push_back("Degraded mode: no usable filter (" + b.problem +
                                "), so the shortlist holds only the rows the model listed.");
    return plan;
  }
  throw UnusableAnalysis("analysis of \"" + factor.title + "\" produced no usable filter or rows: " +
                         b.problem);
}

}  // namespace provoscope
