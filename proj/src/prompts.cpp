#include <nlohmann/json.hpp>

#include "provoscope/error.hpp"
#include "provoscope/llm.hpp"

namespace provoscope {

namespace {

// Joined verbatim into the factor prompt.
constexpr std::string_view kRiskBlock =
    "- \"risk\": The risk of using such criteria, and what alternative criteria could be used.\n"
    "  Suggest more relevant topics and keywords to the factor description. Even if there\n"
    "  would be no risk, suggest a case where the opposite of the criteria is better.\n";

constexpr std::string_view kAnalysisBlock =
    "Your answer must contain the following information:\n"
    "- For each row, the row's \"id_\" and a \"reason\" to include the row.\n"
    "- A \"message\" containing any warnings.\n";

constexpr std::string_view kFilterGrammar =
    "expr    := or\n"
    "or      := and { \"or\" and }\n"
    "and     := not { \"and\" not }\n"
    "not     := [\"not\"] atom\n"
    "atom    := \"(\" expr \")\" | pred\n"
    "pred    := col op lit | col \"contains\" str | col \"startswith\" str\n"
    "         | col \"in\" \"[\" lit {\",\" lit} \"]\" | col \"is\" \"missing\"\n"
    "op      := \"==\" | \"!=\" | \"<\" | \"<=\" | \">\" | \">=\"\n"
    "col     := ident | \"`\" any-chars \"`\"\n"
    "lit     := number | str        str := '\"' chars '\"'\n";

bool is_blank(std::string_view s) {
  for (char c : s) {
    if (c != ' ' && c != '\t' && c != '\r' && c != '\n') return false;
  }
  return true;
}

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  return 4;
}

std::string prompt_cell(std::string_view raw) {
  std::string out;
  std::size_t points = 0;
  for (std::size_t i = 0; i < raw.size();) {
    if (points == kPromptCellLimit) {
      out += "\xe2\x80\xa6";  // U+2026
      break;
    }
    const std::size_t len = std::min(utf8_length(static_cast<unsigned char>(raw[i])), raw.size() - i);
    if (len == 1) {
      switch (raw[i]) {
        case '|': out += "\\|"; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        default: out += raw[i];
      }
    } else {
      out.append(raw.substr(i, len));
    }
    i += len;
    ++points;
  }
  return out;
}

std::string describe_columns(const Dataset& dataset) {
  std::string out;
  for (std::size_t i = 0; i < dataset.column_count(); ++i) {
    out += "- " + dataset.headers()[i] + " (" +
           (dataset.column_type(i).kind == ColumnKind::Numeric ? "numeric" : "text") + ")\n";
  }
  return out;
}

std::string dataset_section(const Dataset& dataset, std::size_t sample) {
  const auto rows = sample_rows(dataset, sample);
  std::string out = "The dataset \"" + dataset.name() + "\" has " +
                    std::to_string(dataset.row_count()) + " rows and these columns:\n" +
                    describe_columns(dataset) + "\n";
  out += rows.size() == dataset.row_count()
             ? "All rows"
             : "The first " + std::to_string(rows.size()) + " rows";
  out += " (\"id_\" identifies the row; fields are separated by \"|\"):\n";
  out += serialize_rows(dataset, rows);
  return out;
}

}  // namespace

std::string serialize_rows(const Dataset& dataset, std::span<const Row> rows) {
  std::string out = "id_";
  for (const auto& h : dataset.headers()) out += "|" + prompt_cell(h);
  out += "\n";
  for (const auto& row : rows) {
    out += std::to_string(row.id);
    for (const auto& cell : row.cells) out += "|" + prompt_cell(cell.raw());
    out += "\n";
  }
  return out;
}

std::string build_factor_prompt(std::string_view query, const Dataset& dataset,
                                ProvocationMode mode) {
  if (is_blank(query)) throw EmptyQuery();
  std::string out =
      "You help a user build a shortlist of rows from a table.\n\n"
      "The user's shortlisting goal:\n" + std::string(query) + "\n\n" +
      dataset_section(dataset, kFactorPromptRows) + "\n";
  out += "Suggest at most " + std::to_string(kMaxGeneratedFactors) +
         " factors the user should weigh when building this shortlist.\n"
         "Each factor must contain the following information:\n"
         "- \"name\": The name of the factor or criteria.\n"
         "- \"source_columns\": The columns needed to judge the factor, spelled exactly as in "
         "the header. Use an empty list if no column fits.\n"
         "- \"criteria\": What a row must satisfy to meet the factor.\n"
         "- \"importance\": One of \"High\", \"Medium\" or \"Low\".\n";
  if (mode == ProvocationMode::Joint) {
    out += kRiskBlock;
    out += "\nRespond with one ```json fenced block holding\n"
           "{\"factors\": [{\"name\": \"...\", \"source_columns\": [\"...\"], \"criteria\": \"...\", "
           "\"importance\": \"High\", \"risk\": \"...\"}]}\n";
  } else {
    out += "\nRespond with one ```json fenced block holding\n"
           "{\"factors\": [{\"name\": \"...\", \"source_columns\": [\"...\"], \"criteria\": \"...\", "
           "\"importance\": \"High\"}]}\n";
  }
  return out;
}

std::string build_provocation_prompt(std::string_view query, const Dataset& dataset,
                                     std::span<const FactorDraft> drafts) {
  if (is_blank(query)) throw EmptyQuery();
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& d : drafts) {
    factors.push_back({{"name", d.name},
                       {"source_columns", d.source_columns},
                       {"criteria", d.criteria},
                       {"importance", std::string(to_string(d.importance))}});
  }
  std::string out =
      "You help a user build a shortlist of rows from a table.\n\n"
      "The user's shortlisting goal:\n" + std::string(query) + "\n\n" +
      dataset_section(dataset, kFactorPromptRows) + "\n" +
      "These factors were suggested for the goal:\n" + factors.dump(2) + "\n\n" +
      "For each factor, write its risk.\n"
      "Each factor must contain the following information:\n"
      "- \"name\": The name of the factor or criteria.\n";
  out += kRiskBlock;
  out += "\nRespond with one ```json fenced block holding\n"
         "{\"factors\": [{\"name\": \"...\", \"risk\": \"...\"}]}\n";
  return out;
}

std::string build_analysis_prompt(const Factor& factor, const Dataset& dataset) {
  if (is_blank(factor.criteria)) throw EmptyCriteria();
  std::string sources;
  for (const auto& c : factor.source_columns) sources += (sources.empty() ? "" : ", ") + c;
  std::string out =
      "You help a user build a shortlist of rows from a table by applying one factor.\n\n"
      "Factor: " + factor.title + "\n" +
      "Criteria: " + factor.criteria + "\n" +
      "Source columns: " + (sources.empty() ? "(none)" : sources) + "\n\n" +
      dataset_section(dataset, kAnalysisPromptRows) + "\n";
  out += "Write a filter selecting the rows of the whole table that meet the criteria. "
         "Use only this filter language:\n";
  out += kFilterGrammar;
  out += "Keywords are case-insensitive. Put column names containing spaces or punctuation in "
         "backticks. == and != compare text exactly; contains and startswith ignore case. "
         "A row with an empty value only matches \"is missing\".\n\n";
  out += kAnalysisBlock;
  out += "- A \"filter\" written in the filter language.\n"
         "List under \"per_row\" only the rows shown above that the filter includes.\n\n"
         "Respond with one ```json fenced block holding\n"
         "{\"filter\": \"...\", \"per_row\": [{\"id_\": 0, \"reason\": \"...\"}], "
         "\"message\": \"...\"}\n";
  return out;
}

std::string build_analysis_retry_prompt(const Factor& factor, const Dataset& dataset,
                                        std::string_view problem) {
  return build_analysis_prompt(factor, dataset) +
         "\nYour previous answer could not be used: " + std::string(problem) +
         "\nAnswer again in the same format, keeping strictly to the filter language.\n";
}

}  // namespace provoscope
