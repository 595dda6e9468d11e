#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace provoscope {

// Base of every error the library raises. `code()` is a stable identifier
// ("RaggedRow", "CacheMiss", ...) that the service puts on the wire.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

  // Whether repeating the same request may succeed.
  virtual bool retriable() const noexcept { return false; }

 private:
  std::string code_;
};

// ---- dataset ---------------------------------------------------------------

class EmptyFile : public Error {
 public:
  EmptyFile() : Error("EmptyFile", "dataset is empty: no header row") {}
};

class DuplicateHeader : public Error {
 public:
  explicit DuplicateHeader(std::string name)
      : Error("DuplicateHeader", "duplicate column name: " + name),
        name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class EmptyHeader : public Error {
 public:
  explicit EmptyHeader(std::size_t column)
      : Error("EmptyHeader",
              "column " + std::to_string(column + 1) + " has an empty name"),
        column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class RaggedRow : public Error {
 public:
  RaggedRow(std::size_t line, std::size_t expected, std::size_t actual)
      : Error("RaggedRow", "line " + std::to_string(line) + ": expected " +
                               std::to_string(expected) + " fields, found " +
                               std::to_string(actual)),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EncodingError : public Error {
 public:
  explicit EncodingError(std::size_t offset)
      : Error("EncodingError",
              "invalid UTF-8 at byte offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class MalformedCsv : public Error {
 public:
  explicit MalformedCsv(const std::string& message)
      : Error("MalformedCsv", message) {}
};

class DatasetTooLarge : public Error {
 public:
  explicit DatasetTooLarge(const std::string& message)
      : Error("DatasetTooLarge", message) {}
};

class UnknownColumn : public Error {
 public:
  explicit UnknownColumn(std::vector<std::string> names);
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
};

// ---- filter language -------------------------------------------------------

class ParseError : public Error {
 public:
  // `token` is 1-based; `offset` is the byte offset of that token in the source.
  ParseError(std::size_t token, std::size_t offset, std::string expected,
             const std::string& found);
  std::size_t token() const noexcept { return token_; }
  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t token_;
  std::size_t offset_;
  std::string expected_;
};

// ---- factors and ranking ---------------------------------------------------

class UnrunnableFactor : public Error {
 public:
  explicit UnrunnableFactor(const std::string& message)
      : Error("UnrunnableFactor", message) {}
};

class NoAnalyzedFactors : public Error {
 public:
  NoAnalyzedFactors()
      : Error("NoAnalyzedFactors",
              "at least one factor must be analyzed before ranking") {}
};

class UnknownWeight : public Error {
 public:
  explicit UnknownWeight(const std::string& weight)
      : Error("UnknownWeight", "no highlight shade for weight " + weight) {}
};

// ---- LLM gateway -----------------------------------------------------------

class EmptyQuery : public Error {
 public:
  EmptyQuery() : Error("EmptyQuery", "query text must not be empty") {}
};

class EmptyCriteria : public Error {
 public:
  EmptyCriteria() : Error("EmptyCriteria", "factor criteria must not be empty") {}
};

class NotJson : public Error {
 public:
  explicit NotJson(const std::string& detail)
      : Error("NotJson", "model response is not a structured object: " + detail) {}
};

class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& detail)
      : Error("SchemaError", "model response field \"" + field + "\": " + detail),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class Timeout : public Error {
 public:
  explicit Timeout(const std::string& message) : Error("Timeout", message) {}
  bool retriable() const noexcept override { return true; }
};

class ProviderError : public Error {
 public:
  ProviderError(int status, std::string body);
  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }
  bool retriable() const noexcept override { return status_ == 0 || status_ >= 500; }

 private:
  int status_;
  std::string body_;
};

class RateLimited : public Error {
 public:
  explicit RateLimited(std::string body)
      : Error("RateLimited", "provider rate limit exceeded"), body_(std::move(body)) {}
  const std::string& body() const noexcept { return body_; }
  bool retriable() const noexcept override { return true; }

 private:
  std::string body_;
};

class UnusableAnalysis : public Error {
 public:
  explicit UnusableAnalysis(const std::string& message)
      : Error("UnusableAnalysis", message) {}
};

// ---- scenarios -------------------------------------------------------------

class CacheMiss : public Error {
 public:
  explicit CacheMiss(std::string key)
      : Error("CacheMiss", "no recorded response for request " + key),
        key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class AlterationTargetMissing : public Error {
 public:
  explicit AlterationTargetMissing(const std::string& path)
      : Error("AlterationTargetMissing", "alteration target not found: " + path) {}
};

class MissingScenarioFile : public Error {
 public:
  explicit MissingScenarioFile(const std::string& path)
      : Error("MissingScenarioFile", "scenario file not found: " + path) {}
};

class ScenarioError : public Error {
 public:
  explicit ScenarioError(const std::string& message)
      : Error("ScenarioError", message) {}
};

// ---- service ---------------------------------------------------------------

class UnknownSession : public Error {
 public:
  explicit UnknownSession(const std::string& id)
      : Error("UnknownSession", "no session with id " + id) {}
};

class UnknownFactor : public Error {
 public:
  explicit UnknownFactor(const std::string& id)
      : Error("UnknownFactor", "no factor with id " + id) {}
};

class UnknownScenario : public Error {
 public:
  explicit UnknownScenario(const std::string& name)
      : Error("UnknownScenario", "no scenario named \"" + name + "\"") {}
};

class NoDataset : public Error {
 public:
  NoDataset() : Error("NoDataset", "upload a dataset first") {}
};

class FactorCapReached : public Error {
 public:
  explicit FactorCapReached(std::size_t cap)
      : Error("FactorCapReached",
              "a session holds at most " + std::to_string(cap) + " factors") {}
};

class InvalidRequest : public Error {
 public:
  explicit InvalidRequest(const std::string& message) : Error("InvalidRequest", message) {}
};

class ProviderUnavailable : public Error {
 public:
  explicit ProviderUnavailable(const std::string& message)
      : Error("ProviderUnavailable", message) {}
};

}  // namespace provoscope
