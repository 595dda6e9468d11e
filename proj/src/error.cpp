#include "provoscope/error.hpp"

namespace provoscope {

namespace {

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& name : names) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

}  // namespace

UnknownColumn::UnknownColumn(std::vector<std::string> names)
    : Error("UnknownColumn", "unknown column(s): " + join_names(names)),
      names_(std::move(names)) {}

ParseError::ParseError(std::size_t token, std::size_t offset, std::string expected,
                       const std::string& found)
    : Error("ParseError", "filter parse error at token " + std::to_string(token) +
                              " (offset " + std::to_string(offset) + "): expected " +
                              expected + ", found " + found),
      token_(token),
      offset_(offset),
      expected_(std::move(expected)) {}

ProviderError::ProviderError(int status, std::string body)
    : Error("ProviderError",
            status == 0 ? "provider unreachable: " + body
                        : "provider returned HTTP " + std::to_string(status)),
      status_(status),
      body_(std::move(body)) {}

}  // namespace provoscope
