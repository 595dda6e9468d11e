#include <httplib.h>

#include <chrono>

#include "provoscope/error.hpp"
#include "provoscope/llm.hpp"

namespace provoscope {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error("InvalidConfig", "URL lacks a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

HttpResult HttpTransport::post(const std::string& url,
                               const std::vector<std::pair<std::string, std::string>>& headers,
                               const std::string& body, std::chrono::milliseconds timeout) {
  const auto [origin, path] = split_url(url);
  httplib::Client client(origin);
  const auto sec = static_cast<time_t>(timeout.count() / 1000);
  const auto usec = static_cast<time_t>((timeout.count() % 1000) * 1000);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(path, h, body, "application/json");
  HttpResult out;
  if (!res) {
    const auto elapsed = std::chrono::steady_clock::now() - started;
    const auto err = res.error();
    const bool deadline = err == httplib::Error::ConnectionTimeout ||
                          (err == httplib::Error::Read && elapsed >= timeout * 9 / 10);
    out.failure = deadline ? HttpResult::Failure::Timeout : HttpResult::Failure::Connection;
    out.error = httplib::to_string(err);
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

}  // namespace provoscope
