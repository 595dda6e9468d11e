#include "provoscope/http_api.hpp"

#include <httplib.h>

#include "provoscope/service.hpp"

namespace provoscope {

using nlohmann::json;

namespace {

void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  if (r.body.is_object() && r.body.contains("version")) {
    res.set_header("X-Session-Version", std::to_string(r.body["version"].get<std::uint64_t>()));
  }
  if (r.status == 204) return;
  res.set_content(r.body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  res.status = status;
  res.set_content(json{{"code", code}, {"message", message}, {"retriable", false}}.dump(),
                  "application/json");
}

// Empty bodies count as {}.
std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    send_error(res, 422, "InvalidRequest", std::string("request body is not JSON: ") + e.what());
    return std::nullopt;
  }
}

std::size_t size_param(const httplib::Request& req, const char* name, std::size_t fallback) {
  if (!req.has_param(name)) return fallback;
  try {
    return static_cast<std::size_t>(std::stoull(req.get_param_value(name)));
  } catch (const std::exception&) {
    return fallback;
  }
}

}  // namespace

void register_routes(httplib::Server& server, Service& service,
                     const std::optional<std::filesystem::path>& static_dir) {
  server.Post("/api/sessions", [&](const httplib::Request&, httplib::Response& res) {
    send(res, service.create_session());
  });
  server.Get(R"(/api/sessions/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, service.get_session(req.matches[1]));
  });
  server.Get(R"(/api/sessions/([^/]+)/dataset/rows)",
             [&](const httplib::Request& req, httplib::Response& res) {
               send(res, service.get_rows(req.matches[1], size_param(req, "offset", 0),
                                          size_param(req, "limit", 100)));
             });
  server.Post(R"(/api/sessions/([^/]+)/dataset)",
              [&](const httplib::Request& req, httplib::Response& res) {
                std::string filename;
                std::string bytes;
                if (req.is_multipart_form_data()) {
                  if (!req.has_file("file")) {
                    send_error(res, 422, "InvalidRequest", "multipart upload needs a \"file\" part");
                    return;
                  }
                  const auto file = req.get_file_value("file");
                  filename = file.filename;
                  bytes = file.content;
                } else {
                  filename = req.has_param("filename") ? req.get_param_value("filename") : "";
                  bytes = req.body;
                }
                send(res, service.upload_dataset(req.matches[1], filename, bytes));
              });
  server.Post(R"(/api/sessions/([^/]+)/query)",
              [&](const httplib::Request& req, httplib::Response& res) {
                if (auto body = parse_body(req, res)) send(res, service.submit_query(req.matches[1], *body));
              });
  server.Post(R"(/api/sessions/([^/]+)/factors)",
              [&](const httplib::Request& req, httplib::Response& res) {
                send(res, service.spawn_factor(req.matches[1]));
              });
  server.Patch(R"(/api/sessions/([^/]+)/factors/([^/]+))",
               [&](const httplib::Request& req, httplib::Response& res) {
                 if (auto body = parse_body(req, res)) {
                   send(res, service.patch_factor(req.matches[1], req.matches[2], *body));
                 }
               });
  server.Delete(R"(/api/sessions/([^/]+)/factors/([^/]+))",
                [&](const httplib::Request& req, httplib::Response& res) {
                  send(res, service.delete_factor(req.matches[1], req.matches[2]));
                });
  server.Post(R"(/api/sessions/([^/]+)/factors/([^/]+)/analyze)",
              [&](const httplib::Request& req, httplib::Response& res) {
                send(res, service.analyze_factor(req.matches[1], req.matches[2]));
              });
  server.Post(R"(/api/sessions/([^/]+)/shortlist)",
              [&](const httplib::Request& req, httplib::Response& res) {
                send(res, service.compute_shortlist(req.matches[1]));
              });
  server.Get("/api/scenarios", [&](const httplib::Request&, httplib::Response& res) {
    send(res, service.list_scenarios());
  });
  server.Post(R"(/api/sessions/([^/]+)/scenario)",
              [&](const httplib::Request& req, httplib::Response& res) {
                if (auto body = parse_body(req, res)) send(res, service.bind_scenario(req.matches[1], *body));
              });

  // JSON bodies for unmatched routes; handler errors already carry one.
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
    if (res.status == 404) {
      send_error(res, 404, "NotFound", "no route for " + req.method + " " + req.path);
    } else if (res.status == 405) {
      send_error(res, 405, "MethodNotAllowed", req.method + " is not supported on " + req.path);
    }
    return httplib::Server::HandlerResponse::Handled;
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    send_error(res, 500, "Internal", message);
  });

  if (static_dir) server.set_mount_point("/", static_dir->string());
}

}  // namespace provoscope
