#pragma once

#include <filesystem>
#include <optional>

namespace httplib {
class Server;
}

namespace provoscope {

class Service;

// Mounts the REST routes under /api and, when given, the UI bundle at /.
void register_routes(httplib::Server& server, Service& service,
                     const std::optional<std::filesystem::path>& static_dir = std::nullopt);

}  // namespace provoscope
