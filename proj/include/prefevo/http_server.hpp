#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "prefevo/service.hpp"

namespace httplib {
class Server;
}

namespace prefevo {

/// HTTP binding of Service:
///   POST /api/sessions                        create
///   GET  /api/sessions/{token}/trial          pending trial descriptor
///   GET  /api/sessions/{token}/stimuli/{id}   audio/wav
///   POST /api/sessions/{token}/ratings        submit
///   GET  /health
class HttpServer {
public:
    explicit HttpServer(Service& service, std::filesystem::path static_dir = {});
    ~HttpServer();

    /// Binds without serving. Port 0 picks a free port. Throws std::runtime_error
    /// when the address cannot be bound (e.g. port in use).
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    void serve();
    void stop();

private:
    Service& service_;
    std::unique_ptr<httplib::Server> server_;
};

} // namespace prefevo
