#include "prefevo/http_server.hpp"

#include "httplib.h"

namespace prefevo {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, const ApiResponse& api) {
    res.status = api.status;
    res.set_content(api.body.dump(), "application/json");
}

bool parse_body(const httplib::Request& req, httplib::Response& res, json& out) {
    try {
        out = req.body.empty() ? json::object() : json::parse(req.body);
        return true;
    } catch (const json::parse_error& e) {
        send_json(res, ApiResponse{400, json{{"error", std::string("body is not valid JSON: ") + e.what()}}});
        return false;
    }
}

} // namespace

HttpServer::HttpServer(Service& service, std::filesystem::path static_dir)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
    auto& srv = *server_;
    // SO_REUSEADDR only, so a port already in use fails to bind.
    srv.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
    });
    srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"status":"ok"})", "application/json");
    });
    srv.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        json body;
        if (parse_body(req, res, body)) send_json(res, service_.create_session(body));
    });
    srv.Get(R"(/api/sessions/([0-9a-f]+)/trial)", [this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, service_.get_trial(req.matches[1]));
    });
    srv.Get(R"(/api/sessions/([0-9a-f]+)/stimuli/([0-9a-z]+))",
            [this](const httplib::Request& req, httplib::Response& res) {
                const StimulusResponse stim = service_.get_stimulus(req.matches[1], req.matches[2]);
                res.status = stim.status;
                if (stim.status == 200) {
                    res.set_content(reinterpret_cast<const char*>(stim.wav->data()), stim.wav->size(), "audio/wav");
                } else {
                    res.set_content(stim.error.dump(), "application/json");
                }
            });
    srv.Post(R"(/api/sessions/([0-9a-f]+)/ratings)", [this](const httplib::Request& req, httplib::Response& res) {
        json body;
        if (parse_body(req, res, body)) send_json(res, service_.submit_rating(req.matches[1], body));
    });
    srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string message = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            message = e.what();
        } catch (...) {
        }
        res.status = 500;
        res.set_content(json{{"error", message}}.dump(), "application/json");
    });
    if (!static_dir.empty()) srv.set_mount_point("/", static_dir.string());
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
        throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port) +
                                 " (address in use or not available)");
    }
    return bound;
}

void HttpServer::serve() { server_->listen_after_bind(); }

void HttpServer::stop() { server_->stop(); }

} // namespace prefevo
