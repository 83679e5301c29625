#include "jurirag/service.hpp"

#include <csignal>
#include <ostream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "jurirag/error.hpp"

namespace jurirag {

using nlohmann::json;

namespace {

HttpResult error_result(int status, std::string_view code, std::string_view message) {
    return {status, json{{"error", {{"code", code}, {"message", message}}}}.dump()};
}

Service* g_active = nullptr;

void on_signal(int) {
    if (g_active) g_active->stop();
}

}  // namespace

HttpResult handle_health(const Engine& engine) {
    return {200, json{{"status", "ok"}, {"chunks", engine.index().size()}}.dump()};
}

HttpResult handle_query(const Engine& engine, std::string_view body) {
    json request;
    try {
        request = json::parse(body);
    } catch (const json::exception&) {
        return error_result(400, "bad_request", "request body is not valid JSON");
    }
    if (!request.is_object()) {
        return error_result(400, "bad_request", "request body must be a JSON object");
    }
    const auto q = request.find("question");
    if (q == request.end() || !q->is_string() || q->get<std::string>().empty()) {
        return error_result(400, "bad_request", "\"question\" must be a non-empty string");
    }
    std::optional<std::size_t> k;
    if (const auto it = request.find("k"); it != request.end() && !it->is_null()) {
        if (!it->is_number_integer() || it->get<long long>() < 1) {
            return error_result(400, "bad_request", "\"k\" must be a positive integer");
        }
        k = it->get<std::size_t>();
    }
    try {
        const auto response = engine.query(q->get<std::string>(), k);
        const int status = response.error ? 503 : 200;
        auto j = query_response_json(response);
        if (response.error) {
            j["error"] = {{"code", to_string(ErrorCode::LlmUnavailable)}, {"message", *response.error}};
        }
        return {status, j.dump()};
    } catch (const Error& e) {
        return error_result(500, to_string(e.code()), e.what());
    } catch (const std::exception& e) {
        return error_result(500, "internal", e.what());
    }
}

struct Service::Impl {
    const Engine& engine;
    httplib::Server server;

    explicit Impl(const Engine& e) : engine(e) {
        server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
            const auto r = handle_health(engine);
            res.status = r.status;
            res.set_content(r.body, "application/json");
        });
        server.Post("/v1/query", [this](const httplib::Request& req, httplib::Response& res) {
            const auto r = handle_query(engine, req.body);
            res.status = r.status;
            res.set_content(r.body, "application/json");
        });
        server.set_exception_handler(
            [](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
                const auto r = error_result(500, "internal", "unhandled server error");
                res.status = r.status;
                res.set_content(r.body, "application/json");
            });
    }
};

Service::Service(const Engine& engine) : impl_(std::make_unique<Impl>(engine)) {}

Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
    if (port == 0) {
        return impl_->server.bind_to_any_port(host);
    }
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

int run_service(const AppConfig& config, std::ostream& out, std::ostream& err,
                HttpTransport& transport) {
    try {
        const auto addr = parse_listen_addr(config.listen_addr);
        const Engine engine(config, transport);
        Service service(engine);
        const int port = service.bind(addr.host, addr.port);
        if (port < 0) {
            err << "error: cannot bind " << config.listen_addr << "\n";
            return 1;
        }
        out << "listening on " << addr.host << ":" << port << " (" << engine.index().size()
            << " chunks)" << std::endl;
        g_active = &service;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        service.listen_after_bind();
        g_active = nullptr;
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace jurirag
