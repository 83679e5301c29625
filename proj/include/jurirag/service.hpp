#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "jurirag/engine.hpp"

namespace jurirag {

struct HttpResult {
    int status = 200;
    std::string body;  // JSON
};

HttpResult handle_health(const Engine& engine);

/// Body `{"question": str, "k": int?}`. Bad input yields 400 with
/// `{"error": {"code", "message"}}`; an unavailable generator yields 503
/// with the retrieval fields still filled in.
HttpResult handle_query(const Engine& engine, std::string_view body);

/// HTTP front end over a shared Engine.
class Service {
public:
    explicit Service(const Engine& engine);
    ~Service();

    /// Binds `host:port`; port 0 picks a free one. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    /// Blocks serving requests until stop().
    bool listen_after_bind();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

int run_service(const AppConfig& config, std::ostream& out, std::ostream& err,
                HttpTransport& transport);

}  // namespace jurirag
