#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace jurirag {

struct HttpRequest {
    std::string url;
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;
    std::chrono::milliseconds timeout{30000};
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// JSON-over-HTTP POST. Implementations throw Error(Transport) when no
/// response was obtained; non-2xx statuses are returned, not thrown.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib backed client; http:// and https:// URLs.
class HttplibTransport final : public HttpTransport {
public:
    HttpResponse post(const HttpRequest& request) override;
};

/// Forwards to `inner` and counts attempts, including failed ones.
class CountingTransport final : public HttpTransport {
public:
    explicit CountingTransport(HttpTransport& inner) : inner_(inner) {}

    HttpResponse post(const HttpRequest& request) override;
    std::size_t calls() const noexcept { return calls_.load(); }

private:
    HttpTransport& inner_;
    std::atomic<std::size_t> calls_{0};
};

/// Adds `Authorization: Bearer <token>` when the token is non-empty.
void add_bearer(HttpRequest& request, const std::string& token);

}  // namespace jurirag
