#include "jurirag/transport.hpp"

#include <httplib.h>

#include "jurirag/error.hpp"

namespace jurirag {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::Transport, "URL must include a scheme: " + url);
    }
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw Error(ErrorCode::Transport, "unsupported URL scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpResponse HttplibTransport::post(const HttpRequest& request) {
    const auto [origin, path] = split_url(request.url);
    httplib::Client client(origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    for (const auto& [name, value] : request.headers) {
        headers.emplace(name, value);
    }
    auto result = client.Post(path, headers, request.body, "application/json");
    if (!result) {
        throw Error(ErrorCode::Transport,
                    "request to " + request.url + " failed: " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
}

HttpResponse CountingTransport::post(const HttpRequest& request) {
    ++calls_;
    return inner_.post(request);
}

void add_bearer(HttpRequest& request, const std::string& token) {
    if (!token.empty()) {
        request.headers.emplace_back("Authorization", "Bearer " + token);
    }
}

}  // namespace jurirag
