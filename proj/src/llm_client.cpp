#include "jurirag/llm_client.hpp"

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "jurirag/error.hpp"

namespace jurirag {

using nlohmann::json;

void LlmClientConfig::validate() const {
    if (timeout.count() <= 0) {
        throw Error(ErrorCode::InvalidArgument, "LLM timeout must be positive");
    }
    if (temperature < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "LLM temperature must be non-negative");
    }
}

CompletionClient::CompletionClient(LlmClientConfig config, HttpTransport& transport)
    : config_(std::move(config)), transport_(transport) {
    config_.validate();
}

std::string CompletionClient::complete(std::string_view prompt) const {
    if (config_.endpoint.empty()) {
        throw Error(ErrorCode::LlmUnavailable, "no completion endpoint configured");
    }
    json body{{"model", config_.model_name},
              {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
              {"temperature", config_.temperature}};
    if (config_.max_tokens) {
        body["max_tokens"] = *config_.max_tokens;
    }

    HttpRequest request;
    request.url = config_.endpoint;
    request.body = body.dump();
    request.timeout = config_.timeout;
    if (!config_.api_key_env.empty()) {
        if (const char* token = std::getenv(config_.api_key_env.c_str())) {
            add_bearer(request, token);
        }
    }

    HttpResponse response;
    try {
        response = transport_.post(request);
    } catch (const Error& e) {
        throw Error(ErrorCode::LlmUnavailable, e.what());
    }
    if (response.status < 200 || response.status >= 300) {
        throw Error(ErrorCode::LlmUnavailable,
                    "completion endpoint returned status " + std::to_string(response.status));
    }
    try {
        const auto parsed = json::parse(response.body);
        const auto& choice = parsed.at("choices").at(0);
        if (const auto msg = choice.find("message"); msg != choice.end()) {
            return msg->at("content").get<std::string>();
        }
        return choice.at("text").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::LlmUnavailable, std::string("unreadable completion response: ") + e.what());
    }
}

}  // namespace jurirag
