#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

#include "jurirag/transport.hpp"

namespace jurirag {

struct LlmClientConfig {
    std::string endpoint;
    std::string model_name;
    /// Name of the environment variable holding the bearer token.
    std::string api_key_env;
    std::chrono::milliseconds timeout{60000};
    double temperature = 0.0;
    std::optional<int> max_tokens;

    void validate() const;
};

/// Text completion. Implementations throw Error(LlmUnavailable) when no
/// completion can be obtained.
class CompletionModel {
public:
    virtual ~CompletionModel() = default;
    virtual std::string complete(std::string_view prompt) const = 0;
};

/// Chat-completions style client:
///   POST {"model", "messages": [{"role": "user", "content": prompt}], "temperature"}
/// and reads choices[0].message.content (choices[0].text also accepted).
class CompletionClient final : public CompletionModel {
public:
    CompletionClient(LlmClientConfig config, HttpTransport& transport);

    std::string complete(std::string_view prompt) const override;
    const LlmClientConfig& config() const noexcept { return config_; }

private:
    LlmClientConfig config_;
    HttpTransport& transport_;
};

}  // namespace jurirag
