#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "jurirag/corpus.hpp"
#include "jurirag/embedder.hpp"
#include "jurirag/evaluator.hpp"
#include "jurirag/generator.hpp"
#include "jurirag/llm_client.hpp"
#include "jurirag/retrieval.hpp"
#include "jurirag/transport.hpp"
#include "jurirag/vector_index.hpp"

namespace jurirag {

struct AppConfig {
    std::filesystem::path manifest_path = "corpus/manifest.jsonl";
    std::filesystem::path index_path = "index/jurirag";
    PipelineConfig pipeline;
    EmbedderConfig embedder;
    LlmClientConfig llm;
    LlmClientConfig judge;
    std::string listen_addr = "127.0.0.1:8080";
    /// No module attempts a network call when set.
    bool offline = false;
};

/// Command-line values; unset fields fall through to env, file, defaults.
struct ConfigOverrides {
    std::optional<std::filesystem::path> config_file;
    std::optional<std::filesystem::path> manifest_path;
    std::optional<std::filesystem::path> index_path;
    std::optional<std::size_t> k;
    std::optional<std::string> listen_addr;
    bool offline = false;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;

EnvLookup process_env();

/// flags > env > config file > defaults.
AppConfig resolve_config(const ConfigOverrides& flags, const EnvLookup& env);

struct HostPort {
    std::string host;
    int port = 0;
};

HostPort parse_listen_addr(std::string_view addr);

/// Loaded corpus + index with the models configured for them. Immutable
/// after construction; retrieve and query may run concurrently.
class Engine {
public:
    Engine(AppConfig config, HttpTransport& transport);
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    const AppConfig& config() const noexcept { return config_; }
    const Corpus& corpus() const noexcept { return corpus_; }
    const Index& index() const noexcept { return index_; }
    const Embedder& embedder() const noexcept { return *embedder_; }

    RetrievalResult retrieve(std::string_view question, std::optional<std::size_t> k = {}) const;

    /// Retrieval always completes; an unavailable generator leaves `answer`
    /// empty and sets `error`.
    SystemResponse query(std::string_view question, std::optional<std::size_t> k = {}) const;

    /// Stub judge offline, LLM judge otherwise.
    std::unique_ptr<Judge> make_judge() const;

private:
    AppConfig config_;
    HttpTransport& transport_;
    Corpus corpus_;
    Index index_;
    std::unique_ptr<Embedder> embedder_;
    std::unique_ptr<CompletionClient> llm_;
    std::unique_ptr<CompletionClient> judge_llm_;
    std::unique_ptr<Retriever> retriever_;
};

nlohmann::json citation_json(const Citation& citation);
nlohmann::json query_response_json(const SystemResponse& response);

/// Human-readable answer with numbered sources.
std::string render_response(const SystemResponse& response);

int cmd_ingest(const AppConfig& config, std::ostream& out, std::ostream& err,
               HttpTransport& transport);
int cmd_query(const AppConfig& config, const std::string& question, std::optional<std::size_t> k,
              bool json, std::ostream& out, std::ostream& err, HttpTransport& transport);
int cmd_eval(const AppConfig& config, const std::filesystem::path& query_file,
             const std::filesystem::path& report_path, std::ostream& out, std::ostream& err,
             HttpTransport& transport);

}  // namespace jurirag
