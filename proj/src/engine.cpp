#include "jurirag/engine.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>

#include "jurirag/chunker.hpp"
#include "jurirag/error.hpp"
#include "jurirag/file_io.hpp"

namespace jurirag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool truthy(std::string_view v) {
    std::string s(v);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s == "1" || s == "true" || s == "yes" || s == "on";
}

void apply_client_file(LlmClientConfig& c, const json& j) {
    if (j.contains("endpoint")) c.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("model")) c.model_name = j.at("model").get<std::string>();
    if (j.contains("timeout_ms")) c.timeout = std::chrono::milliseconds(j.at("timeout_ms").get<long>());
    if (j.contains("temperature")) c.temperature = j.at("temperature").get<double>();
    if (j.contains("max_tokens")) c.max_tokens = j.at("max_tokens").get<int>();
}

void apply_config_file(AppConfig& config, const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, "config file " + path.string() + ": " + e.what());
    }
    try {
        if (j.contains("manifest")) config.manifest_path = j.at("manifest").get<std::string>();
        if (j.contains("index")) config.index_path = j.at("index").get<std::string>();
        if (j.contains("addr")) config.listen_addr = j.at("addr").get<std::string>();
        if (j.contains("offline")) config.offline = j.at("offline").get<bool>();
        if (j.contains("pipeline")) {
            const auto& p = j.at("pipeline");
            auto& c = config.pipeline;
            if (p.contains("k")) c.k = p.at("k").get<std::size_t>();
            if (p.contains("over_retrieval_factor"))
                c.over_retrieval_factor = p.at("over_retrieval_factor").get<std::size_t>();
            if (p.contains("boost_enacted")) c.boost_enacted = p.at("boost_enacted").get<double>();
            if (p.contains("boost_proposed")) c.boost_proposed = p.at("boost_proposed").get<double>();
            if (p.contains("boost_name_mention"))
                c.boost_name_mention = p.at("boost_name_mention").get<double>();
        }
        if (j.contains("embedder")) {
            const auto& e = j.at("embedder");
            auto& c = config.embedder;
            if (e.contains("endpoint")) c.remote_endpoint = e.at("endpoint").get<std::string>();
            if (e.contains("dim")) c.dim = e.at("dim").get<std::size_t>();
            if (e.contains("batch_size")) c.batch_size = e.at("batch_size").get<std::size_t>();
            if (e.contains("seed")) c.seed = e.at("seed").get<std::uint64_t>();
        }
        if (j.contains("llm")) apply_client_file(config.llm, j.at("llm"));
        if (j.contains("judge")) apply_client_file(config.judge, j.at("judge"));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, "config file " + path.string() + ": " + e.what());
    }
}

json optional_string(const std::optional<std::string>& s) {
    return s ? json(*s) : json(nullptr);
}

json context_json(const ScoredChunk& c) {
    return json{{"chunk_id", c.chunk.chunk_id},
                {"doc_id", c.chunk.doc_id},
                {"entity", c.chunk.entity},
                {"title", c.chunk.title},
                {"year", c.chunk.year},
                {"status", to_string(c.chunk.status)},
                {"structural_ref", optional_string(c.chunk.structural_ref)},
                {"score", c.score},
                {"text", c.chunk.text}};
}

void print_contexts(std::ostream& out, const RetrievalResult& r) {
    out << "Retrieved contexts (" << to_string(r.analysis.route) << "):\n";
    for (std::size_t i = 0; i < r.contexts.size(); ++i) {
        const auto& c = r.contexts[i].chunk;
        out << "[" << i + 1 << "] " << c.chunk_id << " (" << c.entity << ", score "
            << r.contexts[i].score << ")\n";
    }
}

}  // namespace

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str())) {
            return std::string(v);
        }
        return std::nullopt;
    };
}

AppConfig resolve_config(const ConfigOverrides& flags, const EnvLookup& env) {
    AppConfig config;
    config.llm.api_key_env = "LLM_API_KEY";
    config.judge.api_key_env = "JUDGE_API_KEY";

    if (flags.config_file) {
        apply_config_file(config, *flags.config_file);
    }

    if (auto v = env("EMBED_ENDPOINT")) config.embedder.remote_endpoint = *v;
    if (auto v = env("EMBED_API_KEY")) config.embedder.api_key = *v;
    if (auto v = env("LLM_ENDPOINT")) config.llm.endpoint = *v;
    if (auto v = env("LLM_MODEL")) config.llm.model_name = *v;
    if (auto v = env("JUDGE_ENDPOINT")) config.judge.endpoint = *v;
    if (auto v = env("JUDGE_MODEL")) config.judge.model_name = *v;
    if (auto v = env("OFFLINE")) config.offline = truthy(*v);

    if (flags.manifest_path) config.manifest_path = *flags.manifest_path;
    if (flags.index_path) config.index_path = *flags.index_path;
    if (flags.k) config.pipeline.k = *flags.k;
    if (flags.listen_addr) config.listen_addr = *flags.listen_addr;
    if (flags.offline) config.offline = true;

    const bool remote = !config.offline && config.embedder.remote_endpoint &&
                        !config.embedder.remote_endpoint->empty();
    config.embedder.backend = remote ? EmbedBackend::remote : EmbedBackend::reference;

    config.pipeline.validate();
    config.embedder.validate();
    config.llm.validate();
    config.judge.validate();
    return config;
}

HostPort parse_listen_addr(std::string_view addr) {
    const auto colon = addr.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == addr.size()) {
        throw Error(ErrorCode::InvalidArgument, "listen address must be host:port");
    }
    HostPort hp;
    hp.host = std::string(addr.substr(0, colon));
    const auto port = addr.substr(colon + 1);
    if (!std::all_of(port.begin(), port.end(), [](unsigned char c) { return std::isdigit(c); }) ||
        port.size() > 5) {
        throw Error(ErrorCode::InvalidArgument, "bad port in listen address");
    }
    hp.port = std::stoi(std::string(port));
    if (hp.port > 65535) {
        throw Error(ErrorCode::InvalidArgument, "bad port in listen address");
    }
    return hp;
}

Engine::Engine(AppConfig config, HttpTransport& transport)
    : config_(std::move(config)), transport_(transport) {
    if (config_.offline) {
        config_.embedder.backend = EmbedBackend::reference;
    }
    corpus_ = load_manifest(config_.manifest_path);
    index_ = load_index(config_.index_path);
    embedder_ = make_embedder(config_.embedder, &transport_);
    if (index_.dim() != embedder_->dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "index dimension " + std::to_string(index_.dim()) +
                        " does not match embedder dimension " + std::to_string(embedder_->dim()));
    }
    if (!config_.offline) {
        llm_ = std::make_unique<CompletionClient>(config_.llm, transport_);
        judge_llm_ = std::make_unique<CompletionClient>(config_.judge, transport_);
    }
    retriever_ = std::make_unique<Retriever>(corpus_, index_, *embedder_, config_.pipeline, llm_.get());
}

RetrievalResult Engine::retrieve(std::string_view question, std::optional<std::size_t> k) const {
    return k ? retriever_->retrieve(question, *k) : retriever_->retrieve(question);
}

SystemResponse Engine::query(std::string_view question, std::optional<std::size_t> k) const {
    SystemResponse response;
    response.retrieval = retrieve(question, k);
    try {
        response.answer = Generator(llm_.get()).answer(response.retrieval);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::LlmUnavailable) {
            throw;
        }
        response.error = e.what();
    }
    return response;
}

std::unique_ptr<Judge> Engine::make_judge() const {
    if (judge_llm_) {
        return std::make_unique<LlmJudge>(*judge_llm_);
    }
    return std::make_unique<StubJudge>();
}

json citation_json(const Citation& c) {
    return json{{"doc_id", c.doc_id},
                {"title", c.title},
                {"entity", c.entity},
                {"year", c.year},
                {"structural_ref", optional_string(c.structural_ref)},
                {"chunk_id", c.chunk_id}};
}

json query_response_json(const SystemResponse& response) {
    const auto& r = response.retrieval;
    json citations = json::array();
    if (response.answer) {
        for (const auto& c : response.answer->citations) {
            citations.push_back(citation_json(c));
        }
    } else {
        for (const auto& c : format_citations(r.contexts)) {
            citations.push_back(citation_json(c));
        }
    }
    json contexts = json::array();
    for (const auto& c : r.contexts) {
        contexts.push_back(context_json(c));
    }
    json j{{"answer", response.answer ? json(response.answer->text) : json(nullptr)},
           {"citations", citations},
           {"route", to_string(r.analysis.route)},
           {"entities", r.analysis.entities},
           {"entities_covered", r.entities_covered},
           {"fallback_applied", to_string(r.fallback_applied)},
           {"coverage_note",
            response.answer ? optional_string(response.answer->coverage_note) : json(nullptr)},
           {"contexts", contexts},
           {"diagnostic", optional_string(r.diagnostic)}};
    if (response.error) {
        j["error"] = *response.error;
    }
    return j;
}

std::string render_response(const SystemResponse& response) {
    std::string out;
    if (response.answer) {
        out += response.answer->text;
        out += "\n";
        if (response.answer->coverage_note) {
            out += "\nNote: " + *response.answer->coverage_note + "\n";
        }
        if (!response.answer->citations.empty()) {
            out += "\nSources:\n";
        }
        for (std::size_t i = 0; i < response.answer->citations.size(); ++i) {
            const auto& c = response.answer->citations[i];
            out += "[" + std::to_string(i + 1) + "] " + c.entity + " — " + c.title + " (" +
                   std::to_string(c.year) + ")";
            if (c.structural_ref) {
                out += ", " + *c.structural_ref;
            }
            out += "  <" + c.chunk_id + ">\n";
        }
    }
    if (response.retrieval.diagnostic) {
        out += "\n(" + *response.retrieval.diagnostic + ")\n";
    }
    return out;
}

int cmd_ingest(const AppConfig& config, std::ostream& out, std::ostream& err,
               HttpTransport& transport) {
    if (!fs::exists(config.manifest_path)) {
        err << "error: manifest not found: " << config.manifest_path.string() << "\n";
        return 2;
    }
    Corpus corpus;
    try {
        corpus = load_manifest(config.manifest_path);
    } catch (const Error& e) {
        switch (e.code()) {
            case ErrorCode::DuplicateId:
            case ErrorCode::UnknownEntity:
            case ErrorCode::UnknownToken:
            case ErrorCode::MissingMarkers:
                err << "validation failed:\n  " << to_string(e.code()) << ": " << e.what() << "\n";
                return 3;
            default:
                err << "error: " << e.what() << "\n";
                return 1;
        }
    }
    const auto violations = validate_corpus(corpus);
    if (!violations.empty()) {
        err << "validation failed:\n";
        for (const auto& v : violations) {
            err << "  " << to_string(v.kind);
            if (!v.doc_id.empty()) err << " [" << v.doc_id << "]";
            err << ": " << v.reason << "\n";
        }
        return 3;
    }
    try {
        auto chunks = chunk_corpus(corpus, ChunkPolicy{});
        std::map<std::string, std::size_t> per_strategy{{"structured", 0}, {"unstructured", 0}};
        for (const auto& c : chunks) {
            const auto* doc = corpus.find(c.doc_id);
            ++per_strategy[std::string(to_string(doc->doc_type))];
        }
        std::vector<std::string> texts;
        texts.reserve(chunks.size());
        for (const auto& c : chunks) texts.push_back(c.text);

        auto embed_config = config.embedder;
        if (config.offline) embed_config.backend = EmbedBackend::reference;
        const auto embedder = make_embedder(embed_config, &transport);
        auto vectors = embedder->embed_batch(texts);
        const auto total = chunks.size();
        const auto index = build_index(std::move(chunks), std::move(vectors));
        if (config.index_path.has_parent_path()) {
            fs::create_directories(config.index_path.parent_path());
        }
        save_index(index, config.index_path);

        out << "documents: " << corpus.documents.size() << "\n";
        out << "chunks: " << total << "\n";
        for (const auto& [strategy, n] : per_strategy) {
            out << "  " << strategy << ": " << n << "\n";
        }
        out << "index: " << vectors_path(config.index_path).string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_query(const AppConfig& config, const std::string& question, std::optional<std::size_t> k,
              bool as_json, std::ostream& out, std::ostream& err, HttpTransport& transport) {
    if (k && *k == 0) {
        err << "usage error: --k must be at least 1\n";
        return 2;
    }
    try {
        const Engine engine(config, transport);
        const auto response = engine.query(question, k);
        if (as_json) {
            out << query_response_json(response).dump(2) << "\n";
        } else if (response.answer) {
            out << render_response(response);
        } else {
            print_contexts(out, response.retrieval);
        }
        if (response.error) {
            err << "error: generator unavailable: " << *response.error << "\n";
            return 4;
        }
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_eval(const AppConfig& config, const fs::path& query_file, const fs::path& report_path,
             std::ostream& out, std::ostream& err, HttpTransport& transport) {
    EvalReport report;
    try {
        const Engine engine(config, transport);
        const auto judge = engine.make_judge();
        const AnswerSystem system = [&engine](const std::string& q) { return engine.query(q); };
        report = run_eval(query_file, system, *judge, engine.embedder());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    try {
        write_report(report, report_path);
    } catch (const std::exception& e) {
        err << "error: cannot write report: " << e.what() << "\n";
        return 5;
    }
    out << render_tables(report);
    return 0;
}

}  // namespace jurirag
