#include "jurirag/embedder.hpp"

#include <cctype>
#include <cmath>

#include <nlohmann/json.hpp>

#include "jurirag/error.hpp"

namespace jurirag {

using nlohmann::json;

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t token_hash(std::string_view token, std::uint64_t seed) {
    std::uint64_t h = kFnvOffset;
    for (int i = 0; i < 8; ++i) {
        h ^= (seed >> (8 * i)) & 0xFF;
        h *= kFnvPrime;
    }
    for (unsigned char c : token) {
        h ^= c;
        h *= kFnvPrime;
    }
    return mix64(h);
}

bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(char c) {
    return static_cast<unsigned char>(c) < 0x80 && std::ispunct(static_cast<unsigned char>(c));
}

std::string normalize_token(std::string_view raw) {
    std::size_t b = 0;
    std::size_t e = raw.size();
    while (b < e && is_ascii_punct(raw[b])) ++b;
    while (e > b && is_ascii_punct(raw[e - 1])) --e;
    auto core = b < e ? raw.substr(b, e - b) : raw;
    if (core.size() > 2 && core.substr(core.size() - 2) == "'s") {
        core.remove_suffix(2);
    }
    std::string out(core);
    for (auto& c : out) {
        if (static_cast<unsigned char>(c) < 0x80) {
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    return out;
}

}  // namespace

void EmbedderConfig::validate() const {
    if (dim == 0) {
        throw Error(ErrorCode::InvalidArgument, "embedding dim must be positive");
    }
    if (batch_size == 0) {
        throw Error(ErrorCode::InvalidArgument, "embedding batch_size must be positive");
    }
    if (backend == EmbedBackend::remote && (!remote_endpoint || remote_endpoint->empty())) {
        throw Error(ErrorCode::InvalidArgument, "remote embedder requires an endpoint");
    }
}

double dot(std::span<const float> a, std::span<const float> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return sum;
}

double l2_norm(std::span<const float> v) {
    return std::sqrt(dot(v, v));
}

Vector l2_normalize(std::span<const float> v) {
    const double norm = l2_norm(v);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw Error(ErrorCode::ZeroVector, "cannot normalize a zero or non-finite vector");
    }
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = static_cast<float>(static_cast<double>(v[i]) / norm);
    }
    return out;
}

Vector reference_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
    if (dim == 0) {
        throw Error(ErrorCode::InvalidArgument, "embedding dim must be positive");
    }
    std::vector<std::int64_t> counts(dim, 0);
    bool any = false;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_ascii_space(text[i])) ++i;
        const auto start = i;
        while (i < text.size() && !is_ascii_space(text[i])) ++i;
        if (i == start) {
            break;
        }
        const auto token = normalize_token(text.substr(start, i - start));
        const auto h = token_hash(token, seed);
        counts[h % dim] += (h >> 63) ? -1 : 1;
        any = true;
    }
    if (!any) {
        throw Error(ErrorCode::ZeroVector, "text has no tokens");
    }
    Vector raw(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        raw[d] = static_cast<float>(counts[d]);
    }
    return l2_normalize(raw);
}

std::vector<Vector> Embedder::embed_batch(std::span<const std::string> texts) const {
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (texts[i].empty()) {
            throw Error(ErrorCode::EmptyText, "text " + std::to_string(i) + " is empty");
        }
    }
    auto raw = embed_raw(texts);
    std::vector<Vector> out;
    out.reserve(raw.size());
    for (const auto& v : raw) {
        out.push_back(l2_normalize(v));
    }
    return out;
}

Vector Embedder::embed(std::string_view text) const {
    const std::string owned(text);
    return embed_batch(std::span<const std::string>(&owned, 1)).front();
}

ReferenceEmbedder::ReferenceEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim_ == 0) {
        throw Error(ErrorCode::InvalidArgument, "embedding dim must be positive");
    }
}

std::vector<Vector> ReferenceEmbedder::embed_raw(std::span<const std::string> texts) const {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        out.push_back(reference_embed(text, dim_, seed_));
    }
    return out;
}

RemoteEmbedder::RemoteEmbedder(EmbedderConfig config, HttpTransport& transport)
    : config_(std::move(config)), transport_(transport) {
    config_.backend = EmbedBackend::remote;
    config_.validate();
}

std::vector<Vector> RemoteEmbedder::embed_raw(std::span<const std::string> texts) const {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (std::size_t begin = 0; begin < texts.size(); begin += config_.batch_size) {
        const auto batch = texts.subspan(begin, std::min(config_.batch_size, texts.size() - begin));

        HttpRequest request;
        request.url = *config_.remote_endpoint;
        request.body = json{{"texts", std::vector<std::string>(batch.begin(), batch.end())}}.dump();
        request.headers.emplace_back("Content-Type", "application/json");
        add_bearer(request, config_.api_key);

        const auto response = transport_.post(request);
        if (response.status < 200 || response.status >= 300) {
            throw Error(ErrorCode::HttpStatus,
                        "embedding service returned status " + std::to_string(response.status));
        }
        std::vector<Vector> vectors;
        try {
            vectors = json::parse(response.body).at("vectors").get<std::vector<Vector>>();
        } catch (const json::exception& e) {
            throw Error(ErrorCode::BadFormat, std::string("embedding response: ") + e.what());
        }
        if (vectors.size() != batch.size()) {
            throw Error(ErrorCode::LengthMismatch,
                        "embedding service returned " + std::to_string(vectors.size()) +
                            " vectors for " + std::to_string(batch.size()) + " texts");
        }
        for (auto& v : vectors) {
            if (v.size() != config_.dim) {
                throw Error(ErrorCode::DimensionMismatch,
                            "embedding service returned dim " + std::to_string(v.size()) +
                                ", expected " + std::to_string(config_.dim));
            }
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config, HttpTransport* transport) {
    config.validate();
    if (config.backend == EmbedBackend::remote) {
        if (transport == nullptr) {
            throw Error(ErrorCode::InvalidArgument, "remote embedder requires a transport");
        }
        return std::make_unique<RemoteEmbedder>(config, *transport);
    }
    return std::make_unique<ReferenceEmbedder>(config.dim, config.seed);
}

std::vector<Vector> embed_batch(std::span<const std::string> texts, const EmbedderConfig& config,
                                HttpTransport* transport) {
    return make_embedder(config, transport)->embed_batch(texts);
}

}  // namespace jurirag
