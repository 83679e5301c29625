#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jurirag/transport.hpp"

namespace jurirag {

using Vector = std::vector<float>;

enum class EmbedBackend { reference, remote };

struct EmbedderConfig {
    std::size_t dim = 768;
    EmbedBackend backend = EmbedBackend::reference;
    std::optional<std::string> remote_endpoint;
    std::string api_key;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const;
};

/// v / ||v||, computed in double. Throws Error(ZeroVector).
Vector l2_normalize(std::span<const float> v);

double dot(std::span<const float> a, std::span<const float> b);
double l2_norm(std::span<const float> v);

/// Offline stand-in for the embedding model: feature hashing of
/// whitespace tokens (ASCII-lowercased, edge punctuation trimmed) into
/// signed buckets. Counts are integers, so token order cannot change a
/// single bit of the output.
Vector reference_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

/// Every backend returns unit-norm vectors in input order; normalization is
/// applied here regardless of what the backend produced.
class Embedder {
public:
    virtual ~Embedder() = default;

    std::vector<Vector> embed_batch(std::span<const std::string> texts) const;
    Vector embed(std::string_view text) const;

    virtual std::size_t dim() const = 0;

protected:
    /// Raw (possibly unnormalized) vectors for non-empty texts.
    virtual std::vector<Vector> embed_raw(std::span<const std::string> texts) const = 0;
};

class ReferenceEmbedder final : public Embedder {
public:
    ReferenceEmbedder(std::size_t dim, std::uint64_t seed);

    std::size_t dim() const override { return dim_; }

protected:
    std::vector<Vector> embed_raw(std::span<const std::string> texts) const override;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

/// POSTs {"texts": [...]} and expects {"vectors": [[...], ...]}, in
/// sequential batches of batch_size. Transport failures, non-2xx statuses
/// and dimension mismatches surface as Transport, HttpStatus and
/// DimensionMismatch respectively.
class RemoteEmbedder final : public Embedder {
public:
    RemoteEmbedder(EmbedderConfig config, HttpTransport& transport);

    std::size_t dim() const override { return config_.dim; }

protected:
    std::vector<Vector> embed_raw(std::span<const std::string> texts) const override;

private:
    EmbedderConfig config_;
    HttpTransport& transport_;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config, HttpTransport* transport);

std::vector<Vector> embed_batch(std::span<const std::string> texts, const EmbedderConfig& config,
                                HttpTransport* transport = nullptr);

}  // namespace jurirag
