#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "jurirag/chunker.hpp"
#include "jurirag/embedder.hpp"

namespace jurirag {

/// Lower is better. Starts as the squared L2 distance to the query.
struct ScoredChunk {
    Chunk chunk;
    double score = 0.0;
};

struct MetadataFilter {
    std::optional<std::set<std::string>> entities;
    std::optional<std::set<Status>> statuses;
    std::optional<std::string> title;
    std::optional<std::string> structural_ref;

    bool empty() const noexcept;
    bool matches(const Chunk& chunk) const;
};

/// Per-call instrumentation.
struct SearchStats {
    std::size_t distance_computations = 0;
};

/// Exhaustive L2 index: a row-major float matrix aligned row-for-row with
/// its docstore. Immutable after construction; concurrent searches are safe.
class Index {
public:
    Index() = default;

    std::size_t size() const noexcept { return chunks_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return chunks_.empty(); }

    const std::vector<Chunk>& chunks() const noexcept { return chunks_; }
    std::span<const float> row(std::size_t i) const;

private:
    friend Index build_index(std::vector<Chunk> chunks, std::vector<Vector> vectors);
    friend Index load_index(const std::filesystem::path& base);

    std::size_t dim_ = 0;
    std::vector<float> data_;
    std::vector<Chunk> chunks_;
};

/// Errors: LengthMismatch, DimensionMismatch, Unnormalized (|norm - 1| > 1e-4).
Index build_index(std::vector<Chunk> chunks, std::vector<Vector> vectors);

double squared_l2(std::span<const float> a, std::span<const float> b);

/// The min(fetch_k, matching rows) nearest rows by squared L2, ascending,
/// ties broken by (doc_id, ordinal). The filter is applied before
/// truncation.
std::vector<ScoredChunk> search(const Index& index, std::span<const float> query,
                                std::size_t fetch_k, const MetadataFilter* filter = nullptr,
                                SearchStats* stats = nullptr);

/// Pure metadata scan ordered by (doc_id, ordinal). Requires a non-empty filter.
std::vector<Chunk> lookup_by_metadata(const Index& index, const MetadataFilter& filter);

std::filesystem::path vectors_path(const std::filesystem::path& base);
std::filesystem::path docstore_path(const std::filesystem::path& base);

/// Writes `<base>.jrix` and `<base>.chunks.jsonl` together, atomically.
///
/// .jrix layout, little-endian:
///   magic "JRIX" | version u16 | dim u32 | rows u64 | rows*dim float32, row-major
void save_index(const Index& index, const std::filesystem::path& base);
Index load_index(const std::filesystem::path& base);

}  // namespace jurirag
