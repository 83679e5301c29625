#include "jurirag/vector_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <queue>
#include <tuple>

#include <nlohmann/json.hpp>

#include "jurirag/chunk_store.hpp"
#include "jurirag/error.hpp"
#include "jurirag/file_io.hpp"

namespace jurirag {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'J', 'R', 'I', 'X'};
constexpr std::uint16_t kVersion = 1;
constexpr double kNormTolerance = 1e-4;

template <typename T>
void put_le(std::ostream& out, T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(std::begin(bytes), std::end(bytes));
    }
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const fs::path& path) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
        throw Error(ErrorCode::BadFormat, "truncated index file: " + path.string());
    }
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(std::begin(bytes), std::end(bytes));
    }
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

bool ranks_before(const ScoredChunk& a, const ScoredChunk& b) {
    return std::tie(a.score, a.chunk.doc_id, a.chunk.ordinal) <
           std::tie(b.score, b.chunk.doc_id, b.chunk.ordinal);
}

}  // namespace

bool MetadataFilter::empty() const noexcept {
    return !entities && !statuses && !title && !structural_ref;
}

bool MetadataFilter::matches(const Chunk& chunk) const {
    if (entities && entities->count(chunk.entity) == 0) return false;
    if (statuses && statuses->count(chunk.status) == 0) return false;
    if (title && chunk.title != *title) return false;
    if (structural_ref && chunk.structural_ref != *structural_ref) return false;
    return true;
}

std::span<const float> Index::row(std::size_t i) const {
    return std::span<const float>(data_).subspan(i * dim_, dim_);
}

Index build_index(std::vector<Chunk> chunks, std::vector<Vector> vectors) {
    if (chunks.size() != vectors.size()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(chunks.size()) + " chunks but " +
                                                   std::to_string(vectors.size()) + " vectors");
    }
    Index index;
    if (vectors.empty()) {
        return index;
    }
    index.dim_ = vectors.front().size();
    if (index.dim_ == 0) {
        throw Error(ErrorCode::DimensionMismatch, "vectors have zero dimension");
    }
    index.data_.reserve(vectors.size() * index.dim_);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const auto& v = vectors[i];
        if (v.size() != index.dim_) {
            throw Error(ErrorCode::DimensionMismatch,
                        "vector " + std::to_string(i) + " has dim " + std::to_string(v.size()) +
                            ", expected " + std::to_string(index.dim_));
        }
        if (std::abs(l2_norm(v) - 1.0) > kNormTolerance) {
            throw Error(ErrorCode::Unnormalized, "vector " + std::to_string(i) + " is not unit-norm");
        }
        index.data_.insert(index.data_.end(), v.begin(), v.end());
    }
    index.chunks_ = std::move(chunks);
    return index;
}

double squared_l2(std::span<const float> a, std::span<const float> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        sum += d * d;
    }
    return sum;
}

std::vector<ScoredChunk> search(const Index& index, std::span<const float> query,
                                std::size_t fetch_k, const MetadataFilter* filter,
                                SearchStats* stats) {
    if (index.empty() || fetch_k == 0) {
        return {};
    }
    if (query.size() != index.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "query has dim " + std::to_string(query.size()) + ", index has " +
                        std::to_string(index.dim()));
    }

    // Bounded max-heap on (score, doc_id, ordinal): the top is the worst kept row.
    struct Entry {
        double score;
        std::size_t row;
    };
    const auto& chunks = index.chunks();
    auto worse = [&chunks](const Entry& a, const Entry& b) {
        return std::tie(a.score, chunks[a.row].doc_id, chunks[a.row].ordinal) <
               std::tie(b.score, chunks[b.row].doc_id, chunks[b.row].ordinal);
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);

    std::size_t computed = 0;
    for (std::size_t r = 0; r < index.size(); ++r) {
        if (filter != nullptr && !filter->matches(chunks[r])) {
            continue;
        }
        const Entry entry{squared_l2(query, index.row(r)), r};
        ++computed;
        if (heap.size() < fetch_k) {
            heap.push(entry);
        } else if (worse(entry, heap.top())) {
            heap.pop();
            heap.push(entry);
        }
    }
    if (stats != nullptr) {
        stats->distance_computations += computed;
    }

    std::vector<ScoredChunk> out;
    out.reserve(heap.size());
    while (!heap.empty()) {
        out.push_back({chunks[heap.top().row], heap.top().score});
        heap.pop();
    }
    std::sort(out.begin(), out.end(), ranks_before);
    return out;
}

std::vector<Chunk> lookup_by_metadata(const Index& index, const MetadataFilter& filter) {
    if (filter.empty()) {
        throw Error(ErrorCode::InvalidArgument, "metadata lookup needs at least one filter field");
    }
    std::vector<Chunk> out;
    for (const auto& chunk : index.chunks()) {
        if (filter.matches(chunk)) {
            out.push_back(chunk);
        }
    }
    std::sort(out.begin(), out.end(), [](const Chunk& a, const Chunk& b) {
        return std::tie(a.doc_id, a.ordinal) < std::tie(b.doc_id, b.ordinal);
    });
    return out;
}

fs::path vectors_path(const fs::path& base) {
    return fs::path(base.string() + ".jrix");
}

fs::path docstore_path(const fs::path& base) {
    return fs::path(base.string() + ".chunks.jsonl");
}

void save_index(const Index& index, const fs::path& base) {
    const auto rows = static_cast<std::uint64_t>(index.size());
    const auto dim = static_cast<std::uint32_t>(index.dim());
    std::vector<PendingFile> files;
    files.push_back({vectors_path(base), [&index, rows, dim](std::ostream& out) {
                         out.write(kMagic, sizeof(kMagic));
                         put_le(out, kVersion);
                         put_le(out, dim);
                         put_le(out, rows);
                         for (std::size_t r = 0; r < index.size(); ++r) {
                             for (float f : index.row(r)) {
                                 put_le(out, f);
                             }
                         }
                     }});
    files.push_back({docstore_path(base), [&index](std::ostream& out) {
                         for (const auto& chunk : index.chunks()) {
                             out << nlohmann::json(chunk).dump() << '\n';
                         }
                     }});
    write_files_atomic(files);
}

Index load_index(const fs::path& base) {
    const auto vpath = vectors_path(base);
    std::ifstream in(vpath, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "index not found: " + vpath.string());
    }
    char magic[4];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw Error(ErrorCode::BadFormat, "bad index magic: " + vpath.string());
    }
    const auto version = get_le<std::uint16_t>(in, vpath);
    if (version != kVersion) {
        throw Error(ErrorCode::BadFormat, "unsupported index version " + std::to_string(version));
    }
    const auto dim = get_le<std::uint32_t>(in, vpath);
    const auto rows = get_le<std::uint64_t>(in, vpath);
    if (rows > 0 && dim == 0) {
        throw Error(ErrorCode::BadFormat, "index declares rows with zero dimension");
    }

    const auto body_start = in.tellg();
    in.seekg(0, std::ios::end);
    const auto body_bytes = static_cast<std::uint64_t>(in.tellg() - body_start);
    in.seekg(body_start);
    if (dim != 0 && rows > body_bytes / (sizeof(float) * dim)) {
        throw Error(ErrorCode::BadFormat, "truncated index file: " + vpath.string());
    }

    Index index;
    index.dim_ = dim;
    index.data_.resize(static_cast<std::size_t>(rows) * dim);
    for (auto& f : index.data_) {
        f = get_le<float>(in, vpath);
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw Error(ErrorCode::BadFormat, "trailing bytes in index file: " + vpath.string());
    }
    index.chunks_ = read_chunk_store(docstore_path(base));
    if (index.chunks_.size() != rows) {
        throw Error(ErrorCode::BadFormat, "docstore has " + std::to_string(index.chunks_.size()) +
                                              " chunks but index has " + std::to_string(rows) +
                                              " rows");
    }
    return index;
}

}  // namespace jurirag
