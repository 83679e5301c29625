#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jurirag/corpus.hpp"

namespace jurirag {

/// How the start of each follow-on span is placed.
///  - exact: start exactly `overlap` characters before the previous end.
///  - boundary: start at the earliest occurrence of the separator that
///    produced the previous end within the trailing `overlap` characters;
///    no overlap if none exists. Character-level splits stay exact.
enum class OverlapMode { exact, boundary };

struct ChunkPolicy {
    std::size_t structured_max_chars = 2000;
    std::size_t structured_split_overlap_chars = 100;
    std::size_t unstructured_chunk_chars = 1000;
    std::size_t unstructured_overlap_chars = 200;
    std::vector<std::string> separators{"\n\n", "\n", ". ", " ", ""};

    /// Throws Error(InvalidArgument) if an overlap is not in (0, size) or the
    /// separator cascade does not end in the empty (character-level) separator.
    void validate() const;
};

/// A slice of the input; `offset`, `length` and `overlap` are in Unicode
/// scalar values. `overlap` is how many leading characters repeat the tail of
/// the previous span.
struct TextSpan {
    std::size_t offset = 0;
    std::size_t length = 0;
    std::size_t overlap = 0;
    std::string text;
};

/// Greedy hierarchical splitter shared by both chunking strategies. Each span
/// ends at the last occurrence, inside the `target` window, of the
/// highest-priority separator whose boundary leaves the span longer than
/// `overlap`; the empty separator falls back to a hard cut at `target`.
/// Requires target > overlap.
std::vector<TextSpan> recursive_split(std::string_view text, std::size_t target,
                                      std::size_t overlap,
                                      std::span<const std::string> separators,
                                      OverlapMode mode = OverlapMode::boundary);

struct Chunk {
    std::string chunk_id;
    std::string doc_id;
    std::string entity;
    std::string title;
    int year = 0;
    std::string language;
    Status status = Status::other;
    std::optional<std::string> structural_ref;
    std::size_t ordinal = 0;
    /// Position of the chunk in the source body (scalar values).
    std::size_t offset = 0;
    /// Leading characters shared with the previous chunk of the same unit.
    std::size_t overlap = 0;
    std::string text;

    bool operator==(const Chunk&) const = default;
};

std::vector<Chunk> chunk_structured(const Document& doc, const ChunkPolicy& policy);
std::vector<Chunk> chunk_unstructured(const Document& doc, const ChunkPolicy& policy);

/// Dispatches on doc_type.
std::vector<Chunk> chunk_document(const Document& doc, const ChunkPolicy& policy);
std::vector<Chunk> chunk_corpus(const Corpus& corpus, const ChunkPolicy& policy);

}  // namespace jurirag
