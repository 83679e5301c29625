#include "jurirag/chunker.hpp"

#include "jurirag/error.hpp"
#include "jurirag/utf8.hpp"

namespace jurirag {

namespace {

constexpr std::string_view kPreambleLabel = "Preamble";

struct Unit {
    std::string label;
    std::size_t offset;
    std::u32string text;
};

// Earliest boundary (position just past an occurrence of `sep`) in
// [lo, end) that lies strictly after `start`.
std::optional<std::size_t> earliest_boundary(const std::u32string& s, const std::u32string& sep,
                                             std::size_t start, std::size_t lo, std::size_t end) {
    const auto len = sep.size();
    std::size_t from = lo >= len ? lo - len : 0;
    from = std::max(from, start);
    for (auto pos = s.find(sep, from); pos != std::u32string::npos && pos + len < end;
         pos = s.find(sep, pos + 1)) {
        const auto b = pos + len;
        if (b >= lo && b > start) {
            return b;
        }
    }
    return std::nullopt;
}

std::vector<Unit> structural_units(const Document& doc, const std::u32string& body) {
    if (!doc.structure_markers || doc.structure_markers->empty()) {
        throw Error(ErrorCode::MissingMarkers, "document \"" + doc.id + "\" has no structure markers");
    }
    const auto& markers = *doc.structure_markers;
    for (std::size_t i = 0; i < markers.size(); ++i) {
        if (markers[i].offset >= body.size() || (i > 0 && markers[i].offset <= markers[i - 1].offset)) {
            throw Error(ErrorCode::InvalidArgument,
                        "document \"" + doc.id + "\" has invalid marker \"" + markers[i].label + "\"");
        }
    }

    std::vector<Unit> units;
    if (markers.front().offset > 0) {
        units.push_back({std::string(kPreambleLabel), 0, body.substr(0, markers.front().offset)});
    }
    for (std::size_t i = 0; i < markers.size(); ++i) {
        const auto begin = markers[i].offset;
        const auto end = i + 1 < markers.size() ? markers[i + 1].offset : body.size();
        units.push_back({markers[i].label, begin, body.substr(begin, end - begin)});
    }
    return units;
}

Chunk make_chunk(const Document& doc, std::size_t ordinal, std::size_t offset, std::size_t overlap,
                 std::string text, std::optional<std::string> ref) {
    Chunk c;
    c.chunk_id = doc.id + "#" + std::to_string(ordinal);
    c.doc_id = doc.id;
    c.entity = doc.entity;
    c.title = doc.title;
    c.year = doc.year;
    c.language = doc.language;
    c.status = doc.status;
    c.structural_ref = std::move(ref);
    c.ordinal = ordinal;
    c.offset = offset;
    c.overlap = overlap;
    c.text = std::move(text);
    return c;
}

}  // namespace

void ChunkPolicy::validate() const {
    if (structured_split_overlap_chars == 0 || structured_split_overlap_chars >= structured_max_chars) {
        throw Error(ErrorCode::InvalidArgument, "structured overlap must be in (0, structured_max_chars)");
    }
    if (unstructured_overlap_chars == 0 || unstructured_overlap_chars >= unstructured_chunk_chars) {
        throw Error(ErrorCode::InvalidArgument,
                    "unstructured overlap must be in (0, unstructured_chunk_chars)");
    }
    if (separators.empty() || !separators.back().empty()) {
        throw Error(ErrorCode::InvalidArgument,
                    "separator cascade must end with the empty separator");
    }
}

std::vector<TextSpan> recursive_split(std::string_view text, std::size_t target, std::size_t overlap,
                                      std::span<const std::string> separators, OverlapMode mode) {
    if (target == 0 || overlap >= target) {
        throw Error(ErrorCode::InvalidArgument, "recursive_split requires target > overlap");
    }
    const auto s = utf8::decode(text);
    const auto n = s.size();
    std::vector<TextSpan> spans;
    if (n == 0) {
        return spans;
    }

    std::vector<std::u32string> seps;
    seps.reserve(separators.size());
    for (const auto& sep : separators) {
        seps.push_back(utf8::decode(sep));
    }

    auto emit = [&](std::size_t start, std::size_t end, std::size_t prev_end) {
        const auto shared = prev_end > start ? prev_end - start : 0;
        spans.push_back({start, end - start, shared, utf8::encode(s.substr(start, end - start))});
    };

    std::size_t start = 0;
    std::size_t prev_end = 0;
    while (true) {
        if (n - start <= target) {
            emit(start, n, prev_end);
            break;
        }
        const auto window_end = start + target;
        std::size_t end = window_end;
        const std::u32string* chosen = nullptr;
        for (const auto& sep : seps) {
            if (sep.empty()) {
                break;
            }
            if (sep.size() > target) {
                continue;
            }
            const auto pos = s.rfind(sep, window_end - sep.size());
            if (pos != std::u32string::npos && pos >= start && pos + sep.size() > start + overlap) {
                end = pos + sep.size();
                chosen = &sep;
                break;
            }
        }
        emit(start, end, prev_end);

        std::size_t next = end - overlap;
        if (mode == OverlapMode::boundary && chosen != nullptr) {
            next = earliest_boundary(s, *chosen, start, end - overlap, end).value_or(end);
        }
        prev_end = end;
        start = next;
    }
    return spans;
}

std::vector<Chunk> chunk_structured(const Document& doc, const ChunkPolicy& policy) {
    const auto body = utf8::decode(doc.body);
    std::vector<Chunk> chunks;
    for (auto& unit : structural_units(doc, body)) {
        if (unit.text.size() <= policy.structured_max_chars) {
            chunks.push_back(make_chunk(doc, chunks.size(), unit.offset, 0, utf8::encode(unit.text),
                                        unit.label));
            continue;
        }
        const auto spans = recursive_split(utf8::encode(unit.text), policy.structured_max_chars,
                                           policy.structured_split_overlap_chars, policy.separators,
                                           OverlapMode::exact);
        for (const auto& span : spans) {
            chunks.push_back(make_chunk(doc, chunks.size(), unit.offset + span.offset, span.overlap,
                                        span.text, unit.label));
        }
    }
    return chunks;
}

std::vector<Chunk> chunk_unstructured(const Document& doc, const ChunkPolicy& policy) {
    std::vector<Chunk> chunks;
    const auto spans = recursive_split(doc.body, policy.unstructured_chunk_chars,
                                       policy.unstructured_overlap_chars, policy.separators,
                                       OverlapMode::boundary);
    for (const auto& span : spans) {
        chunks.push_back(make_chunk(doc, chunks.size(), span.offset, span.overlap, span.text,
                                    std::nullopt));
    }
    return chunks;
}

std::vector<Chunk> chunk_document(const Document& doc, const ChunkPolicy& policy) {
    return doc.doc_type == DocType::structured ? chunk_structured(doc, policy)
                                               : chunk_unstructured(doc, policy);
}

std::vector<Chunk> chunk_corpus(const Corpus& corpus, const ChunkPolicy& policy) {
    policy.validate();
    std::vector<Chunk> all;
    for (const auto& doc : corpus.documents) {
        auto chunks = chunk_document(doc, policy);
        all.insert(all.end(), std::make_move_iterator(chunks.begin()),
                   std::make_move_iterator(chunks.end()));
    }
    return all;
}

}  // namespace jurirag
