#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace jurirag {

// Closed vocabulary; `other` absorbs anything the boosting rules do not
// need to distinguish.
enum class Status { enacted, proposed, draft, strategy, policy, white_paper, other };
enum class DocType { structured, unstructured };

std::string_view to_string(Status status) noexcept;
std::string_view to_string(DocType type) noexcept;
std::optional<Status> parse_status(std::string_view token);
std::optional<DocType> parse_doc_type(std::string_view token);

/// Start of an article/section. `offset` counts Unicode scalar values.
struct StructureMarker {
    std::string label;
    std::size_t offset = 0;

    bool operator==(const StructureMarker&) const = default;
};

struct Document {
    std::string id;
    std::string entity;
    std::string region;
    std::string title;
    int year = 0;
    std::string language;
    Status status = Status::other;
    DocType doc_type = DocType::unstructured;
    std::string body;
    std::optional<std::vector<StructureMarker>> structure_markers;
    /// Registered short names ("GDPR") used for mention and article-hint matching.
    std::vector<std::string> short_names;
    /// Body file, relative to the manifest directory.
    std::string path;

    bool operator==(const Document&) const = default;
};

struct EntityRegistry {
    std::vector<std::string> entities;
    std::map<std::string, std::string> aliases;
    std::set<std::string> eu_member_states;
    std::string eu_entity;

    bool contains(std::string_view entity) const;
    bool is_eu_member(std::string_view entity) const;

    bool operator==(const EntityRegistry&) const = default;
};

/// Immutable once loaded; safe for concurrent readers.
struct Corpus {
    std::vector<Document> documents;
    EntityRegistry registry;

    const Document* find(std::string_view id) const;

    bool operator==(const Corpus&) const = default;
};

enum class ViolationKind {
    EmptyId,
    DuplicateId,
    YearOutOfRange,
    UnknownEntity,
    MissingMarkers,
    NonMonotonicMarkers,
    MarkerOutOfRange,
    AliasTargetUnknown,
    EuMemberUnknown,
    EuEntityUnknown,
};

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
    ViolationKind kind;
    std::string doc_id;  // empty for registry-level violations
    std::string reason;
};

using ValidationReport = std::vector<Violation>;

/// Reports every invariant violation; never throws and never mutates.
ValidationReport validate_corpus(const Corpus& corpus);

/// Reads a line-delimited manifest: a registry record followed by one record
/// per document. Body paths resolve relative to the manifest's directory.
Corpus load_manifest(const std::filesystem::path& manifest_path);

/// Writes the manifest and every body file (at `Document::path`, or `<id>.txt`
/// when empty) so that load_manifest reproduces the corpus.
void save_manifest(const Corpus& corpus, const std::filesystem::path& manifest_path);

}  // namespace jurirag
