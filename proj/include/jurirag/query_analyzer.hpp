#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jurirag/corpus.hpp"
#include "jurirag/llm_client.hpp"

namespace jurirag {

/// PathA: direct metadata lookup. PathB: entity-filtered semantic search.
/// PathC: multi-jurisdiction comparison. Global: no entity, unfiltered search.
enum class Route { PathA, PathB, PathC, Global };

std::string_view to_string(Route route) noexcept;
std::optional<Route> parse_route(std::string_view token);

struct ArticleRef {
    std::string unit_label;     // "Article 17"
    std::string document_hint;  // "GDPR"

    bool operator==(const ArticleRef&) const = default;
};

struct QueryAnalysis {
    std::string raw_query;
    std::vector<std::string> entities;  // canonical, first-appearance order
    std::optional<ArticleRef> article_ref;
    std::set<std::string> name_mentions;  // canonical document titles
    Route route = Route::Global;
    bool used_llm_fallback = false;
};

/// Titles plus registered short names of every corpus document.
class DocumentNames {
public:
    DocumentNames() = default;
    explicit DocumentNames(const Corpus& corpus);

    void add(const std::string& title, std::span<const std::string> short_names);

    std::vector<std::string> known_names() const;

    /// Distinct titles the hint refers to: exact (case-insensitive) title or
    /// short-name matches if any, otherwise titles/short names containing the
    /// hint as a whole-word phrase.
    std::vector<std::string> resolve(std::string_view hint) const;

    /// Titles mentioned in the query verbatim or by short name.
    std::set<std::string> mentions(std::string_view query) const;

private:
    struct Entry {
        std::string name;
        std::string title;
    };
    std::vector<Entry> entries_;
};

/// Whole-word positions of `needle` in `haystack`. Matching is ASCII
/// case-insensitive except for short upper-case tokens ("US", "UK", "EU",
/// "G7"), which must match exactly so that words like "us" do not fire.
std::vector<std::size_t> find_whole_word(std::string_view haystack, std::string_view needle);

/// Word-boundary matching of canonical names and aliases; overlapping
/// matches resolve longest-first.
std::vector<std::string> detect_entities(std::string_view query, const EntityRegistry& registry);

std::string entity_extraction_prompt(std::string_view query, const EntityRegistry& registry);

/// Fallback extraction through a completion model. Names outside the
/// registry are dropped; an unparseable reply yields []. Propagates
/// Error(LlmUnavailable).
std::vector<std::string> detect_entities_llm(std::string_view query, const EntityRegistry& registry,
                                             const CompletionModel& model);

/// "(Article|Section|Art.|§) <token with a digit>", associated with the
/// longest known document name in the query.
std::optional<ArticleRef> extract_article_ref(std::string_view query,
                                              std::span<const std::string> known_names);

Route classify_route(std::span<const std::string> entities, const std::optional<ArticleRef>& article_ref);

/// Surface cue for comparison wording; used only for diagnostics on
/// queries that resolved to no entity.
bool looks_comparative(std::string_view query);

/// Runs the full analysis. `fallback` is consulted only when neither an
/// entity nor an article reference was found; LlmUnavailable degrades to [].
QueryAnalysis analyze_query(std::string_view query, const EntityRegistry& registry,
                            const DocumentNames& names, const CompletionModel* fallback = nullptr);

}  // namespace jurirag
