#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jurirag/corpus.hpp"
#include "jurirag/embedder.hpp"
#include "jurirag/llm_client.hpp"
#include "jurirag/query_analyzer.hpp"
#include "jurirag/vector_index.hpp"

namespace jurirag {

struct PipelineConfig {
    std::size_t k = 5;
    /// Candidates fetched per requested slot before filtering (k x 5 x 5).
    std::size_t over_retrieval_factor = 25;
    double boost_enacted = 0.6;
    double boost_proposed = 0.8;  // also applied to draft
    double boost_name_mention = 0.7;

    std::size_t fetch_k() const noexcept { return k * over_retrieval_factor; }
    void validate() const;
};

enum class Fallback { none, eu_expansion, path_a_miss_to_b };

std::string_view to_string(Fallback fallback) noexcept;

struct RetrievalResult {
    QueryAnalysis analysis;
    std::vector<ScoredChunk> contexts;  // ascending final score, at most k
    Fallback fallback_applied = Fallback::none;
    std::set<std::string> entities_covered;
    /// Set when retrieval produced nothing usable, explaining why.
    std::optional<std::string> diagnostic;
    std::size_t distance_computations = 0;
};

/// Pathway A: reads the unit straight from the docstore. Every result has
/// score 0 and document order. Empty on a miss; Error(AmbiguousDocument) when
/// the hint names more than one title.
std::vector<ScoredChunk> path_a_lookup(const ArticleRef& ref, const DocumentNames& names,
                                       const Index& index);

struct PathBOutcome {
    std::vector<ScoredChunk> contexts;
    Fallback fallback = Fallback::none;
};

/// Pathway B: over-retrieve unfiltered, keep the single requested entity,
/// boost, truncate. An EU member with no surviving candidate is re-filtered
/// from the same pool to {member, EU}.
PathBOutcome path_b_search(const QueryAnalysis& analysis, std::span<const float> query_vec,
                           const EntityRegistry& registry, const Index& index,
                           const PipelineConfig& config, SearchStats* stats = nullptr);

/// Multiplies by the status factor (enacted / proposed-or-draft / 1.0) and
/// by the name-mention factor when the title was named in the query, then
/// re-sorts ascending with (doc_id, ordinal) tie-break.
std::vector<ScoredChunk> apply_priority_boosts(std::vector<ScoredChunk> candidates,
                                               const QueryAnalysis& analysis,
                                               const PipelineConfig& config);

/// Pathway C: unfiltered, unboosted similarity search followed by
/// round_robin_rerank over the requested entities.
std::vector<ScoredChunk> path_c_search(const QueryAnalysis& analysis, std::span<const float> query_vec,
                                       const Index& index, const PipelineConfig& config,
                                       SearchStats* stats = nullptr);

/// Cycles over requested entities (ordered by their best raw score), taking
/// each one's next-best chunk per pass. Once those run out, the remaining
/// slots go to other entities in score order. Output is in selection order.
std::vector<ScoredChunk> round_robin_rerank(std::span<const ScoredChunk> candidates,
                                            std::span<const std::string> requested_entities,
                                            std::size_t k);

/// No-entity route: unfiltered search with status boosts.
std::vector<ScoredChunk> global_search(const QueryAnalysis& analysis, std::span<const float> query_vec,
                                       const Index& index, const PipelineConfig& config,
                                       SearchStats* stats = nullptr);

/// Stateless over an immutable corpus and index; concurrent calls are safe.
class Retriever {
public:
    Retriever(const Corpus& corpus, const Index& index, const Embedder& embedder,
              PipelineConfig config, const CompletionModel* entity_fallback = nullptr);

    RetrievalResult retrieve(std::string_view query) const;
    RetrievalResult retrieve(std::string_view query, std::size_t k) const;

    const PipelineConfig& config() const noexcept { return config_; }
    const DocumentNames& names() const noexcept { return names_; }

private:
    RetrievalResult run(std::string_view query, const PipelineConfig& config) const;

    const Corpus& corpus_;
    const Index& index_;
    const Embedder& embedder_;
    PipelineConfig config_;
    const CompletionModel* entity_fallback_;
    DocumentNames names_;
};

RetrievalResult retrieve(std::string_view query, const Corpus& corpus, const Index& index,
                         const Embedder& embedder, const PipelineConfig& config,
                         const CompletionModel* entity_fallback = nullptr);

}  // namespace jurirag
