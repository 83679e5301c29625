#include "jurirag/retrieval.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "jurirag/error.hpp"

namespace jurirag {

namespace {

bool ranks_before(const ScoredChunk& a, const ScoredChunk& b) {
    return std::tie(a.score, a.chunk.doc_id, a.chunk.ordinal) <
           std::tie(b.score, b.chunk.doc_id, b.chunk.ordinal);
}

std::vector<ScoredChunk> keep_entities(std::span<const ScoredChunk> pool,
                                       const std::set<std::string>& entities) {
    std::vector<ScoredChunk> out;
    for (const auto& c : pool) {
        if (entities.count(c.chunk.entity) > 0) {
            out.push_back(c);
        }
    }
    return out;
}

void truncate(std::vector<ScoredChunk>& v, std::size_t k) {
    if (v.size() > k) {
        v.resize(k);
    }
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        out += (i ? ", " : "") + items[i];
    }
    return out;
}

}  // namespace

void PipelineConfig::validate() const {
    if (k < 1) {
        throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    }
    if (over_retrieval_factor < 1) {
        throw Error(ErrorCode::InvalidArgument, "over_retrieval_factor must be at least 1");
    }
    for (double b : {boost_enacted, boost_proposed, boost_name_mention}) {
        if (!(b > 0.0 && b <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "boost factors must be in (0, 1]");
        }
    }
}

std::string_view to_string(Fallback fallback) noexcept {
    switch (fallback) {
        case Fallback::none: return "none";
        case Fallback::eu_expansion: return "eu_expansion";
        case Fallback::path_a_miss_to_b: return "path_a_miss_to_b";
    }
    return "none";
}

std::vector<ScoredChunk> path_a_lookup(const ArticleRef& ref, const DocumentNames& names,
                                       const Index& index) {
    const auto titles = names.resolve(ref.document_hint);
    if (titles.size() > 1) {
        throw Error(ErrorCode::AmbiguousDocument,
                    "\"" + ref.document_hint + "\" matches several documents: " + join(titles));
    }
    std::vector<ScoredChunk> out;
    if (titles.empty()) {
        return out;
    }
    MetadataFilter filter;
    filter.title = titles.front();
    filter.structural_ref = ref.unit_label;
    for (auto& chunk : lookup_by_metadata(index, filter)) {
        out.push_back({std::move(chunk), 0.0});
    }
    return out;
}

std::vector<ScoredChunk> apply_priority_boosts(std::vector<ScoredChunk> candidates,
                                               const QueryAnalysis& analysis,
                                               const PipelineConfig& config) {
    for (auto& c : candidates) {
        switch (c.chunk.status) {
            case Status::enacted:
                c.score *= config.boost_enacted;
                break;
            case Status::proposed:
            case Status::draft:
                c.score *= config.boost_proposed;
                break;
            default:
                break;
        }
        if (analysis.name_mentions.count(c.chunk.title) > 0) {
            c.score *= config.boost_name_mention;
        }
    }
    std::sort(candidates.begin(), candidates.end(), ranks_before);
    return candidates;
}

PathBOutcome path_b_search(const QueryAnalysis& analysis, std::span<const float> query_vec,
                           const EntityRegistry& registry, const Index& index,
                           const PipelineConfig& config, SearchStats* stats) {
    if (analysis.entities.size() != 1) {
        throw Error(ErrorCode::InvalidArgument, "entity-filtered search needs exactly one entity");
    }
    const auto& entity = analysis.entities.front();
    const auto pool = search(index, query_vec, config.fetch_k(), nullptr, stats);

    PathBOutcome outcome;
    auto kept = keep_entities(pool, {entity});
    if (kept.empty() && registry.is_eu_member(entity) && !registry.eu_entity.empty()) {
        kept = keep_entities(pool, {entity, registry.eu_entity});
        outcome.fallback = Fallback::eu_expansion;
    }
    outcome.contexts = apply_priority_boosts(std::move(kept), analysis, config);
    truncate(outcome.contexts, config.k);
    return outcome;
}

std::vector<ScoredChunk> round_robin_rerank(std::span<const ScoredChunk> candidates,
                                            std::span<const std::string> requested_entities,
                                            std::size_t k) {
    std::vector<ScoredChunk> sorted(candidates.begin(), candidates.end());
    std::stable_sort(sorted.begin(), sorted.end(), ranks_before);

    // Per-entity queues of candidate positions, best first.
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        groups[sorted[i].chunk.entity].push_back(i);
    }

    std::vector<std::string> cycle;
    for (const auto& e : requested_entities) {
        if (groups.count(e) > 0 && std::find(cycle.begin(), cycle.end(), e) == cycle.end()) {
            cycle.push_back(e);
        }
    }
    // Best (lowest) raw score first; positions in `sorted` encode that order.
    std::sort(cycle.begin(), cycle.end(), [&groups](const std::string& a, const std::string& b) {
        return groups[a].front() < groups[b].front();
    });

    std::vector<ScoredChunk> out;
    std::map<std::string, std::size_t> taken;
    bool progressed = true;
    while (out.size() < k && progressed) {
        progressed = false;
        for (const auto& e : cycle) {
            if (out.size() >= k) {
                break;
            }
            auto& next = taken[e];
            const auto& queue = groups[e];
            if (next < queue.size()) {
                out.push_back(sorted[queue[next++]]);
                progressed = true;
            }
        }
    }
    for (std::size_t i = 0; i < sorted.size() && out.size() < k; ++i) {
        if (std::find(cycle.begin(), cycle.end(), sorted[i].chunk.entity) == cycle.end()) {
            out.push_back(sorted[i]);
        }
    }
    return out;
}

std::vector<ScoredChunk> path_c_search(const QueryAnalysis& analysis, std::span<const float> query_vec,
                                       const Index& index, const PipelineConfig& config,
                                       SearchStats* stats) {
    const auto pool = search(index, query_vec, config.fetch_k(), nullptr, stats);
    return round_robin_rerank(pool, analysis.entities, config.k);
}

std::vector<ScoredChunk> global_search(const QueryAnalysis& analysis, std::span<const float> query_vec,
                                       const Index& index, const PipelineConfig& config,
                                       SearchStats* stats) {
    auto out = apply_priority_boosts(search(index, query_vec, config.fetch_k(), nullptr, stats),
                                     analysis, config);
    truncate(out, config.k);
    return out;
}

Retriever::Retriever(const Corpus& corpus, const Index& index, const Embedder& embedder,
                     PipelineConfig config, const CompletionModel* entity_fallback)
    : corpus_(corpus),
      index_(index),
      embedder_(embedder),
      config_(config),
      entity_fallback_(entity_fallback),
      names_(corpus) {
    config_.validate();
}

RetrievalResult Retriever::retrieve(std::string_view query) const {
    return run(query, config_);
}

RetrievalResult Retriever::retrieve(std::string_view query, std::size_t k) const {
    auto config = config_;
    config.k = k;
    config.validate();
    return run(query, config);
}

RetrievalResult Retriever::run(std::string_view query, const PipelineConfig& config) const {
    if (index_.empty()) {
        throw Error(ErrorCode::EmptyIndex, "the index has no chunks");
    }
    RetrievalResult result;
    result.analysis = analyze_query(query, corpus_.registry, names_, entity_fallback_);
    const auto& analysis = result.analysis;
    SearchStats stats;

    auto entity_search = [&](const QueryAnalysis& a) {
        const auto qvec = embedder_.embed(query);
        auto outcome = path_b_search(a, qvec, corpus_.registry, index_, config, &stats);
        result.contexts = std::move(outcome.contexts);
        return outcome.fallback;
    };

    switch (analysis.route) {
        case Route::PathA: {
            auto hits = path_a_lookup(*analysis.article_ref, names_, index_);
            if (!hits.empty()) {
                result.contexts = apply_priority_boosts(std::move(hits), analysis, config);
                truncate(result.contexts, config.k);
                break;
            }
            result.fallback_applied = Fallback::path_a_miss_to_b;
            // Scope the semantic fallback to the detected entity, or else to
            // the entity that owns the hinted document.
            std::optional<std::string> entity;
            if (analysis.entities.size() == 1) {
                entity = analysis.entities.front();
            } else {
                const auto titles = names_.resolve(analysis.article_ref->document_hint);
                for (const auto& doc : corpus_.documents) {
                    if (titles.size() == 1 && doc.title == titles.front()) {
                        entity = doc.entity;
                        break;
                    }
                }
            }
            if (entity) {
                auto scoped = analysis;
                scoped.entities = {*entity};
                entity_search(scoped);
            } else {
                result.contexts = global_search(analysis, embedder_.embed(query), index_, config, &stats);
            }
            break;
        }
        case Route::PathB:
            result.fallback_applied = entity_search(analysis);
            break;
        case Route::PathC: {
            const auto qvec = embedder_.embed(query);
            result.contexts = path_c_search(analysis, qvec, index_, config, &stats);
            std::stable_sort(result.contexts.begin(), result.contexts.end(), ranks_before);
            break;
        }
        case Route::Global:
            if (looks_comparative(query)) {
                result.diagnostic = "entity detection found no jurisdiction in a comparison query";
                break;
            }
            result.contexts = global_search(analysis, embedder_.embed(query), index_, config, &stats);
            break;
    }

    for (const auto& c : result.contexts) {
        result.entities_covered.insert(c.chunk.entity);
    }
    if (result.contexts.empty() && !result.diagnostic) {
        result.diagnostic = analysis.entities.empty()
                                ? std::string("no indexed chunks matched the query")
                                : "no indexed chunks for " + join(analysis.entities);
    }
    result.distance_computations = stats.distance_computations;
    return result;
}

RetrievalResult retrieve(std::string_view query, const Corpus& corpus, const Index& index,
                         const Embedder& embedder, const PipelineConfig& config,
                         const CompletionModel* entity_fallback) {
    return Retriever(corpus, index, embedder, config, entity_fallback).retrieve(query);
}

}  // namespace jurirag
