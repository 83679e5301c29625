#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jurirag/embedder.hpp"
#include "jurirag/generator.hpp"
#include "jurirag/llm_client.hpp"
#include "jurirag/retrieval.hpp"

namespace jurirag {

enum class Verdict { supported, unsupported, unknown };

struct Claim {
    std::string text;
    Verdict verdict = Verdict::unknown;
};

struct GeneratedQuestions {
    std::vector<std::string> questions;
    bool noncommittal = false;
};

/// The three judgements the metrics need.
class Judge {
public:
    virtual ~Judge() = default;
    virtual std::vector<std::string> decompose(std::string_view answer) const = 0;
    virtual Verdict verify(std::string_view claim, std::span<const ScoredChunk> contexts) const = 0;
    virtual GeneratedQuestions generate_questions(std::string_view answer, std::size_t n) const = 0;
};

/// Deterministic offline judge.
///  - decompose: sentence split, with inline [n] citation labels removed
///  - verify: supported iff the claim is a substring of some context
///  - generate_questions: reuses the answer's claims; noncommittal iff the
///    answer says the sources lack the information
class StubJudge final : public Judge {
public:
    std::vector<std::string> decompose(std::string_view answer) const override;
    Verdict verify(std::string_view claim, std::span<const ScoredChunk> contexts) const override;
    GeneratedQuestions generate_questions(std::string_view answer, std::size_t n) const override;
};

/// Prompts a completion model for each judgement.
class LlmJudge final : public Judge {
public:
    explicit LlmJudge(const CompletionModel& model) : model_(model) {}

    std::vector<std::string> decompose(std::string_view answer) const override;
    Verdict verify(std::string_view claim, std::span<const ScoredChunk> contexts) const override;
    GeneratedQuestions generate_questions(std::string_view answer, std::size_t n) const override;

private:
    const CompletionModel& model_;
};

/// True for answers that decline for lack of sources.
bool is_noncommittal(std::string_view answer);

std::vector<Claim> decompose_claims(std::string_view answer, const Judge& judge);

/// supported / total; verdicts are written back into `claims`.
/// Error(NoClaims) when there is nothing to score.
double score_faithfulness(std::vector<Claim>& claims, std::span<const ScoredChunk> contexts,
                          const Judge& judge);

/// Mean cosine similarity between the question and n_q questions regenerated
/// from the answer, clamped to [0, 1]; 0 for noncommittal answers.
double score_relevancy(std::string_view question, std::string_view answer, const Judge& judge,
                       const Embedder& embedder, std::size_t n_q = 3);

enum class QueryCategory { single_entity, multi_jurisdictional };
enum class QuerySubcategory {
    article_specific,
    conceptual,
    eu_member_state,
    straightforward_comparison,
    harder_comparison,
};

std::string_view to_string(QueryCategory c) noexcept;
std::string_view to_string(QuerySubcategory s) noexcept;
std::optional<QueryCategory> parse_category(std::string_view token);
std::optional<QuerySubcategory> parse_subcategory(std::string_view token);

struct EvalQuery {
    std::string id;
    QueryCategory category = QueryCategory::single_entity;
    QuerySubcategory subcategory = QuerySubcategory::conceptual;
    std::string query;
};

/// Line-delimited {"id","category","subcategory","query"} records.
std::vector<EvalQuery> load_query_file(const std::filesystem::path& path);

struct EvalRecord {
    std::string query_id;
    QueryCategory category = QueryCategory::single_entity;
    QuerySubcategory subcategory = QuerySubcategory::conceptual;
    Route route = Route::Global;
    std::optional<double> faithfulness;
    std::optional<double> relevancy;
    std::optional<std::string> failure_reason;  // set whenever a score is absent
};

struct MetricAggregate {
    std::size_t n_faithfulness = 0;
    std::optional<double> faithfulness;
    std::size_t n_relevancy = 0;
    std::optional<double> relevancy;
};

struct EvalReport {
    std::vector<EvalRecord> records;
    /// Keys: "single_entity", "multi_jurisdictional", "overall"; a key is
    /// present only when at least one record in it was scored.
    std::map<std::string, MetricAggregate> aggregates;
};

/// What the system under evaluation returns for one question.
struct SystemResponse {
    RetrievalResult retrieval;
    std::optional<Answer> answer;
    std::optional<std::string> error;
};

using AnswerSystem = std::function<SystemResponse(const std::string& query)>;

struct EvalOptions {
    std::size_t n_questions = 3;
};

/// Arithmetic means over present scores only.
std::map<std::string, MetricAggregate> aggregate(std::span<const EvalRecord> records);

EvalReport run_eval(std::span<const EvalQuery> queries, const AnswerSystem& system,
                    const Judge& judge, const Embedder& embedder, const EvalOptions& options = {});
EvalReport run_eval(const std::filesystem::path& query_file, const AnswerSystem& system,
                    const Judge& judge, const Embedder& embedder, const EvalOptions& options = {});

std::string report_json(const EvalReport& report);

/// Faithfulness and relevancy tables by query category.
std::string render_tables(const EvalReport& report);

/// Atomic: either the whole report appears at `path` or nothing does.
void write_report(const EvalReport& report, const std::filesystem::path& path);

}  // namespace jurirag
