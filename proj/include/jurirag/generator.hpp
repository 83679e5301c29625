#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jurirag/llm_client.hpp"
#include "jurirag/retrieval.hpp"

namespace jurirag {

struct Citation {
    std::string doc_id;
    std::string title;
    std::string entity;
    int year = 0;
    std::optional<std::string> structural_ref;
    std::string chunk_id;

    bool operator==(const Citation&) const = default;
};

struct Answer {
    std::string text;
    std::vector<Citation> citations;
    Route route = Route::Global;
    /// Present exactly when some requested entity has no retrieved context.
    std::optional<std::string> coverage_note;
};

/// Deterministic grounded prompt. Sources are numbered in the order given:
///   [n] {entity} U+2014 {title} ({year}){, structural_ref} :: {text}
std::string assemble_prompt(std::string_view query, std::span<const ScoredChunk> contexts);

/// Propagates Error(LlmUnavailable).
std::string generate_answer(const std::string& prompt, const CompletionModel& model);

/// Offline answer: the first sentence of each source followed by its label.
std::string offline_stub_answer(std::span<const ScoredChunk> contexts);

/// One citation per distinct chunk, in context order.
std::vector<Citation> format_citations(std::span<const ScoredChunk> contexts);

std::optional<std::string> coverage_note(const RetrievalResult& retrieval);

/// `model == nullptr` selects the offline stub.
class Generator {
public:
    explicit Generator(const CompletionModel* model) : model_(model) {}

    Answer answer(const RetrievalResult& retrieval) const;

private:
    const CompletionModel* model_;
};

}  // namespace jurirag
