#include "jurirag/generator.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace jurirag {

namespace {

constexpr std::string_view kInstruction =
    "You are a research assistant for AI regulation across jurisdictions.\n"
    "Answer the question using ONLY the numbered sources below and cite them inline as [n].\n"
    "If the sources do not contain enough information to answer fully, say so explicitly, "
    "name the jurisdictions or points that are not covered, and do not guess.\n";

constexpr std::string_view kNoSources =
    "No sources were retrieved for this question. State plainly that the available sources do "
    "not contain the information needed to answer it, and do not answer from general knowledge.\n";

constexpr std::size_t kStubSentenceLimit = 240;

std::string first_sentence(std::string_view text) {
    const auto b = text.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    text.remove_prefix(b);
    std::size_t end = text.size();
    for (std::size_t i = 0; i + 1 < text.size(); ++i) {
        const char c = text[i];
        if ((c == '.' || c == '!' || c == '?') && (text[i + 1] == ' ' || text[i + 1] == '\n')) {
            end = i + 1;
            break;
        }
        if (c == '\n') {
            end = i;
            break;
        }
    }
    end = std::min(end, kStubSentenceLimit);
    // keep whole UTF-8 sequences
    while (end < text.size() && (static_cast<unsigned char>(text[end]) & 0xC0) == 0x80) {
        --end;
    }
    auto s = std::string(text.substr(0, end));
    while (!s.empty() && (s.back() == ' ' || s.back() == '\n')) s.pop_back();
    return s;
}

}  // namespace

std::string assemble_prompt(std::string_view query, std::span<const ScoredChunk> contexts) {
    std::ostringstream p;
    p << kInstruction << '\n';
    if (contexts.empty()) {
        p << kNoSources;
    } else {
        p << "Sources:\n";
        for (std::size_t i = 0; i < contexts.size(); ++i) {
            const auto& c = contexts[i].chunk;
            p << '[' << (i + 1) << "] " << c.entity << " \xE2\x80\x94 " << c.title << " (" << c.year
              << ')';
            if (c.structural_ref) {
                p << ", " << *c.structural_ref;
            }
            p << " :: " << c.text << '\n';
        }
    }
    p << "\nQuestion: " << query << '\n';
    return p.str();
}

std::string generate_answer(const std::string& prompt, const CompletionModel& model) {
    return model.complete(prompt);
}

std::string offline_stub_answer(std::span<const ScoredChunk> contexts) {
    if (contexts.empty()) {
        return "The provided sources do not contain information to answer this question.";
    }
    std::string out;
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        if (i) out += '\n';
        std::string_view text = contexts[i].chunk.text;
        // a unit's own heading line is not a sentence
        const auto& ref = contexts[i].chunk.structural_ref;
        if (ref && text.substr(0, ref->size()) == *ref) {
            const auto nl = text.find('\n');
            const auto rest = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
            if (rest.find_first_not_of(" \t\r\n") != std::string_view::npos) {
                text = rest;
            }
        }
        auto sentence = first_sentence(text);
        if (sentence.empty()) {
            sentence = contexts[i].chunk.title;
        }
        out += sentence + " [" + std::to_string(i + 1) + "]";
    }
    return out;
}

std::vector<Citation> format_citations(std::span<const ScoredChunk> contexts) {
    std::vector<Citation> out;
    std::set<std::string> seen;
    for (const auto& sc : contexts) {
        const auto& c = sc.chunk;
        if (!seen.insert(c.chunk_id).second) {
            continue;
        }
        out.push_back({c.doc_id, c.title, c.entity, c.year, c.structural_ref, c.chunk_id});
    }
    return out;
}

std::optional<std::string> coverage_note(const RetrievalResult& retrieval) {
    std::vector<std::string> missing;
    for (const auto& e : retrieval.analysis.entities) {
        if (retrieval.entities_covered.count(e) == 0) {
            missing.push_back(e);
        }
    }
    if (missing.empty()) {
        return std::nullopt;
    }
    std::string note = "The retrieved sources contain no material from ";
    for (std::size_t i = 0; i < missing.size(); ++i) {
        if (i > 0) note += i + 1 == missing.size() ? " or " : ", ";
        note += missing[i];
    }
    note += "; a complete answer for ";
    note += missing.size() == 1 ? "that jurisdiction" : "those jurisdictions";
    note += " cannot be given.";
    return note;
}

Answer Generator::answer(const RetrievalResult& retrieval) const {
    Answer a;
    a.route = retrieval.analysis.route;
    a.citations = format_citations(retrieval.contexts);
    a.coverage_note = coverage_note(retrieval);
    if (model_ == nullptr) {
        a.text = offline_stub_answer(retrieval.contexts);
    } else {
        a.text = generate_answer(assemble_prompt(retrieval.analysis.raw_query, retrieval.contexts),
                                 *model_);
    }
    return a;
}

}  // namespace jurirag
