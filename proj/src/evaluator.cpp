#include "jurirag/evaluator.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "jurirag/error.hpp"
#include "jurirag/file_io.hpp"

namespace jurirag {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lowercase(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (static_cast<unsigned char>(c) < 0x80) {
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    return out;
}

// Removes inline citation labels such as "[3]".
std::string strip_citation_labels(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '[') {
            auto j = i + 1;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            if (j > i + 1 && j < text.size() && text[j] == ']') {
                // swallow the space that introduced the label
                if (!out.empty() && out.back() == ' ') out.pop_back();
                i = j + 1;
                continue;
            }
        }
        out.push_back(text[i++]);
    }
    return out;
}

std::vector<std::string> non_empty_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        while (!t.empty() && (t.front() == '-' || t.front() == '*')) {
            t = trim(std::string_view(t).substr(1));
        }
        if (!t.empty()) {
            lines.push_back(t);
        }
    }
    return lines;
}

std::string format_mean(const std::optional<double>& v) {
    if (!v) {
        return "-";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *v);
    return buf;
}

constexpr std::pair<QueryCategory, std::string_view> kCategories[] = {
    {QueryCategory::single_entity, "single_entity"},
    {QueryCategory::multi_jurisdictional, "multi_jurisdictional"},
};

constexpr std::pair<QuerySubcategory, std::string_view> kSubcategories[] = {
    {QuerySubcategory::article_specific, "article_specific"},
    {QuerySubcategory::conceptual, "conceptual"},
    {QuerySubcategory::eu_member_state, "eu_member_state"},
    {QuerySubcategory::straightforward_comparison, "straightforward_comparison"},
    {QuerySubcategory::harder_comparison, "harder_comparison"},
};

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

bool is_noncommittal(std::string_view answer) {
    static constexpr std::string_view kMarkers[] = {
        "do not contain", "does not contain", "cannot be answered",
        "not enough information", "no sources were retrieved",
    };
    const auto text = lowercase(answer);
    return std::any_of(std::begin(kMarkers), std::end(kMarkers),
                       [&text](std::string_view m) { return text.find(m) != std::string::npos; });
}

std::vector<std::string> StubJudge::decompose(std::string_view answer) const {
    const auto text = strip_citation_labels(answer);
    std::vector<std::string> claims;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        auto piece = trim(std::string_view(text).substr(start, end - start));
        if (!piece.empty()) {
            claims.push_back(std::move(piece));
        }
        start = end;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n') {
            flush(i);
            start = i + 1;
        } else if ((c == '.' || c == '!' || c == '?') && i + 1 < text.size() &&
                   (text[i + 1] == ' ' || text[i + 1] == '\n')) {
            flush(i + 1);
        }
    }
    flush(text.size());
    return claims;
}

Verdict StubJudge::verify(std::string_view claim, std::span<const ScoredChunk> contexts) const {
    const bool found = std::any_of(contexts.begin(), contexts.end(), [claim](const ScoredChunk& c) {
        return c.chunk.text.find(claim) != std::string::npos;
    });
    return found ? Verdict::supported : Verdict::unsupported;
}

GeneratedQuestions StubJudge::generate_questions(std::string_view answer, std::size_t n) const {
    GeneratedQuestions out;
    out.noncommittal = is_noncommittal(answer);
    const auto claims = decompose(answer);
    for (std::size_t i = 0; i < n && !claims.empty(); ++i) {
        out.questions.push_back(claims[i % claims.size()]);
    }
    return out;
}

std::vector<std::string> LlmJudge::decompose(std::string_view answer) const {
    std::string prompt =
        "Break the answer below into short, standalone factual claims. Write one claim per line "
        "and nothing else.\n\nAnswer:\n";
    prompt += answer;
    prompt += '\n';
    return non_empty_lines(model_.complete(prompt));
}

Verdict LlmJudge::verify(std::string_view claim, std::span<const ScoredChunk> contexts) const {
    std::string prompt = "Context:\n";
    for (const auto& c : contexts) {
        prompt += c.chunk.text;
        prompt += "\n---\n";
    }
    prompt += "\nClaim: ";
    prompt += claim;
    prompt += "\n\nCan the claim be directly inferred from the context? Answer YES or NO.\n";
    const auto reply = lowercase(trim(model_.complete(prompt)));
    if (reply.starts_with("yes")) return Verdict::supported;
    if (reply.starts_with("no")) return Verdict::unsupported;
    return Verdict::unknown;
}

GeneratedQuestions LlmJudge::generate_questions(std::string_view answer, std::size_t n) const {
    std::string prompt = "Write " + std::to_string(n) +
                         " different questions that the answer below responds to, one per line. "
                         "If the answer is noncommittal (it says the information is not available "
                         "or the question cannot be answered), write only the word NONCOMMITTAL.\n\n"
                         "Answer:\n";
    prompt += answer;
    prompt += '\n';
    const auto lines = non_empty_lines(model_.complete(prompt));
    GeneratedQuestions out;
    for (const auto& line : lines) {
        if (lowercase(line).find("noncommittal") != std::string::npos) {
            out.noncommittal = true;
            out.questions.clear();
            return out;
        }
        if (out.questions.size() < n) {
            out.questions.push_back(line);
        }
    }
    return out;
}

std::vector<Claim> decompose_claims(std::string_view answer, const Judge& judge) {
    std::vector<Claim> claims;
    if (trim(answer).empty()) {
        return claims;
    }
    for (auto& text : judge.decompose(answer)) {
        claims.push_back({std::move(text), Verdict::unknown});
    }
    return claims;
}

double score_faithfulness(std::vector<Claim>& claims, std::span<const ScoredChunk> contexts,
                          const Judge& judge) {
    if (claims.empty()) {
        throw Error(ErrorCode::NoClaims, "cannot score faithfulness without claims");
    }
    std::size_t supported = 0;
    for (auto& claim : claims) {
        claim.verdict = judge.verify(claim.text, contexts);
        if (claim.verdict == Verdict::supported) {
            ++supported;
        }
    }
    return static_cast<double>(supported) / static_cast<double>(claims.size());
}

double score_relevancy(std::string_view question, std::string_view answer, const Judge& judge,
                       const Embedder& embedder, std::size_t n_q) {
    if (trim(question).empty() || trim(answer).empty()) {
        throw Error(ErrorCode::InvalidArgument, "relevancy needs a question and an answer");
    }
    const auto generated = judge.generate_questions(answer, n_q);
    if (generated.noncommittal || generated.questions.empty()) {
        return 0.0;
    }
    const auto original = embedder.embed(question);
    double sum = 0.0;
    for (const auto& q : generated.questions) {
        sum += dot(embedder.embed(q), original);
    }
    const double mean = sum / static_cast<double>(generated.questions.size());
    return std::clamp(mean, 0.0, 1.0);
}

std::string_view to_string(QueryCategory c) noexcept {
    for (const auto& [v, name] : kCategories) {
        if (v == c) return name;
    }
    return "single_entity";
}

std::string_view to_string(QuerySubcategory s) noexcept {
    for (const auto& [v, name] : kSubcategories) {
        if (v == s) return name;
    }
    return "conceptual";
}

std::optional<QueryCategory> parse_category(std::string_view token) {
    for (const auto& [v, name] : kCategories) {
        if (name == token) return v;
    }
    return std::nullopt;
}

std::optional<QuerySubcategory> parse_subcategory(std::string_view token) {
    for (const auto& [v, name] : kSubcategories) {
        if (name == token) return v;
    }
    return std::nullopt;
}

std::vector<EvalQuery> load_query_file(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<EvalQuery> queries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto where = path.string() + ":" + std::to_string(line_no);
        try {
            const auto rec = json::parse(line);
            EvalQuery q;
            q.id = rec.at("id").get<std::string>();
            q.query = rec.at("query").get<std::string>();
            const auto cat = parse_category(rec.at("category").get<std::string>());
            const auto sub = parse_subcategory(rec.at("subcategory").get<std::string>());
            if (!cat || !sub) {
                throw Error(ErrorCode::UnknownToken, where + ": unknown category or subcategory");
            }
            q.category = *cat;
            q.subcategory = *sub;
            queries.push_back(std::move(q));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::Parse, where + ": " + e.what());
        }
    }
    return queries;
}

std::map<std::string, MetricAggregate> aggregate(std::span<const EvalRecord> records) {
    struct Sums {
        std::size_t nf = 0, nr = 0;
        double f = 0.0, r = 0.0;
    };
    std::map<std::string, Sums> sums;
    for (const auto& rec : records) {
        for (const auto& key : {std::string(to_string(rec.category)), std::string("overall")}) {
            auto& s = sums[key];
            if (rec.faithfulness) {
                ++s.nf;
                s.f += *rec.faithfulness;
            }
            if (rec.relevancy) {
                ++s.nr;
                s.r += *rec.relevancy;
            }
        }
    }
    std::map<std::string, MetricAggregate> out;
    for (const auto& [key, s] : sums) {
        if (s.nf == 0 && s.nr == 0) {
            continue;
        }
        MetricAggregate a;
        a.n_faithfulness = s.nf;
        a.n_relevancy = s.nr;
        if (s.nf) a.faithfulness = s.f / static_cast<double>(s.nf);
        if (s.nr) a.relevancy = s.r / static_cast<double>(s.nr);
        out.emplace(key, a);
    }
    return out;
}

EvalReport run_eval(std::span<const EvalQuery> queries, const AnswerSystem& system,
                    const Judge& judge, const Embedder& embedder, const EvalOptions& options) {
    EvalReport report;
    for (const auto& q : queries) {
        EvalRecord rec;
        rec.query_id = q.id;
        rec.category = q.category;
        rec.subcategory = q.subcategory;

        SystemResponse response;
        try {
            response = system(q.query);
        } catch (const Error& e) {
            rec.failure_reason = std::string("retrieval failed: ") + e.what();
            report.records.push_back(std::move(rec));
            continue;
        }
        rec.route = response.retrieval.analysis.route;

        if (response.retrieval.contexts.empty()) {
            std::string reason = "no retrieved context";
            if (response.retrieval.diagnostic) {
                reason += ": " + *response.retrieval.diagnostic;
            }
            rec.failure_reason = reason;
        } else if (!response.answer) {
            rec.failure_reason = "generation failed: " + response.error.value_or("no answer");
        } else {
            try {
                auto claims = decompose_claims(response.answer->text, judge);
                if (claims.empty()) {
                    rec.failure_reason = "no claims found in the answer";
                } else {
                    rec.faithfulness = score_faithfulness(claims, response.retrieval.contexts, judge);
                }
                rec.relevancy = score_relevancy(q.query, response.answer->text, judge, embedder,
                                                options.n_questions);
            } catch (const Error& e) {
                rec.failure_reason = std::string("judge failed: ") + e.what();
            }
        }
        report.records.push_back(std::move(rec));
    }
    report.aggregates = aggregate(report.records);
    return report;
}

EvalReport run_eval(const std::filesystem::path& query_file, const AnswerSystem& system,
                    const Judge& judge, const Embedder& embedder, const EvalOptions& options) {
    const auto queries = load_query_file(query_file);
    return run_eval(queries, system, judge, embedder, options);
}

std::string report_json(const EvalReport& report) {
    json records = json::array();
    for (const auto& r : report.records) {
        json rec{{"query_id", r.query_id},
                 {"category", to_string(r.category)},
                 {"subcategory", to_string(r.subcategory)},
                 {"route", to_string(r.route)},
                 {"faithfulness", optional_number(r.faithfulness)},
                 {"relevancy", optional_number(r.relevancy)}};
        if (r.failure_reason) {
            rec["failure_reason"] = *r.failure_reason;
        }
        records.push_back(std::move(rec));
    }
    json aggregates = json::object();
    for (const auto& [key, a] : report.aggregates) {
        aggregates[key] = json{{"n_faithfulness", a.n_faithfulness},
                               {"faithfulness", optional_number(a.faithfulness)},
                               {"n_relevancy", a.n_relevancy},
                               {"relevancy", optional_number(a.relevancy)}};
    }
    return json{{"records", records}, {"aggregates", aggregates}}.dump(2) + "\n";
}

std::string render_tables(const EvalReport& report) {
    static constexpr std::pair<std::string_view, std::string_view> kRows[] = {
        {"single_entity", "Single-entity"},
        {"multi_jurisdictional", "Multi-jurisdictional"},
        {"overall", "Overall"},
    };
    std::string out;
    auto table = [&](std::string_view metric, bool faithfulness) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-22s %4s  %s\n", "Query Category", "n",
                      std::string(metric).c_str());
        out += line;
        for (const auto& [key, label] : kRows) {
            const auto it = report.aggregates.find(std::string(key));
            const MetricAggregate a = it == report.aggregates.end() ? MetricAggregate{} : it->second;
            const auto n = faithfulness ? a.n_faithfulness : a.n_relevancy;
            const auto mean = format_mean(faithfulness ? a.faithfulness : a.relevancy);
            std::snprintf(line, sizeof(line), "%-22s %4zu  %s\n", std::string(label).c_str(), n,
                          mean.c_str());
            out += line;
        }
    };
    table("Avg. Faithfulness", true);
    out += '\n';
    table("Avg. Relevancy", false);
    return out;
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
    write_file_atomic(path, report_json(report));
}

}  // namespace jurirag
