#include "jurirag/query_analyzer.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "jurirag/error.hpp"

namespace jurirag {

namespace {

bool is_word_byte(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u);
}

char lower(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 ? static_cast<char>(std::tolower(u)) : c;
}

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), lower);
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(),
                                              [](char x, char y) { return lower(x) == lower(y); });
}

bool is_short_upper_token(std::string_view s) {
    if (s.empty() || s.size() > 3) {
        return false;
    }
    bool has_upper = false;
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isupper(u)) {
            has_upper = true;
        } else if (!std::isdigit(u)) {
            return false;
        }
    }
    return has_upper;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

struct Span {
    std::size_t begin;
    std::size_t end;
    std::string value;
};

// Longest occurrence in the text of any name, earliest on ties.
std::optional<Span> longest_name(std::string_view text, std::span<const std::string> names) {
    std::optional<Span> best;
    for (const auto& name : names) {
        const auto hits = find_whole_word(text, name);
        if (hits.empty()) {
            continue;
        }
        const Span cand{hits.front(), hits.front() + name.size(), name};
        const auto cand_len = cand.end - cand.begin;
        if (!best || cand_len > best->end - best->begin ||
            (cand_len == best->end - best->begin && cand.begin < best->begin)) {
            best = cand;
        }
    }
    return best;
}

struct UnitKeyword {
    std::string_view surface;
    std::string_view canonical;
    bool needs_space;
};

constexpr UnitKeyword kUnitKeywords[] = {
    {"article", "Article", true},
    {"section", "Section", true},
    {"art.", "Article", false},
    {"\xC2\xA7", "Section", false},  // §
};

std::string strip_list_decoration(std::string_view raw) {
    auto s = trim(raw);
    while (!s.empty() && (s.front() == '-' || s.front() == '*' || s.front() == '"' ||
                          s.front() == '\'' || s.front() == '[')) {
        s = trim(std::string_view(s).substr(1));
    }
    // "1." / "2)" numbering
    std::size_t digits = 0;
    while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
    if (digits > 0 && digits < s.size() && (s[digits] == '.' || s[digits] == ')')) {
        s = trim(std::string_view(s).substr(digits + 1));
    }
    // "•" bullet
    if (s.rfind("\xE2\x80\xA2", 0) == 0) {
        s = trim(std::string_view(s).substr(3));
    }
    while (!s.empty() && (s.back() == '"' || s.back() == '\'' || s.back() == '.' || s.back() == ']')) {
        s.pop_back();
    }
    return trim(s);
}

}  // namespace

std::string_view to_string(Route route) noexcept {
    switch (route) {
        case Route::PathA: return "PathA";
        case Route::PathB: return "PathB";
        case Route::PathC: return "PathC";
        case Route::Global: return "Global";
    }
    return "Global";
}

std::optional<Route> parse_route(std::string_view token) {
    for (auto r : {Route::PathA, Route::PathB, Route::PathC, Route::Global}) {
        if (to_string(r) == token) {
            return r;
        }
    }
    return std::nullopt;
}

std::vector<std::size_t> find_whole_word(std::string_view haystack, std::string_view needle) {
    std::vector<std::size_t> hits;
    if (needle.empty() || needle.size() > haystack.size()) {
        return hits;
    }
    const bool exact = is_short_upper_token(needle);
    const std::string hay = exact ? std::string(haystack) : lowercase(haystack);
    const std::string pat = exact ? std::string(needle) : lowercase(needle);
    for (auto pos = hay.find(pat); pos != std::string::npos; pos = hay.find(pat, pos + 1)) {
        const auto end = pos + pat.size();
        // Boundaries only matter where the name itself starts/ends with a word character.
        const bool left_ok = pos == 0 || !is_word_byte(pat.front()) || !is_word_byte(hay[pos - 1]);
        const bool right_ok = end == hay.size() || !is_word_byte(pat.back()) || !is_word_byte(hay[end]);
        if (left_ok && right_ok) {
            hits.push_back(pos);
        }
    }
    return hits;
}

DocumentNames::DocumentNames(const Corpus& corpus) {
    for (const auto& doc : corpus.documents) {
        add(doc.title, doc.short_names);
    }
}

void DocumentNames::add(const std::string& title, std::span<const std::string> short_names) {
    auto insert = [this, &title](const std::string& name) {
        const bool dup = std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) {
            return e.name == name && e.title == title;
        });
        if (!dup && !name.empty()) {
            entries_.push_back({name, title});
        }
    };
    insert(title);
    for (const auto& s : short_names) {
        insert(s);
    }
}

std::vector<std::string> DocumentNames::known_names() const {
    std::set<std::string> names;
    for (const auto& e : entries_) {
        names.insert(e.name);
    }
    return {names.begin(), names.end()};
}

std::vector<std::string> DocumentNames::resolve(std::string_view hint) const {
    std::set<std::string> titles;
    for (const auto& e : entries_) {
        if (iequals(e.name, hint)) {
            titles.insert(e.title);
        }
    }
    if (titles.empty()) {
        for (const auto& e : entries_) {
            if (!find_whole_word(e.name, hint).empty()) {
                titles.insert(e.title);
            }
        }
    }
    return {titles.begin(), titles.end()};
}

std::set<std::string> DocumentNames::mentions(std::string_view query) const {
    std::set<std::string> titles;
    for (const auto& e : entries_) {
        if (!find_whole_word(query, e.name).empty()) {
            titles.insert(e.title);
        }
    }
    return titles;
}

std::vector<std::string> detect_entities(std::string_view query, const EntityRegistry& registry) {
    struct Match {
        std::size_t begin;
        std::size_t end;
        const std::string* canonical;
    };
    std::vector<Match> matches;
    auto collect = [&](const std::string& name, const std::string& canonical) {
        for (auto pos : find_whole_word(query, name)) {
            matches.push_back({pos, pos + name.size(), &canonical});
        }
    };
    for (const auto& entity : registry.entities) {
        collect(entity, entity);
    }
    for (const auto& [alias, target] : registry.aliases) {
        if (registry.contains(target)) {
            collect(alias, target);
        }
    }

    std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
        const auto la = a.end - a.begin;
        const auto lb = b.end - b.begin;
        return la != lb ? la > lb : a.begin < b.begin;
    });
    std::vector<Match> kept;
    for (const auto& m : matches) {
        const bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const Match& k) {
            return m.begin < k.end && k.begin < m.end;
        });
        if (!overlaps) {
            kept.push_back(m);
        }
    }
    std::sort(kept.begin(), kept.end(), [](const Match& a, const Match& b) { return a.begin < b.begin; });

    std::vector<std::string> entities;
    for (const auto& m : kept) {
        if (std::find(entities.begin(), entities.end(), *m.canonical) == entities.end()) {
            entities.push_back(*m.canonical);
        }
    }
    return entities;
}

std::string entity_extraction_prompt(std::string_view query, const EntityRegistry& registry) {
    std::ostringstream p;
    p << "Identify the jurisdictions that the query below refers to, including adjectival or "
         "alternative forms of their names.\n"
      << "Answer with a comma-separated list that uses only names from this list:\n";
    for (std::size_t i = 0; i < registry.entities.size(); ++i) {
        p << (i ? ", " : "") << registry.entities[i];
    }
    p << "\nIf no listed jurisdiction applies, answer NONE.\n\nQuery: " << query << "\n";
    return p.str();
}

std::vector<std::string> detect_entities_llm(std::string_view query, const EntityRegistry& registry,
                                             const CompletionModel& model) {
    const auto reply = model.complete(entity_extraction_prompt(query, registry));

    std::vector<std::string> pieces;
    std::string current;
    for (char c : reply) {
        if (c == ',' || c == ';' || c == '\n') {
            pieces.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    pieces.push_back(current);

    std::vector<std::string> entities;
    auto keep = [&entities](const std::string& name) {
        if (std::find(entities.begin(), entities.end(), name) == entities.end()) {
            entities.push_back(name);
        }
    };
    for (const auto& raw : pieces) {
        const auto name = strip_list_decoration(raw);
        if (name.empty()) {
            continue;
        }
        if (const auto it = std::find_if(registry.entities.begin(), registry.entities.end(),
                                         [&](const std::string& e) { return iequals(e, name); });
            it != registry.entities.end()) {
            keep(*it);
            continue;
        }
        for (const auto& [alias, target] : registry.aliases) {
            if (iequals(alias, name) && registry.contains(target)) {
                keep(target);
                break;
            }
        }
    }
    return entities;
}

std::optional<ArticleRef> extract_article_ref(std::string_view query,
                                              std::span<const std::string> known_names) {
    const auto lowered = lowercase(query);
    struct Hit {
        std::size_t token_end;
        std::string label;
    };
    std::vector<std::pair<std::size_t, Hit>> hits;

    for (const auto& kw : kUnitKeywords) {
        for (auto pos = lowered.find(kw.surface); pos != std::string::npos;
             pos = lowered.find(kw.surface, pos + 1)) {
            if (pos > 0 && is_word_byte(lowered[pos - 1])) {
                continue;
            }
            auto i = pos + kw.surface.size();
            const auto ws_start = i;
            while (i < query.size() && (query[i] == ' ' || query[i] == '\t')) ++i;
            if (kw.needs_space && i == ws_start) {
                continue;
            }
            if (i >= query.size() || !std::isdigit(static_cast<unsigned char>(query[i]))) {
                continue;
            }
            auto j = i;
            while (j < query.size()) {
                const auto c = static_cast<unsigned char>(query[j]);
                if (std::isalnum(c) || c == '(' || c == ')' || c == '.') {
                    ++j;
                } else {
                    break;
                }
            }
            auto token = std::string(query.substr(i, j - i));
            while (!token.empty() && token.back() == '.') token.pop_back();
            // drop an unbalanced trailing parenthesis ("(see Article 5)")
            if (!token.empty() && token.back() == ')' &&
                std::count(token.begin(), token.end(), '(') < std::count(token.begin(), token.end(), ')')) {
                token.pop_back();
            }
            hits.push_back({pos, Hit{i + token.size(), std::string(kw.canonical) + " " + token}});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    for (const auto& [pos, hit] : hits) {
        auto doc = longest_name(query.substr(hit.token_end), known_names);
        if (!doc) {
            doc = longest_name(query, known_names);
        }
        if (doc) {
            return ArticleRef{hit.label, doc->value};
        }
    }
    return std::nullopt;
}

Route classify_route(std::span<const std::string> entities, const std::optional<ArticleRef>& article_ref) {
    if (article_ref) return Route::PathA;
    if (entities.size() >= 2) return Route::PathC;
    if (entities.size() == 1) return Route::PathB;
    return Route::Global;
}

bool looks_comparative(std::string_view query) {
    const auto text = lowercase(query);
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_word_byte(text[i])) ++i;
        const auto start = i;
        while (i < text.size() && is_word_byte(text[i])) ++i;
        const std::string_view word(text.data() + start, i - start);
        if (word.starts_with("compar") || word.starts_with("differ") || word == "versus" ||
            word == "vs" || word.starts_with("contrast")) {
            return true;
        }
    }
    return false;
}

QueryAnalysis analyze_query(std::string_view query, const EntityRegistry& registry,
                            const DocumentNames& names, const CompletionModel* fallback) {
    QueryAnalysis a;
    a.raw_query = std::string(query);
    a.entities = detect_entities(query, registry);
    const auto known = names.known_names();
    a.article_ref = extract_article_ref(query, known);
    a.name_mentions = names.mentions(query);

    if (a.entities.empty() && !a.article_ref && fallback != nullptr) {
        try {
            a.entities = detect_entities_llm(query, registry, *fallback);
            a.used_llm_fallback = true;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::LlmUnavailable) {
                throw;
            }
        }
    }
    a.route = classify_route(a.entities, a.article_ref);
    return a;
}

}  // namespace jurirag
