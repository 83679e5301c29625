#include "jurirag/corpus.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "jurirag/error.hpp"
#include "jurirag/file_io.hpp"
#include "jurirag/utf8.hpp"

namespace jurirag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::pair<Status, std::string_view> kStatusNames[] = {
    {Status::enacted, "enacted"},   {Status::proposed, "proposed"},
    {Status::draft, "draft"},       {Status::strategy, "strategy"},
    {Status::policy, "policy"},     {Status::white_paper, "white_paper"},
    {Status::other, "other"},
};

constexpr int kMinYear = 1900;
constexpr int kMaxYear = 2100;

[[noreturn]] void bad_record(std::size_t line_no, const std::string& what) {
    throw Error(ErrorCode::Parse, "manifest line " + std::to_string(line_no) + ": " + what);
}

template <typename T>
T required(const json& record, const char* key, std::size_t line_no) {
    const auto it = record.find(key);
    if (it == record.end()) {
        bad_record(line_no, std::string("missing field \"") + key + "\"");
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        bad_record(line_no, std::string("wrong type for field \"") + key + "\"");
    }
}

template <typename T>
T optional_field(const json& record, const char* key, T fallback, std::size_t line_no) {
    const auto it = record.find(key);
    if (it == record.end() || it->is_null()) {
        return fallback;
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        bad_record(line_no, std::string("wrong type for field \"") + key + "\"");
    }
}

EntityRegistry parse_registry(const json& record, std::size_t line_no) {
    EntityRegistry reg;
    reg.entities = required<std::vector<std::string>>(record, "entities", line_no);
    reg.aliases = optional_field<std::map<std::string, std::string>>(record, "aliases", {}, line_no);
    const auto members =
        optional_field<std::vector<std::string>>(record, "eu_member_states", {}, line_no);
    reg.eu_member_states = {members.begin(), members.end()};
    reg.eu_entity = optional_field<std::string>(record, "eu_entity", "", line_no);
    return reg;
}

std::vector<StructureMarker> parse_markers(const json& value, std::size_t line_no) {
    if (!value.is_array()) {
        bad_record(line_no, "structure_markers must be an array");
    }
    std::vector<StructureMarker> markers;
    for (const auto& entry : value) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
            !entry[1].is_number_unsigned()) {
            bad_record(line_no, "structure marker must be [label, offset]");
        }
        markers.push_back({entry[0].get<std::string>(), entry[1].get<std::size_t>()});
    }
    return markers;
}

json registry_record(const EntityRegistry& reg) {
    json body;
    body["entities"] = reg.entities;
    body["aliases"] = reg.aliases;
    body["eu_member_states"] = std::vector<std::string>(reg.eu_member_states.begin(),
                                                        reg.eu_member_states.end());
    body["eu_entity"] = reg.eu_entity;
    return json{{"registry", body}};
}

std::string effective_path(const Document& doc) {
    return doc.path.empty() ? doc.id + ".txt" : doc.path;
}

json document_record(const Document& doc) {
    json rec;
    rec["id"] = doc.id;
    rec["entity"] = doc.entity;
    rec["region"] = doc.region;
    rec["title"] = doc.title;
    rec["year"] = doc.year;
    rec["language"] = doc.language;
    rec["status"] = to_string(doc.status);
    rec["doc_type"] = to_string(doc.doc_type);
    rec["path"] = effective_path(doc);
    if (!doc.short_names.empty()) {
        rec["short_names"] = doc.short_names;
    }
    if (doc.structure_markers) {
        json markers = json::array();
        for (const auto& m : *doc.structure_markers) {
            markers.push_back(json::array({m.label, m.offset}));
        }
        rec["structure_markers"] = markers;
    }
    return rec;
}

}  // namespace

std::string_view to_string(Status status) noexcept {
    for (const auto& [value, name] : kStatusNames) {
        if (value == status) {
            return name;
        }
    }
    return "other";
}

std::string_view to_string(DocType type) noexcept {
    return type == DocType::structured ? "structured" : "unstructured";
}

std::optional<Status> parse_status(std::string_view token) {
    for (const auto& [value, name] : kStatusNames) {
        if (name == token) {
            return value;
        }
    }
    return std::nullopt;
}

std::optional<DocType> parse_doc_type(std::string_view token) {
    if (token == "structured") return DocType::structured;
    if (token == "unstructured") return DocType::unstructured;
    return std::nullopt;
}

std::string_view to_string(ViolationKind kind) noexcept {
    switch (kind) {
        case ViolationKind::EmptyId: return "EmptyId";
        case ViolationKind::DuplicateId: return "DuplicateId";
        case ViolationKind::YearOutOfRange: return "YearOutOfRange";
        case ViolationKind::UnknownEntity: return "UnknownEntity";
        case ViolationKind::MissingMarkers: return "MissingMarkers";
        case ViolationKind::NonMonotonicMarkers: return "NonMonotonicMarkers";
        case ViolationKind::MarkerOutOfRange: return "MarkerOutOfRange";
        case ViolationKind::AliasTargetUnknown: return "AliasTargetUnknown";
        case ViolationKind::EuMemberUnknown: return "EuMemberUnknown";
        case ViolationKind::EuEntityUnknown: return "EuEntityUnknown";
    }
    return "Unknown";
}

bool EntityRegistry::contains(std::string_view entity) const {
    return std::find(entities.begin(), entities.end(), entity) != entities.end();
}

bool EntityRegistry::is_eu_member(std::string_view entity) const {
    return eu_member_states.count(std::string(entity)) > 0;
}

const Document* Corpus::find(std::string_view id) const {
    const auto it = std::find_if(documents.begin(), documents.end(),
                                 [id](const Document& d) { return d.id == id; });
    return it == documents.end() ? nullptr : &*it;
}

ValidationReport validate_corpus(const Corpus& corpus) {
    ValidationReport report;
    const auto& reg = corpus.registry;

    for (const auto& [alias, target] : reg.aliases) {
        if (!reg.contains(target)) {
            report.push_back({ViolationKind::AliasTargetUnknown, "",
                              "alias \"" + alias + "\" maps to unknown entity \"" + target + "\""});
        }
    }
    for (const auto& member : reg.eu_member_states) {
        if (!reg.contains(member)) {
            report.push_back({ViolationKind::EuMemberUnknown, "",
                              "EU member \"" + member + "\" is not a registered entity"});
        }
    }
    if ((!reg.eu_entity.empty() || !reg.eu_member_states.empty()) && !reg.contains(reg.eu_entity)) {
        report.push_back({ViolationKind::EuEntityUnknown, "",
                          "EU entity \"" + reg.eu_entity + "\" is not a registered entity"});
    }

    std::set<std::string> seen;
    for (const auto& doc : corpus.documents) {
        if (doc.id.empty()) {
            report.push_back({ViolationKind::EmptyId, doc.id, "document id is empty"});
        } else if (!seen.insert(doc.id).second) {
            report.push_back({ViolationKind::DuplicateId, doc.id, "duplicate document id"});
        }
        if (doc.year < kMinYear || doc.year > kMaxYear) {
            report.push_back({ViolationKind::YearOutOfRange, doc.id,
                              "year " + std::to_string(doc.year) + " outside [1900, 2100]"});
        }
        if (!reg.contains(doc.entity)) {
            report.push_back({ViolationKind::UnknownEntity, doc.id,
                              "entity \"" + doc.entity + "\" is not in the registry"});
        }
        if (doc.doc_type != DocType::structured) {
            continue;
        }
        if (!doc.structure_markers || doc.structure_markers->empty()) {
            report.push_back({ViolationKind::MissingMarkers, doc.id,
                              "structured document has no structure markers"});
            continue;
        }
        const auto body_len = utf8::length(doc.body);
        const auto& markers = *doc.structure_markers;
        for (std::size_t i = 0; i < markers.size(); ++i) {
            if (i > 0 && markers[i].offset <= markers[i - 1].offset) {
                report.push_back({ViolationKind::NonMonotonicMarkers, doc.id,
                                  "marker \"" + markers[i].label + "\" at " +
                                      std::to_string(markers[i].offset) + " does not follow " +
                                      std::to_string(markers[i - 1].offset)});
            }
            if (markers[i].offset >= body_len) {
                report.push_back({ViolationKind::MarkerOutOfRange, doc.id,
                                  "marker \"" + markers[i].label + "\" at " +
                                      std::to_string(markers[i].offset) + " is beyond body length " +
                                      std::to_string(body_len)});
            }
        }
    }
    return report;
}

Corpus load_manifest(const fs::path& manifest_path) {
    if (!fs::exists(manifest_path)) {
        throw Error(ErrorCode::Io, "manifest not found: " + manifest_path.string());
    }
    std::istringstream lines(read_file(manifest_path));
    const auto base = manifest_path.parent_path();

    Corpus corpus;
    bool have_registry = false;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            bad_record(line_no, e.what());
        }
        if (!record.is_object()) {
            bad_record(line_no, "record is not an object");
        }
        if (!have_registry) {
            if (!record.contains("registry")) {
                bad_record(line_no, "first record must be the registry");
            }
            corpus.registry = parse_registry(record["registry"], line_no);
            have_registry = true;
            continue;
        }

        Document doc;
        doc.id = required<std::string>(record, "id", line_no);
        if (!ids.insert(doc.id).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate document id \"" + doc.id + "\"");
        }
        doc.entity = required<std::string>(record, "entity", line_no);
        if (!corpus.registry.contains(doc.entity)) {
            throw Error(ErrorCode::UnknownEntity,
                        "document \"" + doc.id + "\" has undeclared entity \"" + doc.entity + "\"");
        }
        doc.region = optional_field<std::string>(record, "region", "", line_no);
        doc.title = required<std::string>(record, "title", line_no);
        doc.year = required<int>(record, "year", line_no);
        doc.language = optional_field<std::string>(record, "language", "", line_no);

        const auto status_token = required<std::string>(record, "status", line_no);
        const auto status = parse_status(status_token);
        if (!status) {
            throw Error(ErrorCode::UnknownToken, "document \"" + doc.id + "\": unknown status \"" +
                                                     status_token + "\"");
        }
        doc.status = *status;

        const auto type_token = required<std::string>(record, "doc_type", line_no);
        const auto type = parse_doc_type(type_token);
        if (!type) {
            throw Error(ErrorCode::UnknownToken, "document \"" + doc.id +
                                                     "\": unknown doc_type \"" + type_token + "\"");
        }
        doc.doc_type = *type;

        if (const auto it = record.find("structure_markers"); it != record.end() && !it->is_null()) {
            doc.structure_markers = parse_markers(*it, line_no);
        }
        if (doc.doc_type == DocType::structured &&
            (!doc.structure_markers || doc.structure_markers->empty())) {
            throw Error(ErrorCode::MissingMarkers,
                        "structured document \"" + doc.id + "\" has no structure_markers");
        }
        doc.short_names = optional_field<std::vector<std::string>>(record, "short_names", {}, line_no);

        doc.path = required<std::string>(record, "path", line_no);
        doc.body = read_file(base / doc.path);
        utf8::decode(doc.body);  // rejects malformed text early

        corpus.documents.push_back(std::move(doc));
    }
    if (!have_registry) {
        throw Error(ErrorCode::Parse, "manifest has no registry record: " + manifest_path.string());
    }
    return corpus;
}

void save_manifest(const Corpus& corpus, const fs::path& manifest_path) {
    const auto base = manifest_path.parent_path();
    std::vector<PendingFile> files;
    for (const auto& doc : corpus.documents) {
        const auto target = base / effective_path(doc);
        fs::create_directories(target.parent_path());
        files.push_back({target, [&doc](std::ostream& out) { out << doc.body; }});
    }
    files.push_back({manifest_path, [&corpus](std::ostream& out) {
                         out << registry_record(corpus.registry).dump() << '\n';
                         for (const auto& doc : corpus.documents) {
                             out << document_record(doc).dump() << '\n';
                         }
                     }});
    write_files_atomic(files);
}

}  // namespace jurirag
