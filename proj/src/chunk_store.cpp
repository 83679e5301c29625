#include "jurirag/chunk_store.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "jurirag/error.hpp"
#include "jurirag/file_io.hpp"

namespace jurirag {

using nlohmann::json;

void to_json(json& j, const Chunk& chunk) {
    j = json{{"chunk_id", chunk.chunk_id}, {"doc_id", chunk.doc_id},
             {"entity", chunk.entity},     {"title", chunk.title},
             {"year", chunk.year},         {"language", chunk.language},
             {"status", to_string(chunk.status)},
             {"ordinal", chunk.ordinal},   {"offset", chunk.offset},
             {"overlap", chunk.overlap},   {"text", chunk.text}};
    if (chunk.structural_ref) {
        j["structural_ref"] = *chunk.structural_ref;
    }
}

void from_json(const json& j, Chunk& chunk) {
    chunk.chunk_id = j.at("chunk_id").get<std::string>();
    chunk.doc_id = j.at("doc_id").get<std::string>();
    chunk.entity = j.at("entity").get<std::string>();
    chunk.title = j.at("title").get<std::string>();
    chunk.year = j.at("year").get<int>();
    chunk.language = j.value("language", "");
    const auto status = parse_status(j.at("status").get<std::string>());
    if (!status) {
        throw Error(ErrorCode::UnknownToken, "chunk \"" + chunk.chunk_id + "\" has unknown status");
    }
    chunk.status = *status;
    if (const auto it = j.find("structural_ref"); it != j.end() && !it->is_null()) {
        chunk.structural_ref = it->get<std::string>();
    } else {
        chunk.structural_ref.reset();
    }
    chunk.ordinal = j.at("ordinal").get<std::size_t>();
    chunk.offset = j.value("offset", std::size_t{0});
    chunk.overlap = j.value("overlap", std::size_t{0});
    chunk.text = j.at("text").get<std::string>();
}

void write_chunk_store(const std::filesystem::path& path, std::span<const Chunk> chunks) {
    write_file_atomic(path, [chunks](std::ostream& out) {
        for (const auto& chunk : chunks) {
            out << json(chunk).dump() << '\n';
        }
    });
}

std::vector<Chunk> read_chunk_store(const std::filesystem::path& path) {
    std::istringstream lines(read_file(path));
    std::vector<Chunk> chunks;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            chunks.push_back(json::parse(line).get<Chunk>());
        } catch (const json::exception& e) {
            throw Error(ErrorCode::BadFormat, path.string() + ":" + std::to_string(line_no) + ": " +
                                                  e.what());
        }
    }
    return chunks;
}

}  // namespace jurirag
