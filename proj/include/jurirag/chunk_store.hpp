#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jurirag/chunker.hpp"

namespace jurirag {

// ADL hooks for nlohmann::json. Absent structural references are omitted
// rather than written as empty strings.
void to_json(nlohmann::json& j, const Chunk& chunk);
void from_json(const nlohmann::json& j, Chunk& chunk);

/// Line-delimited chunk records, written atomically.
void write_chunk_store(const std::filesystem::path& path, std::span<const Chunk> chunks);
std::vector<Chunk> read_chunk_store(const std::filesystem::path& path);

}  // namespace jurirag
