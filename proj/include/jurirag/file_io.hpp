#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace jurirag {

std::string read_file(const std::filesystem::path& path);

using StreamProducer = std::function<void(std::ostream&)>;

/// Streams content into a sibling temp file and renames it over `path` only
/// after the producer returns and the stream flushes cleanly. If anything
/// throws, the temp file is removed and `path` is left untouched.
void write_file_atomic(const std::filesystem::path& path, const StreamProducer& produce);
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct PendingFile {
    std::filesystem::path path;
    StreamProducer produce;
};

/// All-or-nothing publication of several files: every temp file is fully
/// written before the first rename.
void write_files_atomic(const std::vector<PendingFile>& files);

}  // namespace jurirag
