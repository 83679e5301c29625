#include "jurirag/file_io.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "jurirag/error.hpp"

namespace jurirag {

namespace fs = std::filesystem;

namespace {

fs::path temp_sibling(const fs::path& path) {
    static std::atomic<unsigned> counter{0};
    auto name = path.filename().string();
    name += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
    return path.parent_path() / name;
}

void remove_quietly(const fs::path& path) {
    std::error_code ec;
    fs::remove(path, ec);
}

fs::path write_temp(const PendingFile& file) {
    const auto tmp = temp_sibling(file.path);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot open for writing: " + file.path.string());
    }
    try {
        file.produce(out);
        out.flush();
        if (!out) {
            throw Error(ErrorCode::Io, "write failed: " + file.path.string());
        }
        out.close();
    } catch (...) {
        out.close();
        remove_quietly(tmp);
        throw;
    }
    return tmp;
}

}  // namespace

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_files_atomic(const std::vector<PendingFile>& files) {
    std::vector<fs::path> temps;
    try {
        for (const auto& file : files) {
            temps.push_back(write_temp(file));
        }
    } catch (...) {
        for (const auto& tmp : temps) {
            remove_quietly(tmp);
        }
        throw;
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::error_code ec;
        fs::rename(temps[i], files[i].path, ec);
        if (ec) {
            for (std::size_t j = i; j < temps.size(); ++j) {
                remove_quietly(temps[j]);
            }
            throw Error(ErrorCode::Io, "cannot rename into place: " + files[i].path.string() + ": " +
                                           ec.message());
        }
    }
}

void write_file_atomic(const fs::path& path, const StreamProducer& produce) {
    write_files_atomic({PendingFile{path, produce}});
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    write_file_atomic(path, [&content](std::ostream& out) { out << content; });
}

}  // namespace jurirag
