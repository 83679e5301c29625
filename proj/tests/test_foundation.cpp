#include <gtest/gtest.h>

#include <fstream>
#include <stdexcept>

#include "jurirag/error.hpp"
#include "jurirag/file_io.hpp"
#include "jurirag/utf8.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace jurirag;
using jurirag::testing::TempDir;

namespace {

std::size_t files_in(const fs::path& dir) {
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
    return n;
}

}  // namespace

TEST(Utf8, RoundTripsMixedScripts) {
    const std::string s = "Künstliche Intelligenz — § 5 日本 😀";
    const auto scalars = utf8::decode(s);
    EXPECT_EQ(utf8::encode(scalars), s);
    EXPECT_EQ(utf8::length(s), scalars.size());
    EXPECT_EQ(scalars.size(), 33u);
}

TEST(Utf8, RejectsMalformedInput) {
    EXPECT_THROW(utf8::decode("\xC3"), Error);             // truncated
    EXPECT_THROW(utf8::decode("a\x80"), Error);            // stray continuation
    EXPECT_THROW(utf8::decode("\xC0\xAF"), Error);         // overlong
    EXPECT_THROW(utf8::decode("\xED\xA0\x80"), Error);     // surrogate
    EXPECT_THROW(utf8::decode("\xF4\x90\x80\x80"), Error); // > U+10FFFF
    try {
        utf8::decode("ok\xFF");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Parse);
    }
}

TEST(ErrorCodes, HaveStableNames) {
    EXPECT_EQ(to_string(ErrorCode::EmptyText), "EmptyText");
    EXPECT_EQ(to_string(ErrorCode::LlmUnavailable), "LlmUnavailable");
    const Error e(ErrorCode::NoClaims, "nothing");
    EXPECT_EQ(e.code(), ErrorCode::NoClaims);
}

TEST(AtomicWrite, PublishesCompleteContent) {
    TempDir dir;
    const auto path = dir / "out.txt";
    write_file_atomic(path, std::string("hello"));
    EXPECT_EQ(read_file(path), "hello");
    write_file_atomic(path, std::string("replaced"));
    EXPECT_EQ(read_file(path), "replaced");
    EXPECT_EQ(files_in(dir.path()), 1u);
}

TEST(AtomicWrite, FailureMidWriteLeavesNothingBehind) {
    TempDir dir;
    const auto path = dir / "report.json";
    EXPECT_THROW(write_file_atomic(path,
                                   [](std::ostream& out) {
                                       out << "{\"partial\": ";
                                       throw std::runtime_error("injected");
                                   }),
                 std::runtime_error);
    EXPECT_FALSE(fs::exists(path));
    EXPECT_EQ(files_in(dir.path()), 0u);
}

TEST(AtomicWrite, FailureKeepsPreviousVersion) {
    TempDir dir;
    const auto path = dir / "index.jrix";
    write_file_atomic(path, std::string("v1"));
    EXPECT_THROW(write_file_atomic(path, [](std::ostream&) { throw std::runtime_error("x"); }),
                 std::runtime_error);
    EXPECT_EQ(read_file(path), "v1");
    EXPECT_EQ(files_in(dir.path()), 1u);
}

TEST(AtomicWrite, MultiFileIsAllOrNothing) {
    TempDir dir;
    std::vector<PendingFile> files{
        {dir / "a", [](std::ostream& o) { o << "A"; }},
        {dir / "b", [](std::ostream&) { throw std::runtime_error("second file fails"); }},
    };
    EXPECT_THROW(write_files_atomic(files), std::runtime_error);
    EXPECT_EQ(files_in(dir.path()), 0u);

    files[1].produce = [](std::ostream& o) { o << "B"; };
    write_files_atomic(files);
    EXPECT_EQ(read_file(dir / "a"), "A");
    EXPECT_EQ(read_file(dir / "b"), "B");
}

TEST(AtomicWrite, UnwritableDirectoryIsIoError) {
    try {
        write_file_atomic("/nonexistent-dir/x/report.json", std::string("x"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Io);
    }
}

TEST(ReadFile, MissingFileIsIoError) {
    try {
        read_file("/definitely/not/here.txt");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Io);
    }
}
