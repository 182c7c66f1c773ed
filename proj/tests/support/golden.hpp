#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "polyvm/service/wire.hpp"

/// Protocol transcripts: one JSON object per line,
///   {"request": {...}, "reply": {...}, "pushes": [...], "ticks": N}
/// Each request runs against a fresh VM shared by the whole file. After the
/// reply the VM ticks N times, or until nothing is runnable when "ticks" is
/// absent, and the pushes emitted meanwhile are compared. The string "<any>"
/// matches any value.
namespace polyvm::testing::golden {

using service::json;

struct Mismatch {
    std::string file;
    int line = 0;
    std::string what;
};

struct Report {
    int exchanges = 0;
    std::vector<std::string> ops;
    std::vector<Mismatch> mismatches;
    bool ok() const { return mismatches.empty() && exchanges > 0; }
};

bool matches(const json& expected, const json& actual);

Report run_file(const std::filesystem::path& path);
Report run_directory(const std::filesystem::path& dir);

/// Rewrites the replies and pushes of a transcript with what the server says now.
void record_file(const std::filesystem::path& path);

}  // namespace polyvm::testing::golden
