// CSV export/import of simulation logs.
//
// Layout: `#`-prefixed metadata lines (`# key: value`), one header line with
// the names from log_columns(), then one row per control tick. Numbers are
// written in shortest round-trip form, so export -> import is exact.
#pragma once

#include "usv/simulator.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace usv {

inline constexpr const char* kVersion = "0.1.0";

const std::vector<std::string>& log_columns();

// Shortest decimal form that parses back to the same double.
std::string format_number(double v);

std::string log_to_csv(const SimLog& log);
SimLog log_from_csv(const std::string& text, const std::string& origin = "<string>");

void write_log_csv(const std::filesystem::path& path, const SimLog& log);
SimLog read_log_csv(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace usv
