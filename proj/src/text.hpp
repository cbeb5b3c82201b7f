#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fairscope::text {

std::vector<std::string_view> SplitCsvLine(std::string_view line);
std::string_view Trim(std::string_view s);
std::string Lower(std::string_view s);
bool IEquals(std::string_view a, std::string_view b);

// Shortest representation that parses back to the same double.
std::string FormatDouble(double value);
// Compact human-readable form (%.6g) for log and evidence strings.
std::string FormatShort(double value);
// Strict: the whole field must be a finite or non-finite decimal number.
bool ParseDouble(std::string_view field, double& out);
bool ParseUint64(std::string_view field, std::uint64_t& out);

}  // namespace fairscope::text
