#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pathways {

// Shortest representation that round-trips; stable across runs.
std::string format_number(double value);

std::string_view trim(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);

bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, int& out);

// UTC ISO-8601 with millisecond precision, e.g. 2026-10-16T09:30:00.123Z
std::string utc_now_iso8601();

}  // namespace pathways
