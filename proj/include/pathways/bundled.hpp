#pragma once

#include <optional>
#include <string_view>
#include <vector>

// Data files compiled into the library so the tools run without a data directory.
namespace pathways::bundled {

std::string_view scenario_csv();
std::string_view parameters_text();
std::optional<std::string_view> script(std::string_view name);
std::vector<std::string_view> script_names();

}  // namespace pathways::bundled
