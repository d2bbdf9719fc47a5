#include "pathways/error.hpp"

#include <cstdio>

namespace pathways {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::calibration_incomplete: return "calibration-incomplete";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::degenerate_series: return "degenerate-series";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::incomplete_simulation: return "incomplete-simulation";
    case ErrorCode::invalid_action: return "invalid-action";
    case ErrorCode::insufficient_budget: return "insufficient-budget";
    case ErrorCode::upgrade_cap: return "upgrade-cap";
    case ErrorCode::policy_limit: return "policy-limit";
    case ErrorCode::no_free_site: return "no-free-site";
    case ErrorCode::rejected_action: return "rejected-action";
    case ErrorCode::already_enacted: return "already-enacted";
    case ErrorCode::unknown_plant: return "unknown-plant";
    case ErrorCode::loan_cap: return "loan-cap";
    case ErrorCode::response_required: return "response-required";
    case ErrorCode::insufficient_supply: return "insufficient-supply";
    case ErrorCode::game_complete: return "game-complete";
    case ErrorCode::unknown_session: return "unknown-session";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::unauthorized: return "unauthorized";
    case ErrorCode::storage_error: return "storage-error";
    case ErrorCode::replay_divergence: return "replay-divergence";
  }
  return "unknown";
}

std::optional<ErrorCode> parse_error_code(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::replay_divergence); ++i) {
    const auto code = static_cast<ErrorCode>(i);
    if (to_string(code) == text) return code;
  }
  return std::nullopt;
}

namespace {

std::string supply_message(double summer, double winter) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "insufficient supply: summer surplus %.1f TJ, winter surplus %.1f TJ",
                summer, winter);
  return buf;
}

}  // namespace

InsufficientSupplyError::InsufficientSupplyError(double summer_surplus, double winter_surplus)
    : Error(ErrorCode::insufficient_supply, supply_message(summer_surplus, winter_surplus)),
      summer_(summer_surplus),
      winter_(winter_surplus) {}

}  // namespace pathways
