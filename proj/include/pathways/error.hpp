#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pathways {

enum class ErrorCode {
  invalid_parameter,
  calibration_incomplete,
  insufficient_data,
  degenerate_series,
  parse_error,
  incomplete_simulation,
  invalid_action,
  insufficient_budget,
  upgrade_cap,
  policy_limit,
  no_free_site,
  rejected_action,
  already_enacted,
  unknown_plant,
  loan_cap,
  response_required,
  insufficient_supply,
  game_complete,
  unknown_session,
  conflict,
  unauthorized,
  storage_error,
  replay_divergence,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> parse_error_code(std::string_view text);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& message)
      : Error(ErrorCode::parse_error, source + ":" + std::to_string(line) + ": " + message),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

// Raised when a turn cannot be closed because a season runs short.
class InsufficientSupplyError : public Error {
 public:
  InsufficientSupplyError(double summer_surplus, double winter_surplus);

  double summer_surplus() const noexcept { return summer_; }
  double winter_surplus() const noexcept { return winter_; }

 private:
  double summer_;
  double winter_;
};

}  // namespace pathways
