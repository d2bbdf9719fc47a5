#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pathways/types.hpp"

namespace pathways {

struct TimePoint {
  int year = 0;
  double value = 0.0;
  bool operator==(const TimePoint&) const = default;
};

struct TimeSeries {
  std::string id;
  std::vector<TimePoint> points;  // strictly increasing years
};

// Linear trend anchored at the last fitted year.
struct ForecastModel {
  std::string series_id;
  double intercept = 0.0;  // fitted value at base_year
  double slope = 0.0;      // per year
  int base_year = 0;
  int window = 0;          // number of points actually fitted

  bool operator==(const ForecastModel&) const = default;
};

inline constexpr int kDefaultFitWindow = 8;

// Ordinary least squares over the last `window` points (all points when fewer exist).
ForecastModel fit_linear(const TimeSeries& series, int window = kDefaultFitWindow);

// Extrapolation clamped at zero.
double forecast(const ForecastModel& model, int year);

struct SeasonalSplit {
  double summer_share = 0.5;
  double winter_share() const { return 1.0 - summer_share; }
  bool operator==(const SeasonalSplit&) const = default;
};

struct QuarterValue {
  int year = 0;
  int quarter = 1;  // 1..4
  double value = 0.0;
};

using QuarterMask = std::array<bool, 4>;
inline constexpr QuarterMask kSummerQuarters{false, true, true, false};

SeasonalSplit fit_seasonal(std::span<const QuarterValue> quarterly,
                           const QuarterMask& summer_quarters = kSummerQuarters);

// Zero-intercept least squares of emissions (t CO2-eq) on activity (TJ),
// returned in kg CO2-eq per TJ and clamped at zero.
double calibrate_emission_factor(const TimeSeries& emissions, const TimeSeries& activity);

struct CalibrationSet {
  std::map<std::string, ForecastModel> forecasts;
  std::map<std::string, SeasonalSplit> seasonal;
  CarrierValues emission_factors{};  // kg CO2-eq per TJ of final consumption

  bool operator==(const CalibrationSet&) const = default;
};

// seriesId,intercept,slope,baseYear,window,summerShare
void write_calibration_csv(const CalibrationSet& calibration, std::ostream& out);

}  // namespace pathways
