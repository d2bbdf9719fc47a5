#include "pathways/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "pathways/error.hpp"
#include "pathways/format.hpp"

namespace pathways {

ForecastModel fit_linear(const TimeSeries& series, int window) {
  if (window < 2) {
    throw Error(ErrorCode::invalid_parameter, "fit window must be at least 2");
  }
  const auto& pts = series.points;
  if (pts.size() < 2) {
    throw Error(ErrorCode::insufficient_data,
                "series " + series.id + " needs at least 2 points, has " + std::to_string(pts.size()));
  }
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].year <= pts[i - 1].year) {
      throw Error(ErrorCode::invalid_parameter, "series " + series.id + " years must be strictly increasing");
    }
  }

  const std::size_t n = std::min<std::size_t>(pts.size(), static_cast<std::size_t>(window));
  const auto fitted = std::span(pts).last(n);
  const int base_year = fitted.back().year;

  // Centered sums keep the fit well conditioned for calendar-year abscissae.
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& p : fitted) {
    mean_x += p.year - base_year;
    mean_y += p.value;
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& p : fitted) {
    const double dx = (p.year - base_year) - mean_x;
    sxy += dx * (p.value - mean_y);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;

  ForecastModel model;
  model.series_id = series.id;
  model.slope = slope;
  model.intercept = mean_y - slope * mean_x;
  model.base_year = base_year;
  model.window = static_cast<int>(n);
  return model;
}

double forecast(const ForecastModel& model, int year) {
  return std::max(0.0, model.intercept + model.slope * (year - model.base_year));
}

SeasonalSplit fit_seasonal(std::span<const QuarterValue> quarterly, const QuarterMask& summer_quarters) {
  std::map<int, std::set<int>> quarters_by_year;
  double summer = 0.0;
  double total = 0.0;
  for (const auto& q : quarterly) {
    if (q.quarter < 1 || q.quarter > 4) {
      throw Error(ErrorCode::invalid_parameter, "quarter must lie in 1..4, got " + std::to_string(q.quarter));
    }
    if (!(q.value >= 0.0)) {
      throw Error(ErrorCode::invalid_parameter, "quarterly values must be non-negative");
    }
    quarters_by_year[q.year].insert(q.quarter);
    total += q.value;
    if (summer_quarters[static_cast<std::size_t>(q.quarter - 1)]) summer += q.value;
  }
  const bool full_year = std::any_of(quarters_by_year.begin(), quarters_by_year.end(),
                                     [](const auto& kv) { return kv.second.size() == 4; });
  if (quarterly.size() < 4 || !full_year) {
    throw Error(ErrorCode::insufficient_data, "seasonal fit needs at least one full year of quarters");
  }
  if (total == 0.0) {
    throw Error(ErrorCode::degenerate_series, "seasonal fit over an all-zero series");
  }
  return SeasonalSplit{summer / total};
}

double calibrate_emission_factor(const TimeSeries& emissions, const TimeSeries& activity) {
  std::map<int, double> act;
  for (const auto& p : activity.points) act[p.year] = p.value;

  double sxy = 0.0;
  double sxx = 0.0;
  int overlap = 0;
  for (const auto& p : emissions.points) {
    const auto it = act.find(p.year);
    if (it == act.end()) continue;
    sxy += it->second * p.value;
    sxx += it->second * it->second;
    ++overlap;
  }
  if (overlap < 2) {
    throw Error(ErrorCode::insufficient_data, "emission factor " + emissions.id +
                                                  " needs at least 2 overlapping years, has " +
                                                  std::to_string(overlap));
  }
  if (sxx == 0.0) return 0.0;
  constexpr double kKgPerTonne = 1000.0;
  return std::max(0.0, sxy / sxx * kKgPerTonne);
}

void write_calibration_csv(const CalibrationSet& calibration, std::ostream& out) {
  out << "seriesId,intercept,slope,baseYear,window,summerShare\n";
  for (const auto& [id, m] : calibration.forecasts) {
    out << id << ',' << format_number(m.intercept) << ',' << format_number(m.slope) << ',' << m.base_year
        << ',' << m.window << ",\n";
  }
  for (const auto& [id, s] : calibration.seasonal) {
    out << id << ",,,,," << format_number(s.summer_share) << '\n';
  }
  for (CarrierKind c : all_values<CarrierKind>()) {
    if (calibration.emission_factors[c] == 0.0) continue;
    out << "emissionFactor." << to_string(c) << ',' << format_number(calibration.emission_factors[c])
        << ",,,,\n";
  }
}

}  // namespace pathways
