#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pathways/balance.hpp"
#include "pathways/calibration.hpp"

namespace pathways {

// One data row of the scenario CSV (`series,year,value,unit`).
struct ScenarioRow {
  std::string series;
  int year = 0;
  double value = 0.0;
  std::string unit;
  std::size_t line = 0;
};

std::vector<ScenarioRow> parse_scenario_csv(std::istream& in, const std::string& source);

// Fits every time series, seasonal profile and emission factor in the file.
CalibrationSet calibrate(const std::vector<ScenarioRow>& rows);
CalibrationSet load_history(std::istream& in, const std::string& source);
CalibrationSet load_history(const std::filesystem::path& path);

// Input fuel drawn by each technology.
std::optional<CarrierKind> input_carrier_of(TechnologyKind kind);

struct Scenario {
  int base_year = kFirstModelYear;
  CalibrationSet calibration;
  EnumArray<TechnologyKind, TechParams> technologies{};
  TechValues capacity{};  // installed in the base year, held constant
  CarrierValues loss_rates{};
  SeasonalSplits splits;

  bool operator==(const Scenario& other) const {
    return base_year == other.base_year && calibration == other.calibration &&
           technologies == other.technologies && capacity == other.capacity &&
           loss_rates == other.loss_rates;
  }
};

Scenario load_scenario(std::istream& in, const std::string& source);
Scenario load_scenario(const std::filesystem::path& path);
const Scenario& bundled_scenario();

// Forecast final consumption, domestic production and stock change for a year.
BalanceInputs forecast_inputs(const CalibrationSet& calibration, int year);

// Series-id helpers shared by the loader and writers.
std::string consumption_series(CarrierKind carrier, Sector sector);
std::string supply_split_key(TechnologyKind kind);
std::string demand_split_key(Sector sector);

}  // namespace pathways
