#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "pathways/bundled.hpp"
#include "pathways/error.hpp"
#include "pathways/scenario.hpp"
#include "support.hpp"

using namespace pathways;

namespace {

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  return s;
}

CalibrationSet history(const std::string& text) {
  std::istringstream in(text);
  return load_history(in, "h.csv");
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("bundled scenario loads completely") {
  const Scenario& sc = bundled_scenario();
  CHECK(sc.base_year == 2022);
  for (TechnologyKind k : all_values<TechnologyKind>()) {
    CHECK(sc.capacity[k] > 0.0);
    CHECK(sc.splits.supply[k].has_value());
    CHECK_NOTHROW(validate(sc.technologies[k]));
  }
  for (Sector s : all_values<Sector>()) CHECK(sc.splits.demand[s].has_value());
  CHECK(sc.loss_rates[CarrierKind::electricity] > 0.0);
  CHECK(sc.calibration.emission_factors[CarrierKind::heatingOil] > 0.0);
}

TEST_CASE("file and bundled copies agree") {
  CHECK(load_scenario(std::filesystem::path(test::data_path("scenario-ch-2022.csv"))) == bundled_scenario());
}

TEST_CASE("row order does not matter") {
  auto lines = lines_of(bundled::scenario_csv());
  const auto header = std::find(lines.begin(), lines.end(), "series,year,value,unit");
  REQUIRE(header != lines.end());
  const CalibrationSet reference = history(join(lines));
  std::mt19937_64 rng(5);
  for (int i = 0; i < 3; ++i) {
    std::shuffle(header + 1, lines.end(), rng);
    CHECK(history(join(lines)) == reference);
  }
}

TEST_CASE("transformation capacities are not forecast") {
  const CalibrationSet cal = history(std::string(bundled::scenario_csv()));
  for (const auto& [id, m] : cal.forecasts) {
    CHECK(id.rfind("capacity.", 0) != 0);
    CHECK(id.rfind("tech.", 0) != 0);
  }
}

TEST_CASE("truncated file names the broken line") {
  auto lines = lines_of(bundled::scenario_csv());
  lines.resize(lines.size() / 2);
  lines.back() = lines.back().substr(0, lines.back().find(',') + 3);
  try {
    history(join(lines));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == lines.size());
    CHECK(std::string(e.what()).find("h.csv:" + std::to_string(lines.size())) == 0);
  }
}

TEST_CASE("malformed rows") {
  const std::string head = "series,year,value,unit\n";
  CHECK_THROWS_AS(history(""), ParseError);
  CHECK_THROWS_AS(history("year,series\n"), ParseError);
  CHECK_THROWS_AS(history(head + "consumption.electricity.households,20x2,1,TJ\n"), ParseError);
  CHECK_THROWS_AS(history(head + "consumption.electricity.households,2022,abc,TJ\n"), ParseError);
  CHECK_THROWS_AS(history(head + "consumption.electricity.households,2022,1,GWh\n"), ParseError);
  CHECK_THROWS_AS(history(head + "mystery.series,2022,1,TJ\n"), ParseError);
  CHECK_THROWS_AS(history(head + "quarterly.supply.solar.Q5,2022,1,TJ\n"), ParseError);
  try {
    history(head + "# note\n\nconsumption.electricity.households,2021,1,TJ\nconsumption.electricity.households,2021,2,TJ\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
}

TEST_CASE("missing declared series is reported by name") {
  auto lines = lines_of(bundled::scenario_csv());
  std::erase_if(lines, [](const std::string& l) { return l.rfind("quarterly.supply.wind.", 0) == 0; });
  try {
    history(join(lines));
    FAIL("expected calibration-incomplete");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::calibration_incomplete);
    CHECK(std::string(e.what()).find("quarterly.supply.wind") != std::string::npos);
  }

  lines = lines_of(bundled::scenario_csv());
  std::erase_if(lines, [](const std::string& l) { return l.rfind("consumption.electricity.industry,", 0) == 0; });
  CHECK_THROWS_WITH_AS(history(join(lines)), doctest::Contains("consumption.electricity.industry"), Error);
}

TEST_CASE("forecast inputs follow the fitted trends") {
  const Scenario& sc = bundled_scenario();
  const auto in = forecast_inputs(sc.calibration, 2035);
  const auto& m = sc.calibration.forecasts.at(consumption_series(CarrierKind::electricity, Sector::households));
  CHECK(in.consumption[CarrierKind::electricity][Sector::households] ==
        doctest::Approx(m.intercept + m.slope * (2035 - m.base_year)));
  CHECK(in.consumption[CarrierKind::nuclearFuel][Sector::households] == 0.0);
}

TEST_CASE("fuel-burning technologies draw their input carrier") {
  CHECK(input_carrier_of(TechnologyKind::gas) == CarrierKind::gas);
  CHECK(input_carrier_of(TechnologyKind::biomass) == CarrierKind::wood);
  CHECK(input_carrier_of(TechnologyKind::nuclear) == CarrierKind::nuclearFuel);
  CHECK(input_carrier_of(TechnologyKind::solar) == CarrierKind::ambientRenewable);
}

TEST_CASE("bundled starting year closes") {
  const Scenario& sc = bundled_scenario();
  std::vector<FleetEntry> fleet;
  for (TechnologyKind k : all_values<TechnologyKind>()) fleet.push_back({sc.technologies[k], sc.capacity[k]});
  for (int year = 2022; year <= 2050; ++year) {
    const auto b = build_annual_balance(year, forecast_inputs(sc.calibration, year), fleet, sc.loss_rates);
    CHECK(b.max_relative_residual() < 1e-9);
  }
}

}  // TEST_SUITE
