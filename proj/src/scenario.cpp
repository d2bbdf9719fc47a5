#include "pathways/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "pathways/bundled.hpp"
#include "pathways/error.hpp"
#include "pathways/format.hpp"

namespace pathways {

namespace {

constexpr std::string_view kHeader = "series,year,value,unit";

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

// Expected unit for a series id, by prefix or suffix.
std::string_view expected_unit(std::string_view series) {
  if (starts_with(series, "emissions.")) return "t";
  if (starts_with(series, "loss.")) return "ratio";
  if (starts_with(series, "tech.")) {
    if (series.ends_with(".efficiency")) return "ratio";
    if (series.ends_with(".landUse")) return "km2/TJ";
    if (series.ends_with(".emission")) return "kg/TJ";
    if (series.ends_with(".cost")) return "CHF/TJ";
    return {};
  }
  if (starts_with(series, "consumption.") || starts_with(series, "production.") ||
      starts_with(series, "stock.") || starts_with(series, "capacity.") || starts_with(series, "quarterly.")) {
    return "TJ";
  }
  return {};
}

struct SeriesKey {
  std::string id;
  std::size_t first_line = 0;
};

struct GroupedRows {
  std::map<std::string, TimeSeries> series;                       // annual
  std::map<std::string, std::vector<QuarterValue>> quarterly;     // keyed by split key
  std::map<std::string, std::pair<int, double>> scalars;          // latest year wins
};

GroupedRows group(const std::vector<ScenarioRow>& rows) {
  GroupedRows g;
  std::map<std::string, std::map<int, double>> annual;
  for (const auto& row : rows) {
    const std::string_view id = row.series;
    if (starts_with(id, "quarterly.")) {
      const auto dot = id.rfind('.');
      const auto q = id.substr(dot + 1);
      if (q.size() != 2 || q[0] != 'Q' || q[1] < '1' || q[1] > '4') {
        throw ParseError("scenario", row.line, "quarterly series must end in .Q1..Q4: " + row.series);
      }
      g.quarterly[std::string(id.substr(10, dot - 10))].push_back(
          QuarterValue{row.year, q[1] - '0', row.value});
    } else if (starts_with(id, "loss.") || starts_with(id, "capacity.") || starts_with(id, "tech.")) {
      auto& slot = g.scalars[row.series];
      if (slot.first <= row.year) slot = {row.year, row.value};
    } else {
      annual[row.series][row.year] = row.value;
    }
  }
  for (auto& [key, quarters] : g.quarterly) {
    std::sort(quarters.begin(), quarters.end(), [](const QuarterValue& a, const QuarterValue& b) {
      return std::tie(a.year, a.quarter) < std::tie(b.year, b.quarter);
    });
  }
  for (auto& [id, points] : annual) {
    TimeSeries ts{id, {}};
    for (const auto& [year, value] : points) ts.points.push_back({year, value});
    g.series.emplace(id, std::move(ts));
  }
  return g;
}

void require(bool present, const std::string& series) {
  if (!present) throw Error(ErrorCode::calibration_incomplete, "missing series " + series);
}

double scalar(const GroupedRows& g, const std::string& id) {
  const auto it = g.scalars.find(id);
  require(it != g.scalars.end(), id);
  return it->second.second;
}

constexpr std::array<CarrierKind, 4> kFossilCarriers{CarrierKind::heatingOil, CarrierKind::motorFuel,
                                                     CarrierKind::gas, CarrierKind::coal};

}  // namespace

std::string consumption_series(CarrierKind carrier, Sector sector) {
  return "consumption." + std::string(to_string(carrier)) + "." + std::string(to_string(sector));
}

std::string supply_split_key(TechnologyKind kind) { return "supply." + std::string(to_string(kind)); }

std::string demand_split_key(Sector sector) { return "demand." + std::string(to_string(sector)); }

std::vector<ScenarioRow> parse_scenario_csv(std::istream& in, const std::string& source) {
  std::vector<ScenarioRow> rows;
  std::set<std::pair<std::string, int>> seen;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (!header_seen) {
      if (text != kHeader) throw ParseError(source, lineno, "expected header '" + std::string(kHeader) + "'");
      header_seen = true;
      continue;
    }
    const auto fields = split(text, ',');
    if (fields.size() != 4) {
      throw ParseError(source, lineno, "expected 4 fields, got " + std::to_string(fields.size()));
    }
    ScenarioRow row;
    row.series = std::string(trim(fields[0]));
    row.unit = std::string(trim(fields[3]));
    row.line = lineno;
    if (row.series.empty()) throw ParseError(source, lineno, "empty series id");
    if (!parse_int(fields[1], row.year)) throw ParseError(source, lineno, "bad year '" + std::string(fields[1]) + "'");
    if (!parse_double(fields[2], row.value)) {
      throw ParseError(source, lineno, "bad value '" + std::string(fields[2]) + "'");
    }
    const auto unit = expected_unit(row.series);
    if (unit.empty()) throw ParseError(source, lineno, "unknown series '" + row.series + "'");
    if (row.unit != unit) {
      throw ParseError(source, lineno, "series " + row.series + " expects unit " + std::string(unit));
    }
    if (!seen.emplace(row.series, row.year).second) {
      throw ParseError(source, lineno, "duplicate row for " + row.series + " " + std::to_string(row.year));
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError(source, lineno, "missing header '" + std::string(kHeader) + "'");
  return rows;
}

CalibrationSet calibrate(const std::vector<ScenarioRow>& rows) {
  const GroupedRows g = group(rows);
  CalibrationSet cal;

  for (const auto& [id, ts] : g.series) {
    if (starts_with(id, "emissions.")) continue;
    cal.forecasts.emplace(id, fit_linear(ts));
  }
  for (const auto& [key, quarters] : g.quarterly) {
    cal.seasonal.emplace(key, fit_seasonal(quarters));
  }

  for (Sector s : all_values<Sector>()) {
    require(cal.forecasts.contains(consumption_series(CarrierKind::electricity, s)),
            consumption_series(CarrierKind::electricity, s));
    require(cal.seasonal.contains(demand_split_key(s)), "quarterly." + demand_split_key(s));
  }
  for (TechnologyKind k : all_values<TechnologyKind>()) {
    require(cal.seasonal.contains(supply_split_key(k)), "quarterly." + supply_split_key(k));
  }

  for (CarrierKind c : all_values<CarrierKind>()) {
    const std::string id = "emissions." + std::string(to_string(c));
    const auto it = g.series.find(id);
    const bool fossil = std::find(kFossilCarriers.begin(), kFossilCarriers.end(), c) != kFossilCarriers.end();
    if (it == g.series.end()) {
      if (fossil) require(false, id);
      continue;
    }
    // Activity is total final consumption of the carrier.
    std::map<int, double> activity;
    for (Sector s : all_values<Sector>()) {
      const auto cs = g.series.find(consumption_series(c, s));
      if (cs == g.series.end()) continue;
      for (const auto& p : cs->second.points) activity[p.year] += p.value;
    }
    TimeSeries act{"activity." + std::string(to_string(c)), {}};
    for (const auto& [year, value] : activity) act.points.push_back({year, value});
    cal.emission_factors[c] = calibrate_emission_factor(it->second, act);
  }
  return cal;
}

CalibrationSet load_history(std::istream& in, const std::string& source) {
  return calibrate(parse_scenario_csv(in, source));
}

CalibrationSet load_history(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_parameter, "cannot open " + path.string());
  return load_history(in, path.string());
}

std::optional<CarrierKind> input_carrier_of(TechnologyKind kind) {
  switch (kind) {
    case TechnologyKind::nuclear: return CarrierKind::nuclearFuel;
    case TechnologyKind::gas: return CarrierKind::gas;
    case TechnologyKind::biomass: return CarrierKind::wood;
    case TechnologyKind::biogas: return CarrierKind::biogas;
    case TechnologyKind::waste: return CarrierKind::waste;
    case TechnologyKind::river:
    case TechnologyKind::reservoir:
    case TechnologyKind::solar:
    case TechnologyKind::wind: return CarrierKind::ambientRenewable;
  }
  return std::nullopt;
}

Scenario load_scenario(std::istream& in, const std::string& source) {
  const auto rows = parse_scenario_csv(in, source);
  const GroupedRows g = group(rows);

  Scenario sc;
  sc.calibration = calibrate(rows);
  int base_year = 0;
  for (const auto& [id, m] : sc.calibration.forecasts) base_year = std::max(base_year, m.base_year);
  sc.base_year = base_year;

  for (TechnologyKind k : all_values<TechnologyKind>()) {
    const std::string name(to_string(k));
    TechParams p;
    p.kind = k;
    p.input_carrier = input_carrier_of(k);
    p.conversion_efficiency = scalar(g, "tech." + name + ".efficiency");
    p.land_use_factor = scalar(g, "tech." + name + ".landUse");
    p.emission_factor = scalar(g, "tech." + name + ".emission");
    p.generation_cost = scalar(g, "tech." + name + ".cost");
    p.summer_share = sc.calibration.seasonal.at(supply_split_key(k)).summer_share;
    validate(p);
    sc.technologies[k] = p;
    sc.capacity[k] = scalar(g, "capacity." + name);
    if (sc.capacity[k] < 0.0) throw Error(ErrorCode::invalid_parameter, "negative capacity for " + name);
    sc.splits.supply[k] = p.summer_share;
  }
  for (Sector s : all_values<Sector>()) {
    sc.splits.demand[s] = sc.calibration.seasonal.at(demand_split_key(s)).summer_share;
  }
  for (CarrierKind c : all_values<CarrierKind>()) {
    const std::string id = "loss." + std::string(to_string(c));
    if (c == CarrierKind::electricity) {
      sc.loss_rates[c] = scalar(g, id);
    } else if (const auto it = g.scalars.find(id); it != g.scalars.end()) {
      sc.loss_rates[c] = it->second.second;
    }
    if (!(sc.loss_rates[c] >= 0.0 && sc.loss_rates[c] < 1.0)) {
      throw Error(ErrorCode::invalid_parameter, id + " must lie in [0, 1)");
    }
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_parameter, "cannot open " + path.string());
  return load_scenario(in, path.string());
}

const Scenario& bundled_scenario() {
  static const Scenario scenario = [] {
    std::istringstream in{std::string(bundled::scenario_csv())};
    return load_scenario(in, "scenario-ch-2022.csv");
  }();
  return scenario;
}

BalanceInputs forecast_inputs(const CalibrationSet& calibration, int year) {
  BalanceInputs inputs;
  auto lookup = [&](const std::string& id) -> double {
    const auto it = calibration.forecasts.find(id);
    return it == calibration.forecasts.end() ? 0.0 : forecast(it->second, year);
  };
  for (CarrierKind c : all_values<CarrierKind>()) {
    for (Sector s : all_values<Sector>()) {
      const std::string id = consumption_series(c, s);
      if (c == CarrierKind::electricity) require(calibration.forecasts.contains(id), id);
      inputs.consumption[c][s] = lookup(id);
    }
    inputs.domestic_production[c] = lookup("production." + std::string(to_string(c)));
    inputs.stock_change[c] = lookup("stock." + std::string(to_string(c)));
  }
  return inputs;
}

}  // namespace pathways
