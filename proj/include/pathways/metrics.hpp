#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pathways/balance.hpp"

namespace pathways {

enum class ObjectiveFrame { supplyOnly, transitionFocus };

template <>
struct EnumTraits<ObjectiveFrame> {
  static constexpr std::array<std::string_view, 2> names{"supply-only", "transition-focus"};
};

// The seven per-simulation metrics.
enum class Metric {
  nuclearFuel,         // TJ
  fossilFuel,          // TJ
  electricityImports,  // TJ
  emissions,           // t CO2-eq (mln)
  investmentCost,      // CHF (mln)
  landUse,             // km2
  summerShare,         // % of electricity supply in summer
};

template <>
struct EnumTraits<Metric> {
  static constexpr std::array<std::string_view, 7> names{
      "nuclearFuel", "fossilFuel", "electricityImports", "emissions", "investmentCost", "landUse", "summerShare"};
};

std::string_view metric_unit(Metric metric);

// Throws invalid-parameter for names outside the seven metrics.
Metric parse_metric(std::string_view name);

struct MetricRecord {
  int year = 0;
  double nuclear_fuel = 0.0;
  double fossil_fuel = 0.0;
  double electricity_imports = 0.0;
  double emissions = 0.0;
  double investment_cost = 0.0;
  double land_use = 0.0;
  double summer_share = 0.0;
  double electricity_supply = 0.0;  // TJ generated; weight for summer_share

  double value(Metric metric) const;
  bool operator==(const MetricRecord&) const = default;
};

struct ScoreCard {
  double nuclear_fuel = 0.0;
  double fossil_fuel = 0.0;
  double electricity_imports = 0.0;
  double emissions = 0.0;
  double investment_cost = 0.0;
  double land_use = 0.0;
  double summer_share = 0.0;
  double electricity_supply = 0.0;
  int first_year = 0;
  int last_year = 0;
  int years = 0;
  ObjectiveFrame objective_frame = ObjectiveFrame::supplyOnly;
  bool partial = false;

  double value(Metric metric) const;
  bool operator==(const ScoreCard&) const = default;
};

// Per-year quantities that do not live in the balance.
struct YearActivity {
  double investment_cost = 0.0;       // CHF mln
  double sequestered_t = 0.0;         // t CO2-eq captured
  double additional_emissions_t = 0.0;
};

bool is_fossil(CarrierKind carrier);

MetricRecord annual_metrics(const AnnualBalance& balance, std::span<const FleetEntry> fleet,
                            const CarrierValues& carrier_emission_factors, const YearActivity& activity);

// Sums the records; summer share is the supply-weighted mean. Years must be consecutive.
ScoreCard accumulate(std::span<const MetricRecord> records,
                     ObjectiveFrame frame = ObjectiveFrame::supplyOnly);

struct LeaderboardEntry {
  std::string display_name;
  ScoreCard card;
  std::string completed_at;  // UTC ISO-8601

  bool operator==(const LeaderboardEntry&) const = default;
};

// Ascending by the metric (lower is better); ties go to the earlier completion.
std::vector<LeaderboardEntry> rank(std::span<const LeaderboardEntry> entries, Metric key);

}  // namespace pathways
