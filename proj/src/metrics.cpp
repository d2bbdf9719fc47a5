#include "pathways/metrics.hpp"

#include <algorithm>
#include <string>

#include "pathways/error.hpp"

namespace pathways {

namespace {

constexpr double kKgPerMegatonne = 1e9;
constexpr double kKgPerTonne = 1e3;

}  // namespace

std::string_view metric_unit(Metric metric) {
  switch (metric) {
    case Metric::nuclearFuel:
    case Metric::fossilFuel:
    case Metric::electricityImports: return "TJ";
    case Metric::emissions: return "t (mln)";
    case Metric::investmentCost: return "CHF (mln)";
    case Metric::landUse: return "km2";
    case Metric::summerShare: return "%";
  }
  return "";
}

Metric parse_metric(std::string_view name) {
  if (const auto m = parse_enum<Metric>(name)) return *m;
  throw Error(ErrorCode::invalid_parameter, "unknown metric '" + std::string(name) + "'");
}

double MetricRecord::value(Metric metric) const {
  switch (metric) {
    case Metric::nuclearFuel: return nuclear_fuel;
    case Metric::fossilFuel: return fossil_fuel;
    case Metric::electricityImports: return electricity_imports;
    case Metric::emissions: return emissions;
    case Metric::investmentCost: return investment_cost;
    case Metric::landUse: return land_use;
    case Metric::summerShare: return summer_share;
  }
  return 0.0;
}

double ScoreCard::value(Metric metric) const {
  switch (metric) {
    case Metric::nuclearFuel: return nuclear_fuel;
    case Metric::fossilFuel: return fossil_fuel;
    case Metric::electricityImports: return electricity_imports;
    case Metric::emissions: return emissions;
    case Metric::investmentCost: return investment_cost;
    case Metric::landUse: return land_use;
    case Metric::summerShare: return summer_share;
  }
  return 0.0;
}

bool is_fossil(CarrierKind carrier) {
  return carrier == CarrierKind::heatingOil || carrier == CarrierKind::motorFuel || carrier == CarrierKind::gas ||
         carrier == CarrierKind::coal;
}

MetricRecord annual_metrics(const AnnualBalance& balance, std::span<const FleetEntry> fleet,
                            const CarrierValues& carrier_emission_factors, const YearActivity& activity) {
  MetricRecord r;
  r.year = balance.year;

  const auto& nuclear = balance.flows[CarrierKind::nuclearFuel];
  r.nuclear_fuel = nuclear.transformation_input + nuclear.total_consumption();
  for (CarrierKind c : all_values<CarrierKind>()) {
    if (!is_fossil(c)) continue;
    r.fossil_fuel += balance.flows[c].transformation_input + balance.flows[c].total_consumption();
  }
  r.electricity_imports = balance.flows[CarrierKind::electricity].imports;

  // The balance aggregates generation per technology; the fleet supplies factors.
  EnumArray<TechnologyKind, const TechParams*> params{};
  for (const auto& entry : fleet) params[entry.params.kind] = &entry.params;

  double emissions_kg = 0.0;
  double summer_supply = 0.0;
  for (TechnologyKind k : all_values<TechnologyKind>()) {
    const double output = balance.generation[k];
    if (output == 0.0 || params[k] == nullptr) continue;
    emissions_kg += output * params[k]->emission_factor;
    r.land_use += output * params[k]->land_use_factor;
    summer_supply += output * params[k]->summer_share;
    r.electricity_supply += output;
  }
  for (CarrierKind c : all_values<CarrierKind>()) {
    emissions_kg += balance.flows[c].total_consumption() * carrier_emission_factors[c];
  }
  emissions_kg += (activity.additional_emissions_t - activity.sequestered_t) * kKgPerTonne;
  r.emissions = std::max(0.0, emissions_kg / kKgPerMegatonne);
  r.investment_cost = activity.investment_cost;
  r.summer_share = r.electricity_supply > 0.0 ? 100.0 * summer_supply / r.electricity_supply : 0.0;
  return r;
}

ScoreCard accumulate(std::span<const MetricRecord> records, ObjectiveFrame frame) {
  ScoreCard card;
  card.objective_frame = frame;
  if (records.empty()) return card;

  double weighted_share = 0.0;
  double plain_share = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (i > 0 && r.year != records[i - 1].year + 1) {
      throw Error(ErrorCode::incomplete_simulation, "metric records jump from " +
                                                        std::to_string(records[i - 1].year) + " to " +
                                                        std::to_string(r.year));
    }
    card.nuclear_fuel += r.nuclear_fuel;
    card.fossil_fuel += r.fossil_fuel;
    card.electricity_imports += r.electricity_imports;
    card.emissions += r.emissions;
    card.investment_cost += r.investment_cost;
    card.land_use += r.land_use;
    card.electricity_supply += r.electricity_supply;
    weighted_share += r.summer_share * r.electricity_supply;
    plain_share += r.summer_share;
  }
  card.summer_share = card.electricity_supply > 0.0 ? weighted_share / card.electricity_supply
                                                    : plain_share / static_cast<double>(records.size());
  card.first_year = records.front().year;
  card.last_year = records.back().year;
  card.years = static_cast<int>(records.size());
  return card;
}

std::vector<LeaderboardEntry> rank(std::span<const LeaderboardEntry> entries, Metric key) {
  std::vector<LeaderboardEntry> out(entries.begin(), entries.end());
  std::stable_sort(out.begin(), out.end(), [key](const LeaderboardEntry& a, const LeaderboardEntry& b) {
    const double va = a.card.value(key);
    const double vb = b.card.value(key);
    if (va != vb) return va < vb;
    return a.completed_at < b.completed_at;
  });
  return out;
}

}  // namespace pathways
