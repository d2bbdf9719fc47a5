#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pathways/types.hpp"

namespace pathways {

enum class SiteClass { water, land, alpine };

enum class PolicyId { alpinePV, fastTrackWind, windParkRegulation, buildingInsulation, industrySubsidy };

enum class PolicyEffect { solar_upgrades, wind_upgrades, wind_delay, household_demand, industry_demand };

enum class ShockKind { coldSpell, heatWave, massImmigration, renewableSupport, glaciersMelting, nuclearReintroduction };

enum class ShockResponse { emergencyImports, gasPeakers, conservation, yes, no };

template <>
struct EnumTraits<SiteClass> {
  static constexpr std::array<std::string_view, 3> names{"water", "land", "alpine"};
};
template <>
struct EnumTraits<PolicyId> {
  static constexpr std::array<std::string_view, 5> names{"alpinePV", "fastTrackWind", "windParkRegulation",
                                                         "buildingInsulation", "industrySubsidy"};
};
template <>
struct EnumTraits<PolicyEffect> {
  static constexpr std::array<std::string_view, 5> names{"solar_upgrades", "wind_upgrades", "wind_delay",
                                                         "household_demand", "industry_demand"};
};
template <>
struct EnumTraits<ShockKind> {
  static constexpr std::array<std::string_view, 6> names{"coldSpell",        "heatWave",        "massImmigration",
                                                         "renewableSupport", "glaciersMelting", "nuclearReintroduction"};
};
template <>
struct EnumTraits<ShockResponse> {
  static constexpr std::array<std::string_view, 5> names{"emergencyImports", "gasPeakers", "conservation", "yes",
                                                         "no"};
};

struct TechRules {
  double build_fraction = 0.0;    // of initial capacity
  double upgrade_fraction = 0.0;  // of the plant's base capacity
  int max_upgrades = 0;
  int build_delay = 0;            // turns
  double unit_cost = 0.0;         // MCHF per TJ/yr
  std::vector<SiteClass> sites;
  int initial_plants = 1;

  bool operator==(const TechRules&) const = default;
};

struct PolicyRule {
  double acceptance = 0.0;
  PolicyEffect effect = PolicyEffect::solar_upgrades;
  double amount = 0.0;

  bool operator==(const PolicyRule&) const = default;
};

struct Parameters {
  std::vector<int> turn_start_years;
  int end_year = 2050;

  double budget_per_turn = 0.0;
  double loan_cap = 0.0;
  double loan_interest = 0.0;
  double import_price = 0.0;      // MCHF per TJ
  double import_max_level = 0.0;  // TJ per season
  double import_initial = 0.0;    // TJ per season
  double sequestration_price = 0.0;  // CHF per t

  double support_initial = 50.0;
  double support_policy_divisor = 200.0;
  double campaign_cost = 0.0;
  double campaign_bonus = 0.0;

  EnumArray<SiteClass, int> sites{};
  EnumArray<TechnologyKind, TechRules> tech{};
  EnumArray<PolicyId, PolicyRule> policies{};

  double shock_probability = 0.5;
  int nuclear_turn = 5;
  double cold_spell_winter_demand = 1.0;
  double heat_wave_summer_demand = 1.0;
  double immigration_demand = 1.0;
  double renewable_support_bonus = 0.0;

  double emergency_imports_cost = 0.0;
  double emergency_imports_support = 0.0;
  double gas_peakers_emissions_t = 0.0;
  double gas_peakers_support = 0.0;
  double conservation_support = 0.0;

  double reward_support = 0.0;
  double reward_budget = 0.0;

  int turn_count() const { return static_cast<int>(turn_start_years.size()); }
  // Inclusive model-year range covered by a turn (1-based).
  std::pair<int, int> turn_years(int turn) const;

  bool operator==(const Parameters&) const = default;
};

// Raw key/value view of a parameter file.
std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source);

// Bundled defaults overlaid with the given file; unknown keys are rejected.
Parameters load_parameters(std::istream& in, const std::string& source);
Parameters load_parameters(const std::filesystem::path& path);
const Parameters& default_parameters();

}  // namespace pathways
