#pragma once

#include <array>
#include <optional>
#include <span>

#include "pathways/types.hpp"

namespace pathways {

struct TechParams {
  TechnologyKind kind = TechnologyKind::solar;
  std::optional<CarrierKind> input_carrier;
  double conversion_efficiency = 1.0;  // output / input, in (0, 1]
  double summer_share = 0.5;
  double land_use_factor = 0.0;   // km2 per TJ of output
  double emission_factor = 0.0;   // kg CO2-eq per TJ of output
  double generation_cost = 0.0;   // CHF per TJ of output

  bool operator==(const TechParams&) const = default;
};

// Throws invalid-parameter when a field is out of range.
void validate(const TechParams& params);

struct FleetEntry {
  TechParams params;
  double capacity = 0.0;  // TJ/yr
};

// Thermal plants burning a tradable fuel are dispatchable and get curtailed
// first-to-last in this order when supply exceeds requirement. Everything
// else runs at capacity and surplus leaves as exports.
inline constexpr std::array<TechnologyKind, 4> kCurtailmentOrder{
    TechnologyKind::gas, TechnologyKind::waste, TechnologyKind::biogas, TechnologyKind::biomass};

bool is_dispatchable(TechnologyKind kind);

struct CarrierFlows {
  double imports = 0.0;
  double exports = 0.0;
  double domestic_production = 0.0;
  double stock_change = 0.0;  // signed
  double transformation_input = 0.0;
  double transformation_output = 0.0;
  double delivery_loss = 0.0;
  SectorValues final_consumption{};

  double total_consumption() const;
  double supply_side() const;
  double use_side() const;
  // supply_side() - use_side(); zero for a closed balance.
  double closure_residual() const;
  double gross_flow() const;
};

struct AnnualBalance {
  int year = 0;
  EnumArray<CarrierKind, CarrierFlows> flows{};
  TechValues generation{};  // electricity output per technology, TJ

  // max over carriers of |residual| / max(1, gross flow)
  double max_relative_residual() const;
};

CarrierValues compute_delivery_requirement(const ConsumptionTable& consumption,
                                           const CarrierValues& loss_rates);

struct TransformationResult {
  CarrierValues residual{};        // requirement minus output; negative means surplus
  CarrierValues primary_demand{};  // fuel drawn by the fleet
  CarrierValues output{};          // by output carrier
  TechValues generation{};
};

TransformationResult apply_transformation(const CarrierValues& requirements,
                                          std::span<const FleetEntry> fleet);

struct TradeFlows {
  double imports = 0.0;
  double exports = 0.0;
};

EnumArray<CarrierKind, TradeFlows> close_balance(const CarrierValues& residuals);

struct BalanceInputs {
  ConsumptionTable consumption{};
  CarrierValues domestic_production{};
  CarrierValues stock_change{};
  // Contracted imports taken regardless of the residual.
  CarrierValues fixed_imports{};
};

inline constexpr int kFirstModelYear = 2022;
inline constexpr int kLastModelYear = 2050;

// With `summer_demand_share` set, fuel-burning plants are dispatched season
// by season (fixed imports split evenly) instead of against the annual total.
AnnualBalance build_annual_balance(int year, const BalanceInputs& inputs,
                                   std::span<const FleetEntry> fleet,
                                   const CarrierValues& loss_rates,
                                   std::optional<double> summer_demand_share = std::nullopt);

struct SeasonalSplits {
  EnumArray<TechnologyKind, std::optional<double>> supply{};
  EnumArray<Sector, std::optional<double>> demand{};
};

struct SeasonalElectricity {
  double summer_supply = 0.0;
  double winter_supply = 0.0;
  double summer_demand = 0.0;
  double winter_demand = 0.0;
};

// Demand is final electricity consumption plus its share of delivery losses.
SeasonalElectricity seasonal_decompose(const AnnualBalance& balance, const SeasonalSplits& splits);

}  // namespace pathways
