#include "pathways/balance.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pathways/error.hpp"

namespace pathways {

namespace {

void require_non_negative(double value, std::string_view what) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::invalid_parameter,
                std::string(what) + " must be a finite non-negative value, got " + std::to_string(value));
  }
}

}  // namespace

void validate(const TechParams& p) {
  const std::string name(to_string(p.kind));
  if (!(p.conversion_efficiency > 0.0 && p.conversion_efficiency <= 1.0)) {
    throw Error(ErrorCode::invalid_parameter, name + ": conversion efficiency must lie in (0, 1]");
  }
  if (!(p.summer_share >= 0.0 && p.summer_share <= 1.0)) {
    throw Error(ErrorCode::invalid_parameter, name + ": summer share must lie in [0, 1]");
  }
  require_non_negative(p.land_use_factor, name + " land use factor");
  require_non_negative(p.emission_factor, name + " emission factor");
  require_non_negative(p.generation_cost, name + " generation cost");
}

bool is_dispatchable(TechnologyKind kind) {
  return std::find(kCurtailmentOrder.begin(), kCurtailmentOrder.end(), kind) != kCurtailmentOrder.end();
}

double CarrierFlows::total_consumption() const {
  double total = 0.0;
  for (double v : final_consumption) total += v;
  return total;
}

double CarrierFlows::supply_side() const {
  return imports - exports + domestic_production + stock_change + transformation_output;
}

double CarrierFlows::use_side() const {
  return transformation_input + delivery_loss + total_consumption();
}

double CarrierFlows::closure_residual() const { return supply_side() - use_side(); }

double CarrierFlows::gross_flow() const {
  return imports + exports + domestic_production + std::abs(stock_change) + transformation_output +
         transformation_input + delivery_loss + total_consumption();
}

double AnnualBalance::max_relative_residual() const {
  double worst = 0.0;
  for (const auto& f : flows) {
    worst = std::max(worst, std::abs(f.closure_residual()) / std::max(1.0, f.gross_flow()));
  }
  return worst;
}

CarrierValues compute_delivery_requirement(const ConsumptionTable& consumption,
                                           const CarrierValues& loss_rates) {
  CarrierValues requirement{};
  for (CarrierKind c : all_values<CarrierKind>()) {
    const double loss = loss_rates[c];
    if (!(loss >= 0.0 && loss < 1.0)) {
      throw Error(ErrorCode::invalid_parameter, "loss rate for " + std::string(to_string(c)) +
                                                    " must lie in [0, 1), got " + std::to_string(loss));
    }
    double total = 0.0;
    for (Sector s : all_values<Sector>()) {
      require_non_negative(consumption[c][s], "consumption");
      total += consumption[c][s];
    }
    requirement[c] = total / (1.0 - loss);
  }
  return requirement;
}

TransformationResult apply_transformation(const CarrierValues& requirements,
                                          std::span<const FleetEntry> fleet) {
  TransformationResult result;
  result.residual = requirements;

  auto run = [&result](const FleetEntry& entry, double output) {
    result.generation[entry.params.kind] += output;
    result.output[CarrierKind::electricity] += output;
    result.residual[CarrierKind::electricity] -= output;
    if (entry.params.input_carrier) {
      result.primary_demand[*entry.params.input_carrier] += output / entry.params.conversion_efficiency;
    }
  };

  for (const auto& entry : fleet) {
    require_non_negative(entry.capacity, "capacity");
    if (!is_dispatchable(entry.params.kind)) run(entry, entry.capacity);
  }
  // Dispatch in reverse curtailment order so the first-curtailed plant runs last.
  for (auto it = kCurtailmentOrder.rbegin(); it != kCurtailmentOrder.rend(); ++it) {
    for (const auto& entry : fleet) {
      if (entry.params.kind != *it) continue;
      const double open = std::max(0.0, result.residual[CarrierKind::electricity]);
      run(entry, std::min(entry.capacity, open));
    }
  }
  return result;
}

EnumArray<CarrierKind, TradeFlows> close_balance(const CarrierValues& residuals) {
  EnumArray<CarrierKind, TradeFlows> trade{};
  for (CarrierKind c : all_values<CarrierKind>()) {
    const double r = residuals[c];
    if (r > 0.0) {
      trade[c].imports = r;
    } else if (r < 0.0) {
      trade[c].exports = -r;
    }
  }
  return trade;
}

namespace {

TransformationResult dispatch_by_season(const CarrierValues& requirement, const CarrierValues& fixed_imports,
                                        std::span<const FleetEntry> fleet, double summer_share) {
  TransformationResult total;
  for (const bool summer : {true, false}) {
    const double demand_share = summer ? summer_share : 1.0 - summer_share;
    CarrierValues seasonal{};
    for (CarrierKind c : all_values<CarrierKind>()) {
      seasonal[c] = requirement[c] * demand_share - 0.5 * fixed_imports[c];
    }
    std::vector<FleetEntry> scaled(fleet.begin(), fleet.end());
    for (auto& entry : scaled) {
      entry.capacity *= summer ? entry.params.summer_share : 1.0 - entry.params.summer_share;
    }
    const TransformationResult part = apply_transformation(seasonal, scaled);
    for (CarrierKind c : all_values<CarrierKind>()) {
      total.output[c] += part.output[c];
      total.primary_demand[c] += part.primary_demand[c];
    }
    for (TechnologyKind k : all_values<TechnologyKind>()) total.generation[k] += part.generation[k];
  }
  return total;
}

}  // namespace

AnnualBalance build_annual_balance(int year, const BalanceInputs& inputs,
                                   std::span<const FleetEntry> fleet,
                                   const CarrierValues& loss_rates,
                                   std::optional<double> summer_demand_share) {
  if (year < kFirstModelYear || year > kLastModelYear) {
    throw Error(ErrorCode::invalid_parameter, "year " + std::to_string(year) + " outside " +
                                                  std::to_string(kFirstModelYear) + "-" +
                                                  std::to_string(kLastModelYear));
  }
  const CarrierValues requirement = compute_delivery_requirement(inputs.consumption, loss_rates);

  CarrierValues net_requirement{};
  for (CarrierKind c : all_values<CarrierKind>()) {
    require_non_negative(inputs.fixed_imports[c], "fixed imports");
    net_requirement[c] = requirement[c] - inputs.fixed_imports[c];
  }
  if (summer_demand_share && !(*summer_demand_share >= 0.0 && *summer_demand_share <= 1.0)) {
    throw Error(ErrorCode::invalid_parameter, "summer demand share must lie in [0, 1]");
  }
  const TransformationResult transformed =
      summer_demand_share ? dispatch_by_season(requirement, inputs.fixed_imports, fleet, *summer_demand_share)
                          : apply_transformation(net_requirement, fleet);

  AnnualBalance balance;
  balance.year = year;
  balance.generation = transformed.generation;

  CarrierValues residual{};
  for (CarrierKind c : all_values<CarrierKind>()) {
    CarrierFlows& f = balance.flows[c];
    f.final_consumption = inputs.consumption[c];
    f.delivery_loss = requirement[c] - f.total_consumption();
    f.transformation_output = transformed.output[c];
    f.transformation_input = transformed.primary_demand[c];
    if (c == CarrierKind::ambientRenewable) {
      // Harvested on demand; never traded.
      f.domestic_production = f.transformation_input;
    } else {
      require_non_negative(inputs.domestic_production[c], "domestic production");
      f.domestic_production = inputs.domestic_production[c];
      f.stock_change = inputs.stock_change[c];
    }
    residual[c] = requirement[c] + f.transformation_input - f.transformation_output -
                  f.domestic_production - f.stock_change - inputs.fixed_imports[c];
  }

  const auto trade = close_balance(residual);
  for (CarrierKind c : all_values<CarrierKind>()) {
    balance.flows[c].imports = inputs.fixed_imports[c] + trade[c].imports;
    balance.flows[c].exports = trade[c].exports;
  }
  return balance;
}

SeasonalElectricity seasonal_decompose(const AnnualBalance& balance, const SeasonalSplits& splits) {
  SeasonalElectricity out;
  double supply_total = 0.0;
  for (TechnologyKind k : all_values<TechnologyKind>()) {
    const double output = balance.generation[k];
    if (output == 0.0) continue;
    if (!splits.supply[k]) {
      throw Error(ErrorCode::calibration_incomplete,
                  "missing seasonal split for supply series " + std::string(to_string(k)));
    }
    supply_total += output;
    out.summer_supply += output * *splits.supply[k];
  }
  out.winter_supply = supply_total - out.summer_supply;

  const CarrierFlows& elec = balance.flows[CarrierKind::electricity];
  const double consumption = elec.total_consumption();
  const double gross_up = consumption > 0.0 ? 1.0 + elec.delivery_loss / consumption : 1.0;
  double demand_total = 0.0;
  for (Sector s : all_values<Sector>()) {
    const double demand = elec.final_consumption[s] * gross_up;
    if (demand == 0.0) continue;
    if (!splits.demand[s]) {
      throw Error(ErrorCode::calibration_incomplete,
                  "missing seasonal split for demand series " + std::string(to_string(s)));
    }
    demand_total += demand;
    out.summer_demand += demand * *splits.demand[s];
  }
  out.winter_demand = demand_total - out.summer_demand;
  return out;
}

}  // namespace pathways
