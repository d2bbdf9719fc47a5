#include "pathways/game.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pathways/error.hpp"
#include "pathways/format.hpp"

namespace pathways {

namespace {

constexpr double kNeutralSupport = 50.0;
constexpr double kClosureTolerance = 1e-6;

double clamp_support(double v) { return std::clamp(v, 0.0, 100.0); }

[[noreturn]] void reject(ErrorCode code, const std::string& message) { throw Error(code, message); }

std::string money(double v) { return format_number(std::round(v * 100.0) / 100.0) + " MCHF"; }

Plant* find_plant(GameState& state, int id) {
  for (auto& p : state.fleet) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

double active_capacity(const GameState& state) {
  double total = 0.0;
  for (const auto& p : state.fleet) {
    if (p.active) total += p.capacity;
  }
  return total;
}

void spend(GameState& state, double cost, const std::string& what) {
  if (cost > state.treasury.budget) {
    reject(ErrorCode::insufficient_budget,
           what + " costs " + money(cost) + " but the budget is " + money(state.treasury.budget));
  }
  state.treasury.budget -= cost;
}

// Season multipliers from the active shock.
std::pair<double, double> shock_multipliers(const Parameters& p, const GameState& state) {
  double summer = 1.0;
  double winter = 1.0;
  if (!state.active_shock) return {summer, winter};
  switch (state.active_shock->kind) {
    case ShockKind::coldSpell: winter = p.cold_spell_winter_demand; break;
    case ShockKind::heatWave: summer = p.heat_wave_summer_demand; break;
    case ShockKind::massImmigration:
      summer = p.immigration_demand;
      winter = p.immigration_demand;
      break;
    default: break;
  }
  return {summer, winter};
}

BalanceInputs policy_adjusted(const GameContext& ctx, const GameState& state, int year) {
  BalanceInputs inputs = ctx.baseline(year);
  for (PolicyId id : all_values<PolicyId>()) {
    if (state.policies[id].status != PolicyStatus::enacted) continue;
    const PolicyRule& rule = ctx.params().policies[id];
    std::optional<Sector> sector;
    if (rule.effect == PolicyEffect::household_demand) sector = Sector::households;
    if (rule.effect == PolicyEffect::industry_demand) sector = Sector::industry;
    if (!sector) continue;
    const double factor = std::max(0.0, 1.0 - rule.amount);
    for (CarrierKind c : all_values<CarrierKind>()) inputs.consumption[c][*sector] *= factor;
  }
  return inputs;
}

void apply_policy_effect(const GameContext& ctx, GameState& state, PolicyId id) {
  const PolicyRule& rule = ctx.params().policies[id];
  const int extra = static_cast<int>(std::lround(rule.amount));
  auto raise_cap = [&](TechnologyKind kind) {
    for (auto& p : state.fleet) {
      if (p.kind == kind) p.max_upgrades += extra;
    }
  };
  switch (rule.effect) {
    case PolicyEffect::solar_upgrades: raise_cap(TechnologyKind::solar); break;
    case PolicyEffect::wind_upgrades: raise_cap(TechnologyKind::wind); break;
    case PolicyEffect::wind_delay:
    case PolicyEffect::household_demand:
    case PolicyEffect::industry_demand: break;  // read where used
  }
}

struct TurnClose {
  GameState state;
  std::optional<ShockKind> drawn;
};

void guard_playable(const GameState& state) {
  if (state.completed) reject(ErrorCode::game_complete, "the game is complete");
}

}  // namespace

// ---- shocks ----------------------------------------------------------------

bool requires_response(ShockKind kind) {
  return kind == ShockKind::coldSpell || kind == ShockKind::heatWave || kind == ShockKind::nuclearReintroduction;
}

std::vector<ShockResponse> response_options(ShockKind kind) {
  switch (kind) {
    case ShockKind::coldSpell:
    case ShockKind::heatWave:
      return {ShockResponse::emergencyImports, ShockResponse::gasPeakers, ShockResponse::conservation};
    case ShockKind::nuclearReintroduction: return {ShockResponse::yes, ShockResponse::no};
    default: return {};
  }
}

bool is_demand_shock(ShockKind kind) {
  return kind == ShockKind::coldSpell || kind == ShockKind::heatWave || kind == ShockKind::massImmigration;
}

// ---- context ---------------------------------------------------------------

GameContext::GameContext(Scenario scenario, Parameters params)
    : scenario_(std::move(scenario)), params_(std::move(params)) {
  if (params_.turn_start_years.front() != scenario_.base_year) {
    throw Error(ErrorCode::invalid_parameter, "first turn year " + std::to_string(params_.turn_start_years.front()) +
                                                  " differs from scenario base year " +
                                                  std::to_string(scenario_.base_year));
  }
  if (params_.end_year > kLastModelYear) {
    throw Error(ErrorCode::invalid_parameter, "turns.end_year beyond " + std::to_string(kLastModelYear));
  }
  for (int year = scenario_.base_year; year <= params_.end_year; ++year) {
    baseline_.emplace(year, forecast_inputs(scenario_.calibration, year));
  }

  // The starting system must close.
  std::vector<FleetEntry> fleet;
  for (TechnologyKind k : all_values<TechnologyKind>()) {
    if (scenario_.capacity[k] > 0.0) fleet.push_back({scenario_.technologies[k], scenario_.capacity[k]});
  }
  const AnnualBalance start =
      build_annual_balance(scenario_.base_year, baseline_.at(scenario_.base_year), fleet, scenario_.loss_rates);
  if (start.max_relative_residual() > kClosureTolerance) {
    throw Error(ErrorCode::calibration_incomplete, "starting scenario does not close");
  }
}

std::shared_ptr<const GameContext> GameContext::bundled() {
  static const auto ctx = std::make_shared<const GameContext>(bundled_scenario(), default_parameters());
  return ctx;
}

const BalanceInputs& GameContext::baseline(int year) const {
  const auto it = baseline_.find(year);
  if (it == baseline_.end()) {
    throw Error(ErrorCode::invalid_parameter, "no forecast for year " + std::to_string(year));
  }
  return it->second;
}

// ---- queries ---------------------------------------------------------------

std::string_view action_name(const Action& a) {
  static constexpr std::array<std::string_view, std::variant_size_v<Action>> names{
      "build", "upgrade", "decommission", "setImport", "proposePolicy", "campaign", "setSequester",
      "respondShock", "borrow", "endTurn"};
  return names[a.index()];
}

int upgrade_cap(const GameContext& ctx, const GameState& state, TechnologyKind kind) {
  int cap = ctx.params().tech[kind].max_upgrades;
  for (PolicyId id : all_values<PolicyId>()) {
    if (state.policies[id].status != PolicyStatus::enacted) continue;
    const PolicyRule& rule = ctx.params().policies[id];
    const bool solar = rule.effect == PolicyEffect::solar_upgrades && kind == TechnologyKind::solar;
    const bool wind = rule.effect == PolicyEffect::wind_upgrades && kind == TechnologyKind::wind;
    if (solar || wind) cap += static_cast<int>(std::lround(rule.amount));
  }
  return cap;
}

int build_delay(const GameContext& ctx, const GameState& state, TechnologyKind kind) {
  int delay = ctx.params().tech[kind].build_delay;
  for (PolicyId id : all_values<PolicyId>()) {
    if (state.policies[id].status != PolicyStatus::enacted) continue;
    const PolicyRule& rule = ctx.params().policies[id];
    if (rule.effect == PolicyEffect::wind_delay && kind == TechnologyKind::wind) {
      delay -= static_cast<int>(std::lround(rule.amount));
    }
  }
  return std::max(0, delay);
}

std::vector<FleetEntry> fleet_entries(const GameContext& ctx, const GameState& state) {
  TechValues capacity{};
  for (const auto& p : state.fleet) {
    if (p.active) capacity[p.kind] += p.capacity;
  }
  std::vector<FleetEntry> out;
  for (TechnologyKind k : all_values<TechnologyKind>()) {
    if (capacity[k] > 0.0) out.push_back({ctx.scenario().technologies[k], capacity[k]});
  }
  return out;
}

namespace {

struct SeasonalInputs {
  BalanceInputs inputs;
  double summer_share = 0.5;  // of electricity demand
};

SeasonalInputs seasonal_inputs(const GameContext& ctx, const GameState& state, int year) {
  SeasonalInputs out{policy_adjusted(ctx, state, year), 0.5};
  const auto [summer, winter] = shock_multipliers(ctx.params(), state);
  double summer_total = 0.0;
  double total = 0.0;
  for (Sector s : all_values<Sector>()) {
    double& value = out.inputs.consumption[CarrierKind::electricity][s];
    const double share = ctx.scenario().splits.demand[s].value_or(0.5);
    summer_total += value * share * summer;
    value *= share * summer + (1.0 - share) * winter;
    total += value;
  }
  if (total > 0.0) out.summer_share = std::clamp(summer_total / total, 0.0, 1.0);
  out.inputs.fixed_imports[CarrierKind::electricity] = 2.0 * state.import_level;
  return out;
}

}  // namespace

BalanceInputs turn_inputs(const GameContext& ctx, const GameState& state, int year) {
  return seasonal_inputs(ctx, state, year).inputs;
}

AnnualBalance turn_balance(const GameContext& ctx, const GameState& state, int year) {
  const SeasonalInputs in = seasonal_inputs(ctx, state, year);
  return build_annual_balance(year, in.inputs, fleet_entries(ctx, state), ctx.scenario().loss_rates, in.summer_share);
}

SupplyCheck check_supply(const GameContext& ctx, const GameState& state) {
  const Scenario& sc = ctx.scenario();

  double summer_supply = state.import_level;
  double winter_supply = state.import_level;
  for (const auto& p : state.fleet) {
    if (!p.active) continue;
    const double share = sc.technologies[p.kind].summer_share;
    summer_supply += p.capacity * share;
    winter_supply += p.capacity * (1.0 - share);
  }

  const auto [summer_mult, winter_mult] = shock_multipliers(ctx.params(), state);
  const double loss = sc.loss_rates[CarrierKind::electricity];
  const auto [first_year, last_year] = ctx.params().turn_years(state.turn);

  SupplyCheck worst;
  for (int year = first_year; year <= last_year; ++year) {
    const BalanceInputs inputs = policy_adjusted(ctx, state, year);
    double summer = 0.0;
    double winter = 0.0;
    for (Sector s : all_values<Sector>()) {
      const double gross = inputs.consumption[CarrierKind::electricity][s] / (1.0 - loss);
      const double share = sc.splits.demand[s].value_or(0.5);
      summer += gross * share;
      winter += gross * (1.0 - share);
    }
    SupplyCheck c;
    c.summer_supply = summer_supply;
    c.winter_supply = winter_supply;
    c.summer_demand = summer * summer_mult;
    c.winter_demand = winter * winter_mult;
    c.summer_surplus = summer_supply - c.summer_demand;
    c.winter_surplus = winter_supply - c.winter_demand;
    c.binding_year = year;
    if (year == first_year) {
      worst = c;
      continue;
    }
    if (std::min(c.summer_surplus, c.winter_surplus) < std::min(worst.summer_surplus, worst.winter_surplus)) {
      const double s = std::min(worst.summer_surplus, c.summer_surplus);
      const double w = std::min(worst.winter_surplus, c.winter_surplus);
      worst = c;
      worst.summer_surplus = s;
      worst.winter_surplus = w;
    } else {
      worst.summer_surplus = std::min(worst.summer_surplus, c.summer_surplus);
      worst.winter_surplus = std::min(worst.winter_surplus, c.winter_surplus);
    }
  }
  return worst;
}

double resolve_policy_probability(const GameContext& ctx, const GameState& state, PolicyId policy) {
  const PolicyState& ps = state.policies[policy];
  if (ps.status == PolicyStatus::enacted) {
    reject(ErrorCode::already_enacted, "policy " + std::string(to_string(policy)) + " is already enacted");
  }
  const double shift = (state.support - kNeutralSupport) / ctx.params().support_policy_divisor;
  return std::clamp(ps.base_acceptance + ps.campaign_bonus + shift, 0.0, 1.0);
}

std::optional<ShockEvent> draw_shock(const GameContext& ctx, const GameState& state, Rng& rng) {
  const Parameters& p = ctx.params();
  if (state.turn == p.nuclear_turn) return ShockEvent{ShockKind::nuclearReintroduction, state.turn, {}, false};
  if (rng.uniform() >= p.shock_probability) return std::nullopt;

  std::vector<ShockKind> eligible{ShockKind::coldSpell, ShockKind::heatWave};
  for (ShockKind once : {ShockKind::massImmigration, ShockKind::renewableSupport, ShockKind::glaciersMelting}) {
    const bool seen = std::any_of(state.shock_log.begin(), state.shock_log.end(),
                                  [once](const ShockEvent& e) { return e.kind == once; });
    if (!seen) eligible.push_back(once);
  }
  return ShockEvent{eligible[rng.index(eligible.size())], state.turn, {}, false};
}

// ---- game lifecycle --------------------------------------------------------

GameState new_game(const GameContext& ctx, std::uint64_t seed, ObjectiveFrame frame) {
  const Parameters& p = ctx.params();
  const Scenario& sc = ctx.scenario();

  GameState s;
  s.seed = seed;
  s.objective_frame = frame;
  s.turn = 1;
  s.model_year = p.turn_start_years.front();
  s.rng = Rng(seed);
  s.free_sites = p.sites;
  s.treasury = Treasury{p.budget_per_turn, 0.0, p.loan_cap, p.loan_interest};
  s.support = clamp_support(p.support_initial);
  s.import_level = p.import_initial;
  for (PolicyId id : all_values<PolicyId>()) {
    s.policies[id] = PolicyState{id, p.policies[id].acceptance, 0.0, PolicyStatus::available};
  }

  for (TechnologyKind k : all_values<TechnologyKind>()) {
    const double total = sc.capacity[k];
    if (total <= 0.0) continue;
    const TechRules& rules = p.tech[k];
    const int n = rules.initial_plants;
    const double each = total / n;
    double assigned = 0.0;
    for (int i = 0; i < n; ++i) {
      Plant plant;
      plant.id = s.next_plant_id++;
      plant.kind = k;
      plant.site = rules.sites.empty() ? SiteClass::land : rules.sites.front();
      plant.base_capacity = i + 1 == n ? total - assigned : each;
      plant.capacity = plant.base_capacity;
      plant.max_upgrades = rules.max_upgrades;
      assigned += plant.base_capacity;
      s.fleet.push_back(plant);
    }
  }
  return s;
}

namespace {

TurnClose close_turn(const GameContext& ctx, const GameState& state) {
  const Parameters& p = ctx.params();
  const Scenario& sc = ctx.scenario();

  GameState next = state;
  const auto fleet = fleet_entries(ctx, state);
  const auto [first_year, last_year] = p.turn_years(state.turn);
  const int years = last_year - first_year + 1;

  double production_cost = 0.0;
  for (int year = first_year; year <= last_year; ++year) {
    const AnnualBalance balance = turn_balance(ctx, state, year);
    YearActivity activity;
    activity.sequestered_t = state.sequester_capacity;
    if (year == first_year) {
      activity.investment_cost = state.turn_investment;
      activity.additional_emissions_t = state.turn_extra_emissions_t;
    }
    next.metrics_history.push_back(annual_metrics(balance, fleet, sc.calibration.emission_factors, activity));
    for (TechnologyKind k : all_values<TechnologyKind>()) {
      production_cost += balance.generation[k] * sc.technologies[k].generation_cost / 1e6;
    }
  }

  const double import_cost = years * 2.0 * state.import_level * p.import_price;
  const double sequestration_cost = years * state.sequester_capacity * p.sequestration_price / 1e6;
  const double repayment = state.treasury.loan_outstanding * (1.0 + state.treasury.interest_rate);

  double credit = p.budget_per_turn;
  const bool withstood = state.active_shock && is_demand_shock(state.active_shock->kind);
  if (withstood) {
    credit *= 1.0 + p.reward_budget;
    next.support = clamp_support(next.support + p.reward_support);
  }

  const double budget = state.treasury.budget - production_cost - import_cost - sequestration_cost - repayment + credit;
  if (budget < 0.0) {
    reject(ErrorCode::insufficient_budget,
           "turn costs (production " + money(production_cost) + ", imports " + money(import_cost) +
               ", sequestration " + money(sequestration_cost) + ", loan " + money(repayment) +
               ") exceed the budget");
  }
  next.treasury.budget = budget;
  next.treasury.loan_outstanding = 0.0;

  for (auto& plant : next.fleet) {
    if (plant.active) continue;
    if (--plant.turns_remaining <= 0) {
      plant.turns_remaining = 0;
      plant.active = true;
    }
  }
  for (auto& ps : next.policies) {
    if (ps.status == PolicyStatus::rejectedThisTurn) ps.status = PolicyStatus::available;
  }
  next.policy_attempted_this_turn = false;
  next.turn_investment = 0.0;
  next.turn_extra_emissions_t = 0.0;

  if (next.active_shock) {
    next.active_shock->withstood = withstood;
    next.shock_log.push_back(*next.active_shock);
    next.active_shock.reset();
  }

  TurnClose out{std::move(next), std::nullopt};
  GameState& s = out.state;
  if (state.turn >= p.turn_count()) {
    s.completed = true;
    s.model_year = p.end_year;
    return out;
  }
  s.turn = state.turn + 1;
  s.model_year = p.turn_start_years[static_cast<std::size_t>(s.turn - 1)];
  Rng rng = s.rng;
  s.active_shock = draw_shock(ctx, s, rng);
  s.rng = rng;
  if (s.active_shock) {
    out.drawn = s.active_shock->kind;
    if (s.active_shock->kind == ShockKind::renewableSupport) {
      s.support = clamp_support(s.support + p.renewable_support_bonus);
    }
  }
  return out;
}

void guard_end_turn(const GameState& state) {
  guard_playable(state);
  if (state.active_shock && requires_response(state.active_shock->kind) && !state.active_shock->choice) {
    reject(ErrorCode::response_required,
           "respond to " + std::string(to_string(state.active_shock->kind)) + " before ending the turn");
  }
}

}  // namespace

EndTurnOutcome end_turn(const GameContext& ctx, const GameState& state) {
  guard_end_turn(state);
  const SupplyCheck supply = check_supply(ctx, state);
  if (supply.summer_surplus < 0.0 || supply.winter_surplus < 0.0) {
    return InsufficientSupply{supply.summer_surplus, supply.winter_surplus};
  }
  return close_turn(ctx, state).state;
}

ScoreCard score(const GameContext& ctx, const GameState& state) {
  (void)ctx;
  ScoreCard card = accumulate(state.metrics_history, state.objective_frame);
  card.partial = !state.completed;
  return card;
}

// ---- actions ---------------------------------------------------------------

namespace {

struct Applier {
  const GameContext& ctx;
  GameState& s;
  ActionOutcome& outcome;

  const Parameters& params() const { return ctx.params(); }

  void operator()(const action::Build& a) {
    guard_playable(s);
    const TechRules& rules = params().tech[a.kind];
    if (a.kind == TechnologyKind::nuclear) {
      reject(ErrorCode::rejected_action, "new nuclear reactors cannot be built");
    }
    if (std::find(rules.sites.begin(), rules.sites.end(), a.site) == rules.sites.end()) {
      reject(ErrorCode::invalid_action, std::string(to_string(a.kind)) + " cannot be built on a " +
                                            std::string(to_string(a.site)) + " site");
    }
    if (s.free_sites[a.site] <= 0) {
      reject(ErrorCode::no_free_site, "no free " + std::string(to_string(a.site)) + " site");
    }
    const double capacity = rules.build_fraction * ctx.scenario().capacity[a.kind];
    const double cost = capacity * rules.unit_cost;
    spend(s, cost, "building " + std::string(to_string(a.kind)));

    Plant plant;
    plant.id = s.next_plant_id++;
    plant.kind = a.kind;
    plant.site = a.site;
    plant.base_capacity = capacity;
    plant.capacity = capacity;
    plant.max_upgrades = upgrade_cap(ctx, s, a.kind);
    plant.turns_remaining = build_delay(ctx, s, a.kind);
    plant.active = plant.turns_remaining == 0;
    s.fleet.push_back(plant);
    s.free_sites[a.site] -= 1;
    s.turn_investment += cost;
    outcome.plant_id = plant.id;
  }

  void operator()(const action::Upgrade& a) {
    guard_playable(s);
    Plant* plant = find_plant(s, a.plant_id);
    if (plant == nullptr) reject(ErrorCode::unknown_plant, "no plant " + std::to_string(a.plant_id));
    if (!plant->active) reject(ErrorCode::invalid_action, "plant " + std::to_string(a.plant_id) + " is under construction");
    if (plant->upgrades_applied >= plant->max_upgrades) {
      reject(ErrorCode::upgrade_cap, "maximum upgrades reached (" + std::to_string(plant->max_upgrades) + ") for plant " +
                                         std::to_string(a.plant_id));
    }
    const TechRules& rules = params().tech[plant->kind];
    const double added = rules.upgrade_fraction * plant->base_capacity;
    const double cost = added * rules.unit_cost;
    spend(s, cost, "upgrading plant " + std::to_string(a.plant_id));
    plant->capacity += added;
    plant->upgrades_applied += 1;
    s.turn_investment += cost;
    outcome.plant_id = plant->id;
  }

  void operator()(const action::Decommission& a) {
    guard_playable(s);
    const auto it = std::find_if(s.fleet.begin(), s.fleet.end(), [&](const Plant& p) { return p.id == a.plant_id; });
    if (it == s.fleet.end()) reject(ErrorCode::unknown_plant, "no plant " + std::to_string(a.plant_id));
    s.free_sites[it->site] += 1;
    outcome.plant_id = it->id;
    s.fleet.erase(it);
  }

  void operator()(const action::SetImport& a) {
    guard_playable(s);
    if (!(a.level >= 0.0) || a.level > params().import_max_level) {
      reject(ErrorCode::invalid_action, "import level must lie in [0, " + format_number(params().import_max_level) +
                                            "] TJ per season");
    }
    s.import_level = a.level;
  }

  void operator()(const action::ProposePolicy& a) {
    guard_playable(s);
    const double probability = resolve_policy_probability(ctx, s, a.policy);
    if (s.policy_attempted_this_turn) reject(ErrorCode::policy_limit, "only one policy proposal per turn");
    const double roll = s.rng.uniform();
    const bool accepted = roll < probability;
    s.policy_attempted_this_turn = true;
    s.policies[a.policy].status = accepted ? PolicyStatus::enacted : PolicyStatus::rejectedThisTurn;
    if (accepted) apply_policy_effect(ctx, s, a.policy);
    outcome.probability = probability;
    outcome.roll = roll;
    outcome.policy_accepted = accepted;
  }

  void operator()(const action::Campaign& a) {
    guard_playable(s);
    if (s.policies[a.policy].status == PolicyStatus::enacted) {
      reject(ErrorCode::already_enacted, "policy " + std::string(to_string(a.policy)) + " is already enacted");
    }
    spend(s, params().campaign_cost, "a campaign");
    s.policies[a.policy].campaign_bonus += params().campaign_bonus;
  }

  void operator()(const action::SetSequester& a) {
    guard_playable(s);
    if (!(a.tonnes >= 0.0) || !std::isfinite(a.tonnes)) {
      reject(ErrorCode::invalid_action, "sequestration capacity must be non-negative");
    }
    s.sequester_capacity = a.tonnes;
  }

  void operator()(const action::RespondShock& a) {
    guard_playable(s);
    if (!s.active_shock || !requires_response(s.active_shock->kind)) {
      reject(ErrorCode::invalid_action, "no shock awaiting a response");
    }
    if (s.active_shock->choice) reject(ErrorCode::invalid_action, "shock already answered");
    const auto options = response_options(s.active_shock->kind);
    if (std::find(options.begin(), options.end(), a.choice) == options.end()) {
      reject(ErrorCode::invalid_action, std::string(to_string(a.choice)) + " is not an option for " +
                                            std::string(to_string(s.active_shock->kind)));
    }
    switch (a.choice) {
      case ShockResponse::emergencyImports:
        spend(s, params().emergency_imports_cost, "emergency imports");
        s.support = clamp_support(s.support + params().emergency_imports_support);
        break;
      case ShockResponse::gasPeakers:
        s.turn_extra_emissions_t += params().gas_peakers_emissions_t;
        s.support = clamp_support(s.support + params().gas_peakers_support);
        break;
      case ShockResponse::conservation:
        s.support = clamp_support(s.support + params().conservation_support);
        break;
      case ShockResponse::yes:
      case ShockResponse::no: break;  // preference only
    }
    s.active_shock->choice = a.choice;
  }

  void operator()(const action::Borrow& a) {
    guard_playable(s);
    if (!(a.amount > 0.0) || !std::isfinite(a.amount)) reject(ErrorCode::invalid_action, "loan amount must be positive");
    if (s.treasury.loan_outstanding + a.amount > s.treasury.loan_cap) {
      reject(ErrorCode::loan_cap, "loan would exceed the cap of " + money(s.treasury.loan_cap) + " per turn");
    }
    s.treasury.loan_outstanding += a.amount;
    s.treasury.budget += a.amount;
  }

  void operator()(const action::EndTurn&) {
    guard_end_turn(s);
    const SupplyCheck supply = check_supply(ctx, s);
    if (supply.summer_surplus < 0.0 || supply.winter_surplus < 0.0) {
      throw InsufficientSupplyError(supply.summer_surplus, supply.winter_surplus);
    }
    TurnClose closed = close_turn(ctx, s);
    outcome.shock_drawn = closed.drawn;
    s = std::move(closed.state);
  }
};

}  // namespace

Transition apply_action(const GameContext& ctx, const GameState& state, const Action& action) {
  Transition t{state, ActionRecord{}};
  t.record.turn = state.turn;
  t.record.action = action;
  std::visit(Applier{ctx, t.state, t.record.outcome}, action);

  const SupplyCheck supply = check_supply(ctx, t.state);
  IndicatorDeltas& d = t.record.deltas;
  d.budget = t.state.treasury.budget - state.treasury.budget;
  d.loan = t.state.treasury.loan_outstanding - state.treasury.loan_outstanding;
  d.support = t.state.support - state.support;
  d.capacity = active_capacity(t.state) - active_capacity(state);
  d.import_level = t.state.import_level - state.import_level;
  d.summer_surplus = supply.summer_surplus;
  d.winter_surplus = supply.winter_surplus;
  return t;
}

// ---- engine ----------------------------------------------------------------

Engine::Engine(std::shared_ptr<const GameContext> ctx, std::uint64_t seed, ObjectiveFrame frame)
    : ctx_(std::move(ctx)), state_(new_game(*ctx_, seed, frame)) {}

Engine::Engine(std::shared_ptr<const GameContext> ctx, std::uint64_t seed, ObjectiveFrame frame,
               std::vector<ActionRecord> log)
    : ctx_(std::move(ctx)), state_(replay(*ctx_, seed, frame, log)), log_(std::move(log)) {}

const ActionRecord& Engine::apply(const Action& action, std::string timestamp) {
  ActionRecord record;
  try {
    Transition t = apply_action(*ctx_, state_, action);
    state_ = std::move(t.state);
    record = std::move(t.record);
  } catch (const Error& e) {
    record.turn = state_.turn;
    record.action = action;
    record.accepted = false;
    record.rejection_code = std::string(to_string(e.code()));
    record.rejection_message = e.what();
    const SupplyCheck supply = check_supply(*ctx_, state_);
    record.deltas.summer_surplus = supply.summer_surplus;
    record.deltas.winter_surplus = supply.winter_surplus;
  }
  record.sequence = static_cast<std::int64_t>(log_.size());
  record.timestamp = std::move(timestamp);
  log_.push_back(std::move(record));
  return log_.back();
}

GameState replay(const GameContext& ctx, std::uint64_t seed, ObjectiveFrame frame, std::span<const ActionRecord> log) {
  GameState state = new_game(ctx, seed, frame);
  for (const auto& record : log) {
    std::optional<Transition> t;
    std::string code;
    try {
      t = apply_action(ctx, state, record.action);
    } catch (const Error& e) {
      code = std::string(to_string(e.code()));
    }
    const bool accepted = t.has_value();
    if (accepted != record.accepted || (!accepted && code != record.rejection_code) ||
        (accepted && t->record.outcome != record.outcome)) {
      throw Error(ErrorCode::replay_divergence,
                  "replay diverged at sequence " + std::to_string(record.sequence) + " (" +
                      std::string(action_name(record.action)) + ")");
    }
    if (accepted) state = std::move(t->state);
  }
  return state;
}

}  // namespace pathways
