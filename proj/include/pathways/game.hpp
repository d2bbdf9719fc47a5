#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pathways/balance.hpp"
#include "pathways/metrics.hpp"
#include "pathways/parameters.hpp"
#include "pathways/scenario.hpp"

namespace pathways {

// Seeded generator with a platform-independent mapping to [0, 1).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

struct Plant {
  int id = 0;
  TechnologyKind kind = TechnologyKind::solar;
  SiteClass site = SiteClass::land;
  double base_capacity = 0.0;  // TJ/yr when commissioned
  double capacity = 0.0;       // TJ/yr including upgrades
  int upgrades_applied = 0;
  int max_upgrades = 0;
  bool active = true;
  int turns_remaining = 0;     // construction turns left while inactive

  bool operator==(const Plant&) const = default;
};

struct Treasury {
  double budget = 0.0;           // CHF mln
  double loan_outstanding = 0.0; // CHF mln, repaid at the next turn boundary
  double loan_cap = 0.0;
  double interest_rate = 0.0;    // per turn

  bool operator==(const Treasury&) const = default;
};

enum class PolicyStatus { available, enacted, rejectedThisTurn };

template <>
struct EnumTraits<PolicyStatus> {
  static constexpr std::array<std::string_view, 3> names{"available", "enacted", "rejectedThisTurn"};
};

struct PolicyState {
  PolicyId id = PolicyId::alpinePV;
  double base_acceptance = 0.0;
  double campaign_bonus = 0.0;
  PolicyStatus status = PolicyStatus::available;

  bool operator==(const PolicyState&) const = default;
};

struct ShockEvent {
  ShockKind kind = ShockKind::glaciersMelting;
  int turn = 0;
  std::optional<ShockResponse> choice;
  bool withstood = false;

  bool operator==(const ShockEvent&) const = default;
};

bool requires_response(ShockKind kind);
std::vector<ShockResponse> response_options(ShockKind kind);
bool is_demand_shock(ShockKind kind);

struct GameState {
  std::uint64_t seed = 0;
  ObjectiveFrame objective_frame = ObjectiveFrame::supplyOnly;
  int turn = 1;
  int model_year = kFirstModelYear;
  bool completed = false;

  std::vector<Plant> fleet;  // includes plants under construction (inactive)
  int next_plant_id = 1;
  EnumArray<SiteClass, int> free_sites{};

  Treasury treasury;
  double support = 50.0;
  EnumArray<PolicyId, PolicyState> policies{};
  bool policy_attempted_this_turn = false;

  double import_level = 0.0;        // TJ per season
  double sequester_capacity = 0.0;  // t CO2-eq per year

  std::optional<ShockEvent> active_shock;
  std::vector<ShockEvent> shock_log;

  double turn_investment = 0.0;        // CHF mln spent on builds/upgrades this turn
  double turn_extra_emissions_t = 0.0; // from shock responses this turn

  std::vector<MetricRecord> metrics_history;
  Rng rng;

  bool operator==(const GameState&) const = default;
};

// Immutable scenario, parameters and precomputed baseline forecasts.
class GameContext {
 public:
  GameContext(Scenario scenario, Parameters params);

  static std::shared_ptr<const GameContext> bundled();

  const Scenario& scenario() const { return scenario_; }
  const Parameters& params() const { return params_; }
  const BalanceInputs& baseline(int year) const;

 private:
  Scenario scenario_;
  Parameters params_;
  std::map<int, BalanceInputs> baseline_;
};

// ---- actions ---------------------------------------------------------------

namespace action {
struct Build {
  TechnologyKind kind;
  SiteClass site;
  bool operator==(const Build&) const = default;
};
struct Upgrade {
  int plant_id;
  bool operator==(const Upgrade&) const = default;
};
struct Decommission {
  int plant_id;
  bool operator==(const Decommission&) const = default;
};
struct SetImport {
  double level;  // TJ per season
  bool operator==(const SetImport&) const = default;
};
struct ProposePolicy {
  PolicyId policy;
  bool operator==(const ProposePolicy&) const = default;
};
struct Campaign {
  PolicyId policy;
  bool operator==(const Campaign&) const = default;
};
struct SetSequester {
  double tonnes;  // t CO2-eq per year
  bool operator==(const SetSequester&) const = default;
};
struct RespondShock {
  ShockResponse choice;
  bool operator==(const RespondShock&) const = default;
};
struct Borrow {
  double amount;  // CHF mln
  bool operator==(const Borrow&) const = default;
};
struct EndTurn {
  bool operator==(const EndTurn&) const = default;
};
}  // namespace action

using Action = std::variant<action::Build, action::Upgrade, action::Decommission, action::SetImport,
                            action::ProposePolicy, action::Campaign, action::SetSequester, action::RespondShock,
                            action::Borrow, action::EndTurn>;

std::string_view action_name(const Action& action);

struct IndicatorDeltas {
  double budget = 0.0;
  double loan = 0.0;
  double support = 0.0;
  double capacity = 0.0;  // active TJ/yr
  double import_level = 0.0;
  double summer_surplus = 0.0;  // surplus after the action
  double winter_surplus = 0.0;

  bool operator==(const IndicatorDeltas&) const = default;
};

struct ActionOutcome {
  std::optional<int> plant_id;
  std::optional<double> probability;
  std::optional<double> roll;
  std::optional<bool> policy_accepted;
  std::optional<ShockKind> shock_drawn;

  bool operator==(const ActionOutcome&) const = default;
};

struct ActionRecord {
  std::int64_t sequence = 0;
  int turn = 1;
  Action action = action::EndTurn{};
  bool accepted = true;
  std::string rejection_code;
  std::string rejection_message;
  IndicatorDeltas deltas;
  ActionOutcome outcome;
  std::string timestamp;  // wall clock, not part of replay

  bool operator==(const ActionRecord&) const = default;
};

// ---- operations ------------------------------------------------------------

GameState new_game(const GameContext& ctx, std::uint64_t seed, ObjectiveFrame frame);

struct Transition {
  GameState state;
  ActionRecord record;
};

// Throws Error (InsufficientSupplyError for a short end of turn) on rejection;
// the input state is never modified.
Transition apply_action(const GameContext& ctx, const GameState& state, const Action& action);

struct SupplyCheck {
  double summer_surplus = 0.0;
  double winter_surplus = 0.0;
  double summer_supply = 0.0;
  double winter_supply = 0.0;
  double summer_demand = 0.0;
  double winter_demand = 0.0;
  int binding_year = 0;
};

// Worst seasonal surplus across the model years of the current turn.
SupplyCheck check_supply(const GameContext& ctx, const GameState& state);

struct InsufficientSupply {
  double summer_surplus = 0.0;
  double winter_surplus = 0.0;
};

using EndTurnOutcome = std::variant<GameState, InsufficientSupply>;

EndTurnOutcome end_turn(const GameContext& ctx, const GameState& state);

// Draws the shock for state.turn. Turn `nuclear_turn` always yields the
// nuclear reintroduction vote.
std::optional<ShockEvent> draw_shock(const GameContext& ctx, const GameState& state, Rng& rng);

double resolve_policy_probability(const GameContext& ctx, const GameState& state, PolicyId policy);

ScoreCard score(const GameContext& ctx, const GameState& state);

// Active plants aggregated per technology.
std::vector<FleetEntry> fleet_entries(const GameContext& ctx, const GameState& state);

// Baseline forecasts with enacted policies and the active shock applied.
BalanceInputs turn_inputs(const GameContext& ctx, const GameState& state, int year);

// Annual balance for `year` under the current fleet, imports, policies and
// shock, with fuel-burning plants dispatched season by season.
AnnualBalance turn_balance(const GameContext& ctx, const GameState& state, int year);

int upgrade_cap(const GameContext& ctx, const GameState& state, TechnologyKind kind);
int build_delay(const GameContext& ctx, const GameState& state, TechnologyKind kind);

// Sequential engine that logs every action, accepted or rejected.
class Engine {
 public:
  Engine(std::shared_ptr<const GameContext> ctx, std::uint64_t seed, ObjectiveFrame frame);
  // Restores an engine by replaying a recorded log.
  Engine(std::shared_ptr<const GameContext> ctx, std::uint64_t seed, ObjectiveFrame frame,
         std::vector<ActionRecord> log);

  const ActionRecord& apply(const Action& action, std::string timestamp = {});

  const GameContext& context() const { return *ctx_; }
  const GameState& state() const { return state_; }
  const std::vector<ActionRecord>& log() const { return log_; }
  ScoreCard score() const { return pathways::score(*ctx_, state_); }

 private:
  std::shared_ptr<const GameContext> ctx_;
  GameState state_;
  std::vector<ActionRecord> log_;
};

// Re-applies a log; throws replay-divergence when acceptance or outcomes differ.
GameState replay(const GameContext& ctx, std::uint64_t seed, ObjectiveFrame frame,
                 std::span<const ActionRecord> log);

}  // namespace pathways
