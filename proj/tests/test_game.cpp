#include <doctest.h>

#include <random>
#include <set>

#include "pathways/error.hpp"
#include "pathways/game.hpp"
#include "support.hpp"

using namespace pathways;

namespace {

const Parameters& P() { return default_parameters(); }
const Scenario& S() { return bundled_scenario(); }

std::shared_ptr<const GameContext> context_with(void (*tweak)(Parameters&)) {
  Parameters p = default_parameters();
  tweak(p);
  return std::make_shared<const GameContext>(bundled_scenario(), p);
}

std::shared_ptr<const GameContext> rich() {
  static const auto ctx = context_with([](Parameters& p) { p.budget_per_turn = 1e7; });
  return ctx;
}

Transition act(const GameContext& ctx, const GameState& s, const Action& a) { return apply_action(ctx, s, a); }

ErrorCode rejection(const GameContext& ctx, const GameState& s, const Action& a) {
  try {
    apply_action(ctx, s, a);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("action was accepted");
  return ErrorCode::invalid_parameter;
}

// Imports at the maximum keep every turn supplied.
void end_turn_safely(Engine& e) {
  if (e.state().import_level < e.context().params().import_max_level) {
    e.apply(action::SetImport{e.context().params().import_max_level});
  }
  test::answer_shock(e);
  const auto& r = e.apply(action::EndTurn{});
  REQUIRE_MESSAGE(r.accepted, r.rejection_message);
}

double active_capacity(const GameState& s, TechnologyKind k) {
  double total = 0.0;
  for (const auto& p : s.fleet) {
    if (p.active && p.kind == k) total += p.capacity;
  }
  return total;
}

// Independent statement of the end-of-turn cash flow.
double expected_budget(const GameContext& ctx, const GameState& s, double credit) {
  const auto [first, last] = P().turn_years(s.turn);
  const int years = last - first + 1;
  double production = 0.0;
  for (int year = first; year <= last; ++year) {
    const AnnualBalance b = turn_balance(ctx, s, year);
    for (TechnologyKind k : all_values<TechnologyKind>()) production += b.generation[k] * S().technologies[k].generation_cost;
  }
  production /= 1e6;
  const double imports = years * 2 * s.import_level * P().import_price;
  const double sequestration = years * s.sequester_capacity * P().sequestration_price / 1e6;
  const double loan = s.treasury.loan_outstanding * (1.0 + P().loan_interest);
  return s.treasury.budget - production - imports - sequestration - loan + credit;
}

GameState with_shock(GameState s, ShockKind kind) {
  s.active_shock = ShockEvent{kind, s.turn, {}, false};
  return s;
}

}  // namespace

TEST_SUITE("game") {

TEST_CASE("a new game starts from the scenario") {
  const auto ctx = test::ctx();
  const GameState s = new_game(*ctx, 42, ObjectiveFrame::transitionFocus);
  CHECK(s.turn == 1);
  CHECK(s.model_year == 2022);
  CHECK_FALSE(s.completed);
  CHECK(s.seed == 42);
  CHECK(s.objective_frame == ObjectiveFrame::transitionFocus);
  CHECK(s.treasury.budget == P().budget_per_turn);
  CHECK(s.treasury.loan_cap == P().loan_cap);
  CHECK(s.support == 50.0);
  CHECK(s.import_level == P().import_initial);
  CHECK(s.free_sites == P().sites);
  CHECK_FALSE(s.active_shock.has_value());
  for (TechnologyKind k : all_values<TechnologyKind>()) {
    CAPTURE(to_string(k));
    CHECK(active_capacity(s, k) == doctest::Approx(S().capacity[k]));
    const auto n = std::count_if(s.fleet.begin(), s.fleet.end(), [k](const Plant& p) { return p.kind == k; });
    CHECK(n == P().tech[k].initial_plants);
  }
  std::set<int> ids;
  for (const auto& p : s.fleet) ids.insert(p.id);
  CHECK(ids.size() == s.fleet.size());
  for (PolicyId id : all_values<PolicyId>()) {
    CHECK(s.policies[id].status == PolicyStatus::available);
    CHECK(s.policies[id].base_acceptance == P().policies[id].acceptance);
  }
}

TEST_CASE("build increments are a fraction of the initial capacity") {
  const auto ctx = rich();
  const GameState s0 = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  for (TechnologyKind k : all_values<TechnologyKind>()) {
    if (k == TechnologyKind::nuclear) continue;
    CAPTURE(to_string(k));
    const TechRules& rules = P().tech[k];
    const auto t = act(*ctx, s0, action::Build{k, rules.sites.front()});
    const Plant& plant = t.state.fleet.back();
    const double expected = rules.build_fraction * S().capacity[k];
    CHECK(plant.base_capacity == doctest::Approx(expected));
    CHECK(plant.capacity == doctest::Approx(expected));
    CHECK(plant.site == rules.sites.front());
    CHECK(t.record.outcome.plant_id == plant.id);
    CHECK(s0.treasury.budget - t.state.treasury.budget == doctest::Approx(expected * rules.unit_cost));
    CHECK(t.state.free_sites[rules.sites.front()] == s0.free_sites[rules.sites.front()] - 1);
    CHECK(t.state.turn_investment == doctest::Approx(expected * rules.unit_cost));
  }
}

TEST_CASE("build rejections") {
  const auto ctx = test::ctx();
  const GameState s0 = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  CHECK(rejection(*ctx, s0, action::Build{TechnologyKind::nuclear, SiteClass::land}) == ErrorCode::rejected_action);
  CHECK(rejection(*ctx, s0, action::Build{TechnologyKind::gas, SiteClass::water}) == ErrorCode::invalid_action);
  CHECK(rejection(*ctx, s0, action::Build{TechnologyKind::solar, SiteClass::water}) == ErrorCode::invalid_action);

  GameState full = s0;
  full.free_sites[SiteClass::land] = 0;
  CHECK(rejection(*ctx, full, action::Build{TechnologyKind::gas, SiteClass::land}) == ErrorCode::no_free_site);

  GameState poor = s0;
  poor.treasury.budget = 1.0;
  CHECK(rejection(*ctx, poor, action::Build{TechnologyKind::gas, SiteClass::land}) == ErrorCode::insufficient_budget);
}

TEST_CASE("upgrade caps hold for every technology (brute force)") {
  const auto ctx = rich();
  const GameState s0 = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  for (const Plant& start : s0.fleet) {
    CAPTURE(to_string(start.kind));
    const TechRules& rules = P().tech[start.kind];
    GameState s = s0;
    int accepted = 0;
    for (int i = 0; i < 20; ++i) {
      try {
        s = act(*ctx, s, action::Upgrade{start.id}).state;
        ++accepted;
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::upgrade_cap);
        break;
      }
    }
    CHECK(accepted == rules.max_upgrades);
    const auto it = std::find_if(s.fleet.begin(), s.fleet.end(), [&](const Plant& p) { return p.id == start.id; });
    CHECK(it->capacity == doctest::Approx(start.base_capacity * (1.0 + rules.upgrade_fraction * accepted)));
    CHECK(it->upgrades_applied == accepted);
  }
}

TEST_CASE("upgrade increments use the base capacity and cost the unit price") {
  const auto ctx = rich();
  const GameState s0 = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  const auto solar = std::find_if(s0.fleet.begin(), s0.fleet.end(),
                                  [](const Plant& p) { return p.kind == TechnologyKind::solar; });
  const double step = 0.05 * solar->base_capacity;
  const auto once = act(*ctx, s0, action::Upgrade{solar->id});
  const auto twice = act(*ctx, once.state, action::Upgrade{solar->id});
  CHECK(once.record.deltas.capacity == doctest::Approx(step));
  CHECK(twice.record.deltas.capacity == doctest::Approx(step));
  CHECK(-twice.record.deltas.budget == doctest::Approx(step * P().tech[TechnologyKind::solar].unit_cost));
}

TEST_CASE("upgrade rejections") {
  const auto ctx = rich();
  const GameState s0 = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  CHECK(rejection(*ctx, s0, action::Upgrade{999}) == ErrorCode::unknown_plant);
  const auto built = act(*ctx, s0, action::Build{TechnologyKind::wind, SiteClass::land});
  CHECK(rejection(*ctx, built.state, action::Upgrade{*built.record.outcome.plant_id}) == ErrorCode::invalid_action);
}

TEST_CASE("construction delays show up in supply exactly on time") {
  const auto ctx = rich();
  for (auto [kind, site, delay] : {std::tuple{TechnologyKind::wind, SiteClass::land, 2},
                                   std::tuple{TechnologyKind::river, SiteClass::water, 3},
                                   std::tuple{TechnologyKind::reservoir, SiteClass::alpine, 6},
                                   std::tuple{TechnologyKind::solar, SiteClass::land, 0}}) {
    CAPTURE(to_string(kind));
    Engine with(ctx, 9, ObjectiveFrame::supplyOnly);
    Engine without(ctx, 9, ObjectiveFrame::supplyOnly);
    const double share = S().technologies[kind].summer_share;
    const double added = P().tech[kind].build_fraction * S().capacity[kind];
    with.apply(action::Build{kind, site});
    for (int turn = 1; turn <= delay + 1; ++turn) {
      REQUIRE(with.state().turn == turn);
      const double gain = check_supply(*ctx, with.state()).summer_supply -
                          check_supply(*ctx, without.state()).summer_supply;
      if (turn <= delay) {
        CHECK(gain == doctest::Approx(0.0));
      } else {
        CHECK(gain == doctest::Approx(added * share));
      }
      end_turn_safely(with);
      end_turn_safely(without);
    }
  }
}

TEST_CASE("fast-track policy shortens wind construction") {
  const auto ctx = context_with([](Parameters& p) {
    p.policies[PolicyId::fastTrackWind].acceptance = 1.0;
    p.budget_per_turn = 1e7;
  });
  Engine e(ctx, 3, ObjectiveFrame::supplyOnly);
  REQUIRE(e.apply(action::ProposePolicy{PolicyId::fastTrackWind}).outcome.policy_accepted == true);
  CHECK(build_delay(*ctx, e.state(), TechnologyKind::wind) == 1);
  CHECK(build_delay(*ctx, e.state(), TechnologyKind::river) == 3);
  const auto id = *e.apply(action::Build{TechnologyKind::wind, SiteClass::land}).outcome.plant_id;
  end_turn_safely(e);
  const auto it = std::find_if(e.state().fleet.begin(), e.state().fleet.end(), [&](const Plant& p) { return p.id == id; });
  CHECK(it->active);
}

TEST_CASE("upgrade policies raise the cap of existing and future plants") {
  const auto ctx = context_with([](Parameters& p) {
    p.policies[PolicyId::alpinePV].acceptance = 1.0;
    p.budget_per_turn = 1e7;
  });
  const GameState s0 = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  const auto t = act(*ctx, s0, action::ProposePolicy{PolicyId::alpinePV});
  REQUIRE(t.record.outcome.policy_accepted == true);
  CHECK(upgrade_cap(*ctx, t.state, TechnologyKind::solar) == 14);
  CHECK(upgrade_cap(*ctx, t.state, TechnologyKind::wind) == 7);
  for (const auto& p : t.state.fleet) {
    if (p.kind == TechnologyKind::solar) CHECK(p.max_upgrades == 14);
  }
  const auto built = act(*ctx, t.state, action::Build{TechnologyKind::solar, SiteClass::alpine});
  CHECK(built.state.fleet.back().max_upgrades == 14);
}

TEST_CASE("demand policies cut the sector's consumption") {
  const auto ctx = context_with([](Parameters& p) { p.policies[PolicyId::buildingInsulation].acceptance = 1.0; });
  const GameState s0 = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  const GameState s1 = act(*ctx, s0, action::ProposePolicy{PolicyId::buildingInsulation}).state;
  const auto before = turn_inputs(*ctx, s0, 2023);
  const auto after = turn_inputs(*ctx, s1, 2023);
  for (CarrierKind c : all_values<CarrierKind>()) {
    CHECK(after.consumption[c][Sector::households] == doctest::Approx(0.9 * before.consumption[c][Sector::households]));
    CHECK(after.consumption[c][Sector::industry] == doctest::Approx(before.consumption[c][Sector::industry]));
  }
  CHECK(check_supply(*ctx, s1).winter_surplus > check_supply(*ctx, s0).winter_surplus);
}

TEST_CASE("policy probability is base plus campaigns plus support shift, clamped") {
  const auto ctx = test::ctx();
  GameState s = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  for (PolicyId id : all_values<PolicyId>()) {
    for (double support : {0.0, 10.0, 50.0, 73.0, 100.0}) {
      for (double bonus : {0.0, 0.1, 0.3, 0.5}) {
        s.support = support;
        s.policies[id].campaign_bonus = bonus;
        const double raw = P().policies[id].acceptance + bonus + (support - 50.0) / 200.0;
        const double expected = raw < 0.0 ? 0.0 : raw > 1.0 ? 1.0 : raw;
        CHECK(resolve_policy_probability(*ctx, s, id) == doctest::Approx(expected));
      }
    }
  }
}

TEST_CASE("policy proposals roll once per turn") {
  const auto ctx = test::ctx();
  const GameState s0 = new_game(*ctx, 11, ObjectiveFrame::supplyOnly);
  const auto t = act(*ctx, s0, action::ProposePolicy{PolicyId::windParkRegulation});
  REQUIRE(t.record.outcome.roll.has_value());
  CHECK(*t.record.outcome.probability == doctest::Approx(0.5));
  CHECK(*t.record.outcome.policy_accepted == (*t.record.outcome.roll < 0.5));
  Rng fresh(11);
  CHECK(*t.record.outcome.roll == fresh.uniform());
  CHECK(rejection(*ctx, t.state, action::ProposePolicy{PolicyId::alpinePV}) == ErrorCode::policy_limit);

  GameState enacted = s0;
  enacted.policies[PolicyId::alpinePV].status = PolicyStatus::enacted;
  CHECK(rejection(*ctx, enacted, action::ProposePolicy{PolicyId::alpinePV}) == ErrorCode::already_enacted);
  CHECK(rejection(*ctx, enacted, action::Campaign{PolicyId::alpinePV}) == ErrorCode::already_enacted);
}

TEST_CASE("a rejected policy can be proposed again next turn") {
  const auto ctx = context_with([](Parameters& p) { p.policies[PolicyId::industrySubsidy].acceptance = 0.0; });
  Engine e(ctx, 5, ObjectiveFrame::supplyOnly);
  e.apply(action::Campaign{PolicyId::industrySubsidy});
  GameState s = e.state();
  s.support = 0.0;
  const auto t = act(*ctx, s, action::ProposePolicy{PolicyId::industrySubsidy});
  CHECK(t.record.outcome.policy_accepted == false);
  CHECK(t.state.policies[PolicyId::industrySubsidy].status == PolicyStatus::rejectedThisTurn);
  e.apply(action::ProposePolicy{PolicyId::industrySubsidy});
  end_turn_safely(e);
  CHECK(e.state().policies[PolicyId::industrySubsidy].status == PolicyStatus::available);
  CHECK_FALSE(e.state().policy_attempted_this_turn);
}

TEST_CASE("campaigns cost money and add acceptance") {
  const auto ctx = test::ctx();
  const GameState s0 = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  const auto t = act(*ctx, s0, action::Campaign{PolicyId::windParkRegulation});
  CHECK(t.record.deltas.budget == doctest::Approx(-P().campaign_cost));
  CHECK(resolve_policy_probability(*ctx, t.state, PolicyId::windParkRegulation) == doctest::Approx(0.6));
}

TEST_CASE("demand shocks scale the matching season by 5 percent") {
  const auto ctx = test::ctx();
  const GameState s0 = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  const SupplyCheck base = check_supply(*ctx, s0);
  const SupplyCheck cold = check_supply(*ctx, with_shock(s0, ShockKind::coldSpell));
  const SupplyCheck heat = check_supply(*ctx, with_shock(s0, ShockKind::heatWave));
  const SupplyCheck crowd = check_supply(*ctx, with_shock(s0, ShockKind::massImmigration));
  const SupplyCheck glacier = check_supply(*ctx, with_shock(s0, ShockKind::glaciersMelting));
  CHECK(cold.winter_demand == doctest::Approx(1.05 * base.winter_demand));
  CHECK(cold.summer_demand == doctest::Approx(base.summer_demand));
  CHECK(heat.summer_demand == doctest::Approx(1.05 * base.summer_demand));
  CHECK(heat.winter_demand == doctest::Approx(base.winter_demand));
  CHECK(crowd.summer_demand == doctest::Approx(1.05 * base.summer_demand));
  CHECK(crowd.winter_demand == doctest::Approx(1.05 * base.winter_demand));
  CHECK(glacier.summer_demand == doctest::Approx(base.summer_demand));
  CHECK(glacier.winter_demand == doctest::Approx(base.winter_demand));

  // The balance sees the same multipliers on electricity consumption.
  const auto in = turn_inputs(*ctx, with_shock(s0, ShockKind::massImmigration), 2022);
  const auto in0 = turn_inputs(*ctx, s0, 2022);
  CHECK(in.consumption[CarrierKind::electricity][Sector::services] ==
        doctest::Approx(1.05 * in0.consumption[CarrierKind::electricity][Sector::services]));
}

TEST_CASE("supply check oracle") {
  const auto ctx = test::ctx();
  const GameState s = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  double summer_supply = s.import_level;
  double winter_supply = s.import_level;
  for (TechnologyKind k : all_values<TechnologyKind>()) {
    summer_supply += S().capacity[k] * S().technologies[k].summer_share;
    winter_supply += S().capacity[k] * (1.0 - S().technologies[k].summer_share);
  }
  double worst_summer = 1e300;
  double worst_winter = 1e300;
  for (int year = 2022; year <= 2024; ++year) {
    double summer = 0.0;
    double winter = 0.0;
    for (Sector sec : all_values<Sector>()) {
      const auto& m = S().calibration.forecasts.at(consumption_series(CarrierKind::electricity, sec));
      const double d = std::max(0.0, m.intercept + m.slope * (year - m.base_year)) /
                       (1.0 - S().loss_rates[CarrierKind::electricity]);
      summer += d * *S().splits.demand[sec];
      winter += d * (1.0 - *S().splits.demand[sec]);
    }
    worst_summer = std::min(worst_summer, summer_supply - summer);
    worst_winter = std::min(worst_winter, winter_supply - winter);
  }
  const SupplyCheck c = check_supply(*ctx, s);
  CHECK(c.summer_surplus == doctest::Approx(worst_summer));
  CHECK(c.winter_surplus == doctest::Approx(worst_winter));
}

TEST_CASE("shock responses") {
  const auto ctx = test::ctx();
  const GameState s0 = with_shock(new_game(*ctx, 1, ObjectiveFrame::supplyOnly), ShockKind::coldSpell);

  const auto imports = act(*ctx, s0, action::RespondShock{ShockResponse::emergencyImports});
  CHECK(imports.record.deltas.budget == doctest::Approx(-600.0));
  CHECK(imports.record.deltas.support == doctest::Approx(5.0));
  CHECK(imports.state.active_shock->choice == ShockResponse::emergencyImports);

  const auto peakers = act(*ctx, s0, action::RespondShock{ShockResponse::gasPeakers});
  CHECK(peakers.state.turn_extra_emissions_t == 400000.0);
  CHECK(peakers.record.deltas.support == 0.0);

  const auto conserve = act(*ctx, s0, action::RespondShock{ShockResponse::conservation});
  CHECK(conserve.record.deltas.support == doctest::Approx(-10.0));

  CHECK(rejection(*ctx, s0, action::RespondShock{ShockResponse::yes}) == ErrorCode::invalid_action);
  CHECK(rejection(*ctx, imports.state, action::RespondShock{ShockResponse::gasPeakers}) == ErrorCode::invalid_action);
  CHECK(rejection(*ctx, new_game(*ctx, 1, ObjectiveFrame::supplyOnly), action::RespondShock{ShockResponse::no}) ==
        ErrorCode::invalid_action);
  CHECK(rejection(*ctx, s0, action::EndTurn{}) == ErrorCode::response_required);

  const GameState vote = with_shock(new_game(*ctx, 1, ObjectiveFrame::supplyOnly), ShockKind::nuclearReintroduction);
  const auto yes = act(*ctx, vote, action::RespondShock{ShockResponse::yes});
  CHECK(yes.record.deltas.support == 0.0);
  CHECK(yes.record.deltas.budget == 0.0);
  CHECK(rejection(*ctx, vote, action::RespondShock{ShockResponse::conservation}) == ErrorCode::invalid_action);
}

TEST_CASE("gas peakers add their emissions to the turn's first year") {
  const auto ctx = test::ctx();
  GameState s0 = with_shock(new_game(*ctx, 1, ObjectiveFrame::supplyOnly), ShockKind::coldSpell);
  s0.import_level = P().import_max_level;
  const GameState a = act(*ctx, act(*ctx, s0, action::RespondShock{ShockResponse::conservation}).state,
                          action::EndTurn{}).state;
  const GameState b = act(*ctx, act(*ctx, s0, action::RespondShock{ShockResponse::gasPeakers}).state,
                          action::EndTurn{}).state;
  REQUIRE(a.metrics_history.size() == 3);
  CHECK(b.metrics_history[0].emissions - a.metrics_history[0].emissions == doctest::Approx(0.4));
  CHECK(b.metrics_history[1].emissions == a.metrics_history[1].emissions);
}

TEST_CASE("withstanding a demand shock earns budget and support") {
  const auto ctx = test::ctx();
  GameState s0 = with_shock(new_game(*ctx, 1, ObjectiveFrame::supplyOnly), ShockKind::massImmigration);
  s0.import_level = P().import_max_level;
  const auto t = act(*ctx, s0, action::EndTurn{});
  CHECK(t.state.shock_log.back().withstood);
  CHECK(t.state.shock_log.back().kind == ShockKind::massImmigration);
  const double drawn_bonus =
      t.state.active_shock && t.state.active_shock->kind == ShockKind::renewableSupport ? 10.0 : 0.0;
  CHECK(t.state.support - drawn_bonus == doctest::Approx(55.0));
  CHECK(t.state.treasury.budget ==
        doctest::Approx(expected_budget(*ctx, s0, P().budget_per_turn * (1.0 + P().reward_budget))));

  GameState quiet = with_shock(s0, ShockKind::glaciersMelting);
  const auto q = act(*ctx, quiet, action::EndTurn{});
  CHECK_FALSE(q.state.shock_log.back().withstood);
  CHECK(q.state.treasury.budget == doctest::Approx(expected_budget(*ctx, quiet, P().budget_per_turn)));
}

TEST_CASE("end-of-turn budget arithmetic") {
  const auto ctx = test::ctx();
  Engine e(ctx, 77, ObjectiveFrame::supplyOnly);
  e.apply(action::Borrow{2000});
  e.apply(action::SetImport{40000});
  e.apply(action::SetSequester{100000});
  e.apply(action::Build{TechnologyKind::gas, SiteClass::land});
  const GameState before = e.state();

  const double expected = expected_budget(*ctx, before, P().budget_per_turn);
  CHECK(before.treasury.loan_outstanding == 2000);
  CHECK(expected < before.treasury.budget + P().budget_per_turn - 2000 * 1.1);

  const auto& r = e.apply(action::EndTurn{});
  REQUIRE(r.accepted);
  CHECK(e.state().treasury.budget == doctest::Approx(expected));
  CHECK(e.state().treasury.loan_outstanding == 0.0);
  CHECK(r.deltas.loan == doctest::Approx(-2000.0));
}

TEST_CASE("borrowing is capped per turn") {
  const auto ctx = test::ctx();
  const GameState s0 = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  const auto t = act(*ctx, s0, action::Borrow{3000});
  CHECK(t.state.treasury.budget == doctest::Approx(s0.treasury.budget + 3000));
  CHECK(rejection(*ctx, t.state, action::Borrow{2500}) == ErrorCode::loan_cap);
  CHECK_NOTHROW(act(*ctx, t.state, action::Borrow{2000}));
  CHECK(rejection(*ctx, s0, action::Borrow{0}) == ErrorCode::invalid_action);
  CHECK(rejection(*ctx, s0, action::Borrow{-5}) == ErrorCode::invalid_action);
}

TEST_CASE("sequestration offsets annual emissions") {
  const auto ctx = test::ctx();
  GameState s0 = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  s0.import_level = P().import_max_level;
  const GameState a = act(*ctx, s0, action::EndTurn{}).state;
  const GameState b = act(*ctx, act(*ctx, s0, action::SetSequester{250000}).state, action::EndTurn{}).state;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.metrics_history[i].emissions - b.metrics_history[i].emissions == doctest::Approx(0.25));
  }
  CHECK(rejection(*ctx, s0, action::SetSequester{-1}) == ErrorCode::invalid_action);
}

TEST_CASE("imports and decommissioning") {
  const auto ctx = test::ctx();
  const GameState s0 = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  const auto up = act(*ctx, s0, action::SetImport{P().import_max_level});
  CHECK(up.record.deltas.import_level == doctest::Approx(P().import_max_level - P().import_initial));
  CHECK(up.record.deltas.summer_surplus > check_supply(*ctx, s0).summer_surplus);
  CHECK(rejection(*ctx, s0, action::SetImport{P().import_max_level + 1}) == ErrorCode::invalid_action);
  CHECK(rejection(*ctx, s0, action::SetImport{-1}) == ErrorCode::invalid_action);

  const Plant& nuclear = *std::find_if(s0.fleet.begin(), s0.fleet.end(),
                                       [](const Plant& p) { return p.kind == TechnologyKind::nuclear; });
  const auto gone = act(*ctx, s0, action::Decommission{nuclear.id});
  CHECK(gone.state.fleet.size() == s0.fleet.size() - 1);
  CHECK(gone.record.deltas.capacity == doctest::Approx(-nuclear.capacity));
  CHECK(gone.state.free_sites[nuclear.site] == s0.free_sites[nuclear.site] + 1);
  CHECK(rejection(*ctx, gone.state, action::Decommission{nuclear.id}) == ErrorCode::unknown_plant);
}

TEST_CASE("ending a turn short of supply is rejected and changes nothing") {
  const auto ctx = test::ctx();
  GameState s0 = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  s0.import_level = 0.0;
  for (auto& p : s0.fleet) {
    if (p.kind == TechnologyKind::nuclear) p.active = false;
  }
  try {
    apply_action(*ctx, s0, action::EndTurn{});
    FAIL("expected insufficient supply");
  } catch (const InsufficientSupplyError& e) {
    CHECK(e.code() == ErrorCode::insufficient_supply);
    CHECK(std::min(e.summer_surplus(), e.winter_surplus()) < 0.0);
  }
  const auto outcome = end_turn(*ctx, s0);
  REQUIRE(std::holds_alternative<InsufficientSupply>(outcome));
  CHECK(std::get<InsufficientSupply>(outcome).winter_surplus == doctest::Approx(check_supply(*ctx, s0).winter_surplus));

  Engine e(ctx, 1, ObjectiveFrame::supplyOnly);
  e.apply(action::SetImport{0});
  for (const auto& p : s0.fleet) {
    if (p.kind == TechnologyKind::nuclear) e.apply(action::Decommission{p.id});
  }
  const GameState before = e.state();
  const auto& r = e.apply(action::EndTurn{});
  CHECK_FALSE(r.accepted);
  CHECK(r.rejection_code == "insufficient-supply");
  CHECK(std::min(r.deltas.summer_surplus, r.deltas.winter_surplus) < 0.0);
  CHECK(e.state() == before);
}

TEST_CASE("nuclear vote always arrives at turn 5") {
  const auto ctx = test::ctx();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Engine e(ctx, seed, ObjectiveFrame::supplyOnly);
    for (int t = 1; t < 5; ++t) end_turn_safely(e);
    REQUIRE(e.state().turn == 5);
    REQUIRE(e.state().active_shock.has_value());
    CHECK(e.state().active_shock->kind == ShockKind::nuclearReintroduction);
  }
  GameState s = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  s.turn = 5;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    CHECK(draw_shock(*ctx, s, rng)->kind == ShockKind::nuclearReintroduction);
  }
}

TEST_CASE("shock draws: probability, recurrence and one-off events") {
  const auto ctx = test::ctx();
  GameState s = new_game(*ctx, 1, ObjectiveFrame::supplyOnly);
  s.turn = 2;
  int drawn = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    Rng rng(static_cast<std::uint64_t>(i));
    if (draw_shock(*ctx, s, rng)) ++drawn;
  }
  CHECK(drawn / static_cast<double>(n) == doctest::Approx(0.5).epsilon(0.05));

  s.shock_log = {ShockEvent{ShockKind::massImmigration, 1, {}, true}, ShockEvent{ShockKind::renewableSupport, 1, {}, false},
                 ShockEvent{ShockKind::glaciersMelting, 1, {}, false}};
  for (int i = 0; i < 500; ++i) {
    Rng rng(static_cast<std::uint64_t>(i));
    if (const auto e = draw_shock(*ctx, s, rng)) {
      CHECK((e->kind == ShockKind::coldSpell || e->kind == ShockKind::heatWave));
    }
  }

  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Engine e(ctx, seed, ObjectiveFrame::supplyOnly);
    while (!e.state().completed) end_turn_safely(e);
    std::map<ShockKind, int> seen;
    for (const auto& ev : e.state().shock_log) ++seen[ev.kind];
    CHECK(seen[ShockKind::massImmigration] <= 1);
    CHECK(seen[ShockKind::renewableSupport] <= 1);
    CHECK(seen[ShockKind::glaciersMelting] <= 1);
    CHECK(seen[ShockKind::nuclearReintroduction] == 1);
  }
}

TEST_CASE("renewable support adds ten points when drawn") {
  const auto ctx = test::ctx();
  int observed = 0;
  for (std::uint64_t seed = 0; seed < 200 && observed < 5; ++seed) {
    Engine e(ctx, seed, ObjectiveFrame::supplyOnly);
    while (!e.state().completed) {
      e.apply(action::SetImport{P().import_max_level});
      test::answer_shock(e);
      const bool reward = e.state().active_shock && is_demand_shock(e.state().active_shock->kind);
      const double support = e.state().support;
      const auto& r = e.apply(action::EndTurn{});
      REQUIRE(r.accepted);
      if (r.outcome.shock_drawn == ShockKind::renewableSupport) {
        CHECK(e.state().support == doctest::Approx(std::min(100.0, support + 10.0 + (reward ? 5.0 : 0.0))));
        ++observed;
      }
    }
  }
  CHECK(observed > 0);
}

TEST_CASE("a full game yields 29 annual records and then refuses actions") {
  const auto ctx = test::ctx();
  Engine e(ctx, 2024, ObjectiveFrame::supplyOnly);
  while (!e.state().completed) end_turn_safely(e);
  const auto& h = e.state().metrics_history;
  REQUIRE(h.size() == 29);
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i].year == 2022 + static_cast<int>(i));
  CHECK(e.state().model_year == 2050);
  const ScoreCard card = e.score();
  CHECK_FALSE(card.partial);
  CHECK(card.years == 29);
  CHECK(card.first_year == 2022);
  CHECK(card.last_year == 2050);
  const auto& r = e.apply(action::SetImport{0});
  CHECK_FALSE(r.accepted);
  CHECK(r.rejection_code == "game-complete");
  CHECK_FALSE(e.apply(action::EndTurn{}).accepted);
}

TEST_CASE("a partial card covers the completed turns") {
  const auto ctx = test::ctx();
  Engine e(ctx, 8, ObjectiveFrame::supplyOnly);
  for (int t = 0; t < 2; ++t) end_turn_safely(e);
  const ScoreCard card = e.score();
  CHECK(card.partial);
  CHECK(card.first_year == 2022);
  CHECK(card.last_year == 2027);
  CHECK(card.years == 6);
}

TEST_CASE("every turn balance of a game closes") {
  const auto ctx = test::ctx();
  Engine e(ctx, 31, ObjectiveFrame::supplyOnly);
  e.apply(action::Build{TechnologyKind::solar, SiteClass::land});
  while (!e.state().completed) {
    const auto [first, last] = P().turn_years(e.state().turn);
    for (int y = first; y <= last; ++y) CHECK(turn_balance(*ctx, e.state(), y).max_relative_residual() < 1e-9);
    end_turn_safely(e);
  }
}

TEST_CASE("property: accepted actions never leave a negative budget") {
  const auto ctx = test::ctx();
  std::mt19937_64 rng(2718);
  for (int game = 0; game < 15; ++game) {
    Engine e(ctx, rng(), ObjectiveFrame::supplyOnly);
    for (int step = 0; step < 150 && !e.state().completed; ++step) {
      const auto& s = e.state();
      std::uniform_int_distribution<int> pick(0, 9);
      Action a = action::EndTurn{};
      const auto tech = static_cast<TechnologyKind>(rng() % enum_count<TechnologyKind>);
      const auto site = static_cast<SiteClass>(rng() % enum_count<SiteClass>);
      const auto policy = static_cast<PolicyId>(rng() % enum_count<PolicyId>);
      const int plant = s.fleet.empty() ? 1 : s.fleet[rng() % s.fleet.size()].id;
      switch (pick(rng)) {
        case 0: a = action::Build{tech, site}; break;
        case 1: a = action::Upgrade{plant}; break;
        case 2: a = action::SetImport{static_cast<double>(rng() % 60001)}; break;
        case 3: a = action::ProposePolicy{policy}; break;
        case 4: a = action::Campaign{policy}; break;
        case 5: a = action::SetSequester{static_cast<double>(rng() % 2000000)}; break;
        case 6: a = action::Borrow{static_cast<double>(1 + rng() % 3000)}; break;
        case 7:
          if (s.active_shock && requires_response(s.active_shock->kind)) {
            const auto opts = response_options(s.active_shock->kind);
            a = action::RespondShock{opts[rng() % opts.size()]};
          }
          break;
        default: break;
      }
      e.apply(a);
      CHECK(e.state().treasury.budget >= 0.0);
      CHECK(e.state().support >= 0.0);
      CHECK(e.state().support <= 100.0);
      for (const auto& p : e.state().fleet) CHECK(p.upgrades_applied <= p.max_upgrades);
      for (SiteClass c : all_values<SiteClass>()) CHECK(e.state().free_sites[c] >= 0);
    }
  }
}

TEST_CASE("engines are deterministic and replay reproduces them") {
  const auto ctx = test::ctx();
  auto play = [&](std::uint64_t seed) {
    Engine e(ctx, seed, ObjectiveFrame::transitionFocus);
    e.apply(action::ProposePolicy{PolicyId::alpinePV});
    e.apply(action::Build{TechnologyKind::solar, SiteClass::land});
    e.apply(action::Upgrade{999});
    while (!e.state().completed) end_turn_safely(e);
    return e;
  };
  const Engine a = play(555);
  const Engine b = play(555);
  CHECK(a.state() == b.state());
  CHECK(a.log() == b.log());
  CHECK(a.score() == b.score());
  for (std::size_t i = 0; i < a.log().size(); ++i) CHECK(a.log()[i].sequence == static_cast<std::int64_t>(i));

  CHECK(replay(*ctx, 555, ObjectiveFrame::transitionFocus, a.log()) == a.state());
  const Engine restored(ctx, 555, ObjectiveFrame::transitionFocus, a.log());
  CHECK(restored.state() == a.state());

  auto tampered = a.log();
  tampered[0].outcome.policy_accepted = !*tampered[0].outcome.policy_accepted;
  CHECK_THROWS_WITH_AS(replay(*ctx, 555, ObjectiveFrame::transitionFocus, tampered),
                       doctest::Contains("sequence 0"), Error);
  auto flipped = a.log();
  flipped[2].accepted = true;
  CHECK_THROWS_AS(replay(*ctx, 555, ObjectiveFrame::transitionFocus, flipped), Error);
  CHECK_THROWS_AS(replay(*ctx, 556, ObjectiveFrame::transitionFocus, a.log()), Error);
}

TEST_CASE("different seeds give different games") {
  const auto ctx = test::ctx();
  std::set<std::vector<ShockKind>> histories;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Engine e(ctx, seed, ObjectiveFrame::supplyOnly);
    while (!e.state().completed) end_turn_safely(e);
    std::vector<ShockKind> kinds;
    for (const auto& ev : e.state().shock_log) kinds.push_back(ev.kind);
    histories.insert(kinds);
  }
  CHECK(histories.size() > 3);
}

TEST_CASE("rng mapping is platform independent") {
  Rng r(0);
  std::mt19937_64 mt(0);
  for (int i = 0; i < 10; ++i) CHECK(r.uniform() == static_cast<double>(mt() >> 11) / 9007199254740992.0);
  Rng k(1);
  for (int i = 0; i < 1000; ++i) CHECK(k.index(3) < 3);
}

}  // TEST_SUITE
