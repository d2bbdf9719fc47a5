#include "pathways/wire.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "pathways/error.hpp"
#include "pathways/format.hpp"

namespace pathways::wire {

namespace {

[[noreturn]] void bad_action(const std::string& message) { throw Error(ErrorCode::invalid_action, message); }

template <typename E>
E enum_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) bad_action(std::string("missing string field '") + key + "'");
  const auto text = j[key].get<std::string>();
  if (const auto v = parse_enum<E>(text)) return *v;
  bad_action(std::string("unknown ") + key + " '" + text + "'");
}

double number_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) bad_action(std::string("missing numeric field '") + key + "'");
  return j[key].get<double>();
}

int int_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) bad_action(std::string("missing integer field '") + key + "'");
  return j[key].get<int>();
}

template <typename E>
std::string name(E value) {
  return std::string(to_string(value));
}

Json season_json(double supply, double demand, double surplus) {
  Json j;
  j["supply"] = supply;
  j["demand"] = demand;
  j["surplus"] = surplus;
  return j;
}

Json supply_json(const SupplyCheck& c) {
  Json j;
  j["summer"] = season_json(c.summer_supply, c.summer_demand, c.summer_surplus);
  j["winter"] = season_json(c.winter_supply, c.winter_demand, c.winter_surplus);
  j["bindingYear"] = c.binding_year;
  return j;
}

Json plant_json(const GameContext& ctx, const Plant& p) {
  const TechRules& rules = ctx.params().tech[p.kind];
  const double increment = rules.upgrade_fraction * p.base_capacity;
  Json j;
  j["id"] = p.id;
  j["technology"] = name(p.kind);
  j["site"] = name(p.site);
  j["baseCapacity"] = p.base_capacity;
  j["capacity"] = p.capacity;
  j["upgradesApplied"] = p.upgrades_applied;
  j["maxUpgrades"] = p.max_upgrades;
  j["upgradeIncrement"] = increment;
  j["upgradeCost"] = increment * rules.unit_cost;
  j["active"] = p.active;
  j["turnsRemaining"] = p.turns_remaining;
  return j;
}

// Land use and emissions for the current model year with the current fleet.
MetricRecord gauge_record(const GameContext& ctx, const GameState& state) {
  if (state.completed && !state.metrics_history.empty()) return state.metrics_history.back();
  const auto fleet = fleet_entries(ctx, state);
  const Scenario& sc = ctx.scenario();
  const AnnualBalance balance = turn_balance(ctx, state, state.model_year);
  YearActivity activity;
  activity.sequestered_t = state.sequester_capacity;
  activity.additional_emissions_t = state.turn_extra_emissions_t;
  activity.investment_cost = state.turn_investment;
  return annual_metrics(balance, fleet, sc.calibration.emission_factors, activity);
}

}  // namespace

std::string dump(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::replace); }

// ---- actions ---------------------------------------------------------------

Json to_json(const Action& action) {
  Json j;
  j["type"] = std::string(action_name(action));
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, action::Build>) {
          j["technology"] = name(a.kind);
          j["site"] = name(a.site);
        } else if constexpr (std::is_same_v<T, action::Upgrade> || std::is_same_v<T, action::Decommission>) {
          j["plantId"] = a.plant_id;
        } else if constexpr (std::is_same_v<T, action::SetImport>) {
          j["level"] = a.level;
        } else if constexpr (std::is_same_v<T, action::ProposePolicy> || std::is_same_v<T, action::Campaign>) {
          j["policy"] = name(a.policy);
        } else if constexpr (std::is_same_v<T, action::SetSequester>) {
          j["tonnes"] = a.tonnes;
        } else if constexpr (std::is_same_v<T, action::RespondShock>) {
          j["choice"] = name(a.choice);
        } else if constexpr (std::is_same_v<T, action::Borrow>) {
          j["amount"] = a.amount;
        }
      },
      action);
  return j;
}

Action action_from_json(const Json& j) {
  if (!j.is_object()) bad_action("action must be a JSON object");
  if (!j.contains("type") || !j["type"].is_string()) bad_action("missing string field 'type'");
  const auto type = j["type"].get<std::string>();
  if (type == "build") return action::Build{enum_field<TechnologyKind>(j, "technology"), enum_field<SiteClass>(j, "site")};
  if (type == "upgrade") return action::Upgrade{int_field(j, "plantId")};
  if (type == "decommission") return action::Decommission{int_field(j, "plantId")};
  if (type == "setImport") return action::SetImport{number_field(j, "level")};
  if (type == "proposePolicy") return action::ProposePolicy{enum_field<PolicyId>(j, "policy")};
  if (type == "campaign") return action::Campaign{enum_field<PolicyId>(j, "policy")};
  if (type == "setSequester") return action::SetSequester{number_field(j, "tonnes")};
  if (type == "respondShock") return action::RespondShock{enum_field<ShockResponse>(j, "choice")};
  if (type == "borrow") return action::Borrow{number_field(j, "amount")};
  if (type == "endTurn") return action::EndTurn{};
  bad_action("unknown action type '" + type + "'");
}

// ---- records ---------------------------------------------------------------

Json to_json(const ActionRecord& r) {
  Json outcome = Json::object();
  if (r.outcome.plant_id) outcome["plantId"] = *r.outcome.plant_id;
  if (r.outcome.probability) outcome["probability"] = *r.outcome.probability;
  if (r.outcome.roll) outcome["roll"] = *r.outcome.roll;
  if (r.outcome.policy_accepted) outcome["policyAccepted"] = *r.outcome.policy_accepted;
  if (r.outcome.shock_drawn) outcome["shockDrawn"] = name(*r.outcome.shock_drawn);

  Json deltas;
  deltas["budget"] = r.deltas.budget;
  deltas["loan"] = r.deltas.loan;
  deltas["support"] = r.deltas.support;
  deltas["capacity"] = r.deltas.capacity;
  deltas["importLevel"] = r.deltas.import_level;
  deltas["summerSurplus"] = r.deltas.summer_surplus;
  deltas["winterSurplus"] = r.deltas.winter_surplus;

  Json j;
  j["sequence"] = r.sequence;
  j["turn"] = r.turn;
  j["action"] = to_json(r.action);
  j["accepted"] = r.accepted;
  j["deltas"] = std::move(deltas);
  j["outcome"] = std::move(outcome);
  j["timestamp"] = r.timestamp;
  if (r.accepted) {
    j["rejection"] = nullptr;
  } else {
    Json rejection;
    rejection["code"] = r.rejection_code;
    rejection["message"] = r.rejection_message;
    j["rejection"] = std::move(rejection);
  }
  return j;
}

ActionRecord record_from_json(const Json& j) {
  ActionRecord r;
  r.sequence = j.at("sequence").get<std::int64_t>();
  r.turn = j.at("turn").get<int>();
  r.action = action_from_json(j.at("action"));
  r.accepted = j.at("accepted").get<bool>();
  if (const auto& rej = j.value("rejection", Json(nullptr)); !rej.is_null()) {
    r.rejection_code = rej.at("code").get<std::string>();
    r.rejection_message = rej.at("message").get<std::string>();
  }
  if (j.contains("deltas")) {
    const Json& d = j["deltas"];
    r.deltas.budget = d.value("budget", 0.0);
    r.deltas.loan = d.value("loan", 0.0);
    r.deltas.support = d.value("support", 0.0);
    r.deltas.capacity = d.value("capacity", 0.0);
    r.deltas.import_level = d.value("importLevel", 0.0);
    r.deltas.summer_surplus = d.value("summerSurplus", 0.0);
    r.deltas.winter_surplus = d.value("winterSurplus", 0.0);
  }
  if (j.contains("outcome")) {
    const Json& o = j["outcome"];
    if (o.contains("plantId")) r.outcome.plant_id = o["plantId"].get<int>();
    if (o.contains("probability")) r.outcome.probability = o["probability"].get<double>();
    if (o.contains("roll")) r.outcome.roll = o["roll"].get<double>();
    if (o.contains("policyAccepted")) r.outcome.policy_accepted = o["policyAccepted"].get<bool>();
    if (o.contains("shockDrawn")) r.outcome.shock_drawn = enum_field<ShockKind>(o, "shockDrawn");
  }
  r.timestamp = j.value("timestamp", std::string());
  return r;
}

// ---- metrics ---------------------------------------------------------------

Json to_json(const MetricRecord& r) {
  Json j;
  j["year"] = r.year;
  j["nuclearFuel"] = r.nuclear_fuel;
  j["fossilFuel"] = r.fossil_fuel;
  j["electricityImports"] = r.electricity_imports;
  j["emissions"] = r.emissions;
  j["investmentCost"] = r.investment_cost;
  j["landUse"] = r.land_use;
  j["summerShare"] = r.summer_share;
  j["electricitySupply"] = r.electricity_supply;
  return j;
}

Json to_json(const ScoreCard& c) {
  Json j;
  j["nuclearFuel"] = c.nuclear_fuel;
  j["fossilFuel"] = c.fossil_fuel;
  j["electricityImports"] = c.electricity_imports;
  j["emissions"] = c.emissions;
  j["investmentCost"] = c.investment_cost;
  j["landUse"] = c.land_use;
  j["summerShare"] = c.summer_share;
  j["electricitySupply"] = c.electricity_supply;
  j["firstYear"] = c.first_year;
  j["lastYear"] = c.last_year;
  j["years"] = c.years;
  j["objectiveFrame"] = name(c.objective_frame);
  j["partial"] = c.partial;
  return j;
}

ScoreCard scorecard_from_json(const Json& j) {
  ScoreCard c;
  c.nuclear_fuel = j.at("nuclearFuel").get<double>();
  c.fossil_fuel = j.at("fossilFuel").get<double>();
  c.electricity_imports = j.at("electricityImports").get<double>();
  c.emissions = j.at("emissions").get<double>();
  c.investment_cost = j.at("investmentCost").get<double>();
  c.land_use = j.at("landUse").get<double>();
  c.summer_share = j.at("summerShare").get<double>();
  c.electricity_supply = j.value("electricitySupply", 0.0);
  c.first_year = j.value("firstYear", 0);
  c.last_year = j.value("lastYear", 0);
  c.years = j.value("years", 0);
  const auto frame = parse_enum<ObjectiveFrame>(j.value("objectiveFrame", std::string("supply-only")));
  if (!frame) throw Error(ErrorCode::parse_error, "unknown objectiveFrame");
  c.objective_frame = *frame;
  c.partial = j.value("partial", false);
  return c;
}

Json to_json(const LeaderboardEntry& e) {
  return Json{{"displayName", e.display_name}, {"score", to_json(e.card)}, {"completedAt", e.completed_at}};
}

LeaderboardEntry leaderboard_entry_from_json(const Json& j) {
  return LeaderboardEntry{j.at("displayName").get<std::string>(), scorecard_from_json(j.at("score")),
                          j.at("completedAt").get<std::string>()};
}

Json to_json(const ShockEvent& e) {
  Json options = Json::array();
  for (ShockResponse r : response_options(e.kind)) options.push_back(name(r));
  Json j;
  j["kind"] = name(e.kind);
  j["turn"] = e.turn;
  j["requiresResponse"] = requires_response(e.kind);
  j["options"] = std::move(options);
  j["choice"] = e.choice ? Json(name(*e.choice)) : Json(nullptr);
  j["withstood"] = e.withstood;
  return j;
}

// ---- state view ------------------------------------------------------------

Json state_view(const GameContext& ctx, const GameState& state) {
  const Parameters& p = ctx.params();
  const Scenario& sc = ctx.scenario();
  Json v;
  v["turn"] = state.turn;
  v["turnCount"] = p.turn_count();
  v["modelYear"] = state.model_year;
  const auto [first_year, last_year] = p.turn_years(state.turn);
  v["turnYears"] = {first_year, last_year};
  v["completed"] = state.completed;
  v["objectiveFrame"] = name(state.objective_frame);

  v["budget"] = state.treasury.budget;
  v["loanOutstanding"] = state.treasury.loan_outstanding;
  v["loanCap"] = state.treasury.loan_cap;
  v["interestRate"] = state.treasury.interest_rate;
  v["support"] = state.support;
  v["importLevel"] = state.import_level;
  v["importMax"] = p.import_max_level;
  v["sequesterCapacity"] = state.sequester_capacity;
  v["supply"] = supply_json(check_supply(ctx, state));

  const MetricRecord gauge = gauge_record(ctx, state);
  Json gauges;
  gauges["year"] = gauge.year;
  gauges["landUse"] = gauge.land_use;
  gauges["emissions"] = gauge.emissions;
  v["gauges"] = std::move(gauges);

  Json plants = Json::array();
  Json pending = Json::array();
  for (const auto& plant : state.fleet) {
    plants.push_back(plant_json(ctx, plant));
    if (!plant.active) {
      Json p;
      p["plantId"] = plant.id;
      p["technology"] = name(plant.kind);
      p["turnsRemaining"] = plant.turns_remaining;
      pending.push_back(std::move(p));
    }
  }
  v["plants"] = std::move(plants);
  v["pendingBuilds"] = std::move(pending);

  Json sites = Json::object();
  for (SiteClass s : all_values<SiteClass>()) sites[name(s)] = state.free_sites[s];
  v["freeSites"] = sites;

  Json builds = Json::array();
  for (TechnologyKind k : all_values<TechnologyKind>()) {
    if (k == TechnologyKind::nuclear) continue;
    const TechRules& rules = p.tech[k];
    const double capacity = rules.build_fraction * sc.capacity[k];
    Json site_list = Json::array();
    for (SiteClass s : rules.sites) site_list.push_back(name(s));
    Json b;
    b["technology"] = name(k);
    b["capacity"] = capacity;
    b["cost"] = capacity * rules.unit_cost;
    b["delay"] = build_delay(ctx, state, k);
    b["maxUpgrades"] = upgrade_cap(ctx, state, k);
    b["sites"] = std::move(site_list);
    builds.push_back(std::move(b));
  }
  v["buildOptions"] = std::move(builds);

  Json policies = Json::array();
  for (PolicyId id : all_values<PolicyId>()) {
    const PolicyState& ps = state.policies[id];
    const PolicyRule& rule = p.policies[id];
    Json entry;
    entry["id"] = name(id);
    entry["status"] = name(ps.status);
    entry["baseAcceptance"] = ps.base_acceptance;
    entry["campaignBonus"] = ps.campaign_bonus;
    entry["effect"] = name(rule.effect);
    entry["amount"] = rule.amount;
    entry["probability"] =
        ps.status == PolicyStatus::enacted ? Json(nullptr) : Json(resolve_policy_probability(ctx, state, id));
    policies.push_back(std::move(entry));
  }
  v["policies"] = std::move(policies);
  v["policyAttemptedThisTurn"] = state.policy_attempted_this_turn;
  v["campaignCost"] = p.campaign_cost;

  v["shock"] = state.active_shock ? to_json(*state.active_shock) : Json(nullptr);
  Json log = Json::array();
  for (const auto& e : state.shock_log) log.push_back(to_json(e));
  v["shockLog"] = std::move(log);

  Json history = Json::array();
  for (const auto& r : state.metrics_history) history.push_back(to_json(r));
  v["metrics"] = std::move(history);
  v["score"] = to_json(score(ctx, state));
  return v;
}

// ---- CSV -------------------------------------------------------------------

std::string metrics_csv(const std::vector<MetricRecord>& history, const ScoreCard& card) {
  std::ostringstream out;
  out << "year,nuclearFuel_TJ,fossilFuel_TJ,electricityImports_TJ,emissions_MtCO2e,investmentCost_MCHF,landUse_km2,"
         "summerShare_pct\n";
  auto row = [&](const std::string& label, double nuclear, double fossil, double imports, double emissions,
                 double investment, double land, double summer) {
    out << label << ',' << format_number(nuclear) << ',' << format_number(fossil) << ',' << format_number(imports)
        << ',' << format_number(emissions) << ',' << format_number(investment) << ',' << format_number(land) << ','
        << format_number(summer) << '\n';
  };
  for (const auto& r : history) {
    row(std::to_string(r.year), r.nuclear_fuel, r.fossil_fuel, r.electricity_imports, r.emissions, r.investment_cost,
        r.land_use, r.summer_share);
  }
  row("total", card.nuclear_fuel, card.fossil_fuel, card.electricity_imports, card.emissions, card.investment_cost,
      card.land_use, card.summer_share);
  return out.str();
}

// ---- session logs ----------------------------------------------------------

Json meta_line(const SessionLog& log) {
  Json j{{"kind", "meta"}, {"seed", log.seed}, {"objectiveFrame", name(log.objective_frame)}};
  if (!log.session_id.empty()) j["sessionId"] = log.session_id;
  return j;
}

void write_session_log(std::ostream& out, const SessionLog& log) {
  out << dump(meta_line(log)) << '\n';
  for (const auto& r : log.records) {
    Json line = to_json(r);
    line["kind"] = "action";
    out << dump(line) << '\n';
  }
}

SessionLog read_session_log(std::istream& in, const std::string& source, const std::string& session_id) {
  SessionLog log;
  bool have_meta = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw ParseError(source, lineno, std::string("invalid JSON: ") + e.what());
    }
    try {
      if (j.contains("log") && j["log"].is_array()) {
        // Research export line.
        const auto id = j.value("sessionId", std::string());
        if (!session_id.empty() && id != session_id) continue;
        log.session_id = id;
        log.seed = j.at("seed").get<std::uint64_t>();
        log.objective_frame = *parse_enum<ObjectiveFrame>(j.at("objectiveFrame").get<std::string>());
        for (const auto& r : j["log"]) log.records.push_back(record_from_json(r));
        return log;
      }
      const auto kind = j.value("kind", std::string("action"));
      if (kind == "meta") {
        log.session_id = j.value("sessionId", std::string());
        log.seed = j.at("seed").get<std::uint64_t>();
        const auto frame = parse_enum<ObjectiveFrame>(j.at("objectiveFrame").get<std::string>());
        if (!frame) throw ParseError(source, lineno, "unknown objectiveFrame");
        log.objective_frame = *frame;
        have_meta = true;
      } else if (kind == "action") {
        if (!have_meta) throw ParseError(source, lineno, "action before the meta line");
        log.records.push_back(record_from_json(j));
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  if (!have_meta) {
    throw ParseError(source, lineno, session_id.empty() ? "no session found" : "session " + session_id + " not found");
  }
  return log;
}

}  // namespace pathways::wire
