#include "pathways/parameters.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "pathways/bundled.hpp"
#include "pathways/error.hpp"
#include "pathways/format.hpp"

namespace pathways {

namespace {

struct Entry {
  std::string value;
  std::string source;
  std::size_t line = 0;
};

using EntryMap = std::map<std::string, Entry>;

void read_entries(std::istream& in, const std::string& source, EntryMap& out) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, lineno, "expected 'key = value'");
    const auto key = trim(text.substr(0, eq));
    const auto value = trim(text.substr(eq + 1));
    if (key.empty()) throw ParseError(source, lineno, "empty key");
    if (value.empty()) throw ParseError(source, lineno, "empty value for " + std::string(key));
    out[std::string(key)] = Entry{std::string(value), source, lineno};
  }
}

class Reader {
 public:
  explicit Reader(const EntryMap& entries) : entries_(entries) {}

  const Entry& raw(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
      throw Error(ErrorCode::invalid_parameter, "parameters incomplete: missing key " + key);
    }
    used_.insert(key);
    return it->second;
  }

  double number(const std::string& key) {
    const Entry& e = raw(key);
    double v = 0.0;
    if (!parse_double(e.value, v)) throw ParseError(e.source, e.line, key + " expects a number");
    return v;
  }

  double probability(const std::string& key) {
    const double v = number(key);
    if (v < 0.0 || v > 1.0) {
      const Entry& e = raw(key);
      throw ParseError(e.source, e.line, key + " must lie in [0, 1]");
    }
    return v;
  }

  double non_negative(const std::string& key) {
    const double v = number(key);
    if (v < 0.0) {
      const Entry& e = raw(key);
      throw ParseError(e.source, e.line, key + " must be non-negative");
    }
    return v;
  }

  int integer(const std::string& key) {
    const Entry& e = raw(key);
    int v = 0;
    if (!parse_int(e.value, v)) throw ParseError(e.source, e.line, key + " expects an integer");
    return v;
  }

  std::vector<std::string_view> list(const std::string& key) {
    std::vector<std::string_view> items;
    for (auto part : split(raw(key).value, ',')) items.push_back(trim(part));
    return items;
  }

  template <typename E>
  E enumeration(const std::string& key) {
    const Entry& e = raw(key);
    if (const auto v = parse_enum<E>(e.value)) return *v;
    throw ParseError(e.source, e.line, key + ": unknown value '" + e.value + "'");
  }

  void reject_unused() const {
    for (const auto& [key, e] : entries_) {
      if (!used_.contains(key)) throw ParseError(e.source, e.line, "unknown parameter '" + key + "'");
    }
  }

 private:
  const EntryMap& entries_;
  std::set<std::string> used_;
};

Parameters build(const EntryMap& entries) {
  Reader r(entries);
  Parameters p;

  for (auto item : r.list("turns.start_years")) {
    int year = 0;
    if (!parse_int(item, year)) {
      const Entry& e = r.raw("turns.start_years");
      throw ParseError(e.source, e.line, "turns.start_years expects integers");
    }
    if (!p.turn_start_years.empty() && year <= p.turn_start_years.back()) {
      throw Error(ErrorCode::invalid_parameter, "turns.start_years must be strictly increasing");
    }
    p.turn_start_years.push_back(year);
  }
  if (p.turn_start_years.empty()) throw Error(ErrorCode::invalid_parameter, "turns.start_years is empty");
  p.end_year = r.integer("turns.end_year");
  if (p.end_year < p.turn_start_years.back()) {
    throw Error(ErrorCode::invalid_parameter, "turns.end_year precedes the last turn");
  }

  p.budget_per_turn = r.non_negative("budget.per_turn");
  p.loan_cap = r.non_negative("loan.cap");
  p.loan_interest = r.non_negative("loan.interest");
  p.import_price = r.non_negative("import.price");
  p.import_max_level = r.non_negative("import.max_level");
  p.import_initial = r.non_negative("import.initial");
  if (p.import_initial > p.import_max_level) {
    throw Error(ErrorCode::invalid_parameter, "import.initial exceeds import.max_level");
  }
  p.sequestration_price = r.non_negative("sequestration.price");

  p.support_initial = r.number("support.initial");
  p.support_policy_divisor = r.number("support.policy_divisor");
  if (p.support_policy_divisor <= 0.0) throw Error(ErrorCode::invalid_parameter, "support.policy_divisor must be > 0");
  p.campaign_cost = r.non_negative("campaign.cost");
  p.campaign_bonus = r.probability("campaign.bonus");

  for (SiteClass s : all_values<SiteClass>()) {
    p.sites[s] = r.integer("sites." + std::string(to_string(s)));
  }

  for (TechnologyKind k : all_values<TechnologyKind>()) {
    const std::string base = "tech." + std::string(to_string(k)) + ".";
    TechRules t;
    t.build_fraction = r.non_negative(base + "build");
    t.upgrade_fraction = r.non_negative(base + "upgrade");
    t.max_upgrades = r.integer(base + "max_upgrades");
    t.build_delay = r.integer(base + "delay");
    t.unit_cost = r.non_negative(base + "unit_cost");
    t.initial_plants = r.integer(base + "initial_plants");
    for (auto item : r.list(base + "sites")) {
      const auto site = parse_enum<SiteClass>(item);
      if (!site) {
        const Entry& e = r.raw(base + "sites");
        throw ParseError(e.source, e.line, base + "sites: unknown site class '" + std::string(item) + "'");
      }
      t.sites.push_back(*site);
    }
    if (t.max_upgrades < 0 || t.build_delay < 0 || t.initial_plants < 1) {
      throw Error(ErrorCode::invalid_parameter, base + "* counts must be non-negative, initial_plants >= 1");
    }
    p.tech[k] = std::move(t);
  }

  for (PolicyId id : all_values<PolicyId>()) {
    const std::string base = "policy." + std::string(to_string(id)) + ".";
    p.policies[id] = PolicyRule{r.probability(base + "acceptance"), r.enumeration<PolicyEffect>(base + "effect"),
                                r.non_negative(base + "amount")};
  }

  p.shock_probability = r.probability("shock.probability");
  p.nuclear_turn = r.integer("shock.nuclear_turn");
  p.cold_spell_winter_demand = r.non_negative("shock.coldSpell.winter_demand");
  p.heat_wave_summer_demand = r.non_negative("shock.heatWave.summer_demand");
  p.immigration_demand = r.non_negative("shock.massImmigration.demand");
  p.renewable_support_bonus = r.number("shock.renewableSupport.support");

  p.emergency_imports_cost = r.non_negative("response.emergencyImports.cost");
  p.emergency_imports_support = r.number("response.emergencyImports.support");
  p.gas_peakers_emissions_t = r.non_negative("response.gasPeakers.emissions");
  p.gas_peakers_support = r.number("response.gasPeakers.support");
  p.conservation_support = r.number("response.conservation.support");

  p.reward_support = r.number("reward.support");
  p.reward_budget = r.non_negative("reward.budget");

  r.reject_unused();
  return p;
}

EntryMap default_entries() {
  EntryMap entries;
  std::istringstream in{std::string(bundled::parameters_text())};
  read_entries(in, "parameters.txt", entries);
  return entries;
}

}  // namespace

std::pair<int, int> Parameters::turn_years(int turn) const {
  if (turn < 1 || turn > turn_count()) {
    throw Error(ErrorCode::invalid_parameter, "turn " + std::to_string(turn) + " out of range");
  }
  const auto i = static_cast<std::size_t>(turn - 1);
  const int first = turn_start_years[i];
  const int last = turn == turn_count() ? end_year : turn_start_years[i + 1] - 1;
  return {first, last};
}

std::map<std::string, std::string> parse_key_values(std::istream& in, const std::string& source) {
  EntryMap entries;
  read_entries(in, source, entries);
  std::map<std::string, std::string> out;
  for (auto& [k, e] : entries) out.emplace(k, e.value);
  return out;
}

Parameters load_parameters(std::istream& in, const std::string& source) {
  EntryMap entries = default_entries();
  EntryMap overrides;
  read_entries(in, source, overrides);
  for (auto& [k, e] : overrides) {
    if (!entries.contains(k)) throw ParseError(e.source, e.line, "unknown parameter '" + k + "'");
    entries[k] = e;
  }
  return build(entries);
}

Parameters load_parameters(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::invalid_parameter, "cannot open " + path.string());
  return load_parameters(in, path.string());
}

const Parameters& default_parameters() {
  static const Parameters params = build(default_entries());
  return params;
}

}  // namespace pathways
