#include "pathways/script.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pathways/bundled.hpp"
#include "pathways/error.hpp"
#include "pathways/format.hpp"

namespace pathways {

namespace {

constexpr int kMaxRepeat = 1000;

using Verb = ScriptStep::Verb;

class LineParser {
 public:
  LineParser(const std::string& source, std::size_t line, std::vector<std::string_view> words)
      : source_(source), line_(line), words_(std::move(words)) {}

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(source_, line_, message); }

  std::size_t size() const { return words_.size(); }
  std::string_view word(std::size_t i) const { return words_[i]; }

  void expect_count(std::size_t lo, std::size_t hi) const {
    if (words_.size() < lo || words_.size() > hi) {
      fail("'" + std::string(words_[0]) + "' expects " + std::to_string(lo - 1) +
           (hi > lo ? "-" + std::to_string(hi - 1) : std::string()) + " argument(s)");
    }
  }

  template <typename E>
  E enumeration(std::size_t i, const char* what) const {
    if (const auto v = parse_enum<E>(words_[i])) return *v;
    std::string known;
    for (E e : all_values<E>()) known += (known.empty() ? "" : ", ") + std::string(to_string(e));
    fail(std::string("unknown ") + what + " '" + std::string(words_[i]) + "' (expected one of " + known + ")");
  }

  double number(std::size_t i) const {
    double v = 0.0;
    if (!parse_double(words_[i], v) || !std::isfinite(v)) fail("expected a number, got '" + std::string(words_[i]) + "'");
    return v;
  }

  int integer(std::size_t i) const {
    int v = 0;
    if (!parse_int(words_[i], v)) fail("expected an integer, got '" + std::string(words_[i]) + "'");
    return v;
  }

  // Optional trailing `N` or `max`.
  void repeat(std::size_t i, ScriptStep& step) const {
    if (i >= words_.size()) return;
    if (words_[i] == "max") {
      step.repeat_max = true;
      return;
    }
    step.repeat = integer(i);
    if (step.repeat < 1 || step.repeat > kMaxRepeat) fail("repeat count must lie in [1, 1000]");
  }

 private:
  const std::string& source_;
  std::size_t line_;
  std::vector<std::string_view> words_;
};

std::vector<std::string_view> words_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

ScriptStep parse_step(const LineParser& p, std::size_t line) {
  ScriptStep step;
  step.line = line;
  const std::string_view verb = p.word(0);
  if (verb == "build") {
    p.expect_count(3, 4);
    step.verb = Verb::build;
    step.technology = p.enumeration<TechnologyKind>(1, "technology");
    step.site = p.enumeration<SiteClass>(2, "site class");
    p.repeat(3, step);
  } else if (verb == "upgrade" || verb == "decommission") {
    p.expect_count(2, 3);
    step.verb = verb == "upgrade" ? Verb::upgrade : Verb::decommission;
    int id = 0;
    if (parse_int(p.word(1), id)) {
      if (p.size() > 2) p.fail("a repeat count needs a technology, not a plant id");
      step.plant_id = id;
    } else {
      step.technology = p.enumeration<TechnologyKind>(1, "technology");
      p.repeat(2, step);
    }
  } else if (verb == "import") {
    p.expect_count(2, 3);
    if (p.word(1) == "cover") {
      step.verb = Verb::importCover;
      step.amount = p.size() > 2 ? p.number(2) : 0.0;
    } else {
      p.expect_count(2, 2);
      step.verb = Verb::import;
      step.amount = p.number(1);
    }
  } else if (verb == "policy") {
    p.expect_count(2, 2);
    step.verb = Verb::policy;
    step.policy = p.enumeration<PolicyId>(1, "policy");
  } else if (verb == "campaign") {
    p.expect_count(2, 3);
    step.verb = Verb::campaign;
    step.policy = p.enumeration<PolicyId>(1, "policy");
    p.repeat(2, step);
  } else if (verb == "sequester") {
    p.expect_count(2, 2);
    step.verb = Verb::sequester;
    step.amount = p.number(1);
  } else if (verb == "respond") {
    p.expect_count(2, 2);
    step.verb = Verb::respond;
    step.response = p.enumeration<ShockResponse>(1, "response");
  } else if (verb == "borrow") {
    p.expect_count(2, 2);
    step.verb = Verb::borrow;
    step.amount = p.number(1);
  } else {
    p.fail("unknown action '" + std::string(verb) + "'");
  }
  return step;
}

TurnBlock parse_turn_header(const LineParser& p, int turn_count) {
  p.expect_count(2, 2);
  const std::string_view spec = p.word(1);
  TurnBlock block;
  if (spec == "*") {
    block.first_turn = 1;
    block.last_turn = turn_count;
    return block;
  }
  const auto dash = spec.find('-');
  auto parse_turn = [&](std::string_view text) {
    int v = 0;
    if (!parse_int(text, v)) p.fail("bad turn '" + std::string(text) + "'");
    if (v < 1 || v > turn_count) p.fail("turn " + std::to_string(v) + " out of range 1-" + std::to_string(turn_count));
    return v;
  };
  if (dash == std::string_view::npos) {
    block.first_turn = block.last_turn = parse_turn(spec);
  } else {
    block.first_turn = parse_turn(spec.substr(0, dash));
    block.last_turn = parse_turn(spec.substr(dash + 1));
    if (block.last_turn < block.first_turn) p.fail("empty turn range");
  }
  return block;
}

// ---- runner ----------------------------------------------------------------

class Runner {
 public:
  Runner(std::shared_ptr<const GameContext> ctx, const StrategyScript& script, std::uint64_t seed)
      : script_(script), engine_(std::move(ctx), seed, script.objective_frame) {
    result_.seed = seed;
  }

  RunResult run() {
    const GameContext& ctx = engine_.context();
    while (!engine_.state().completed) {
      const int turn = engine_.state().turn;
      std::vector<const ScriptStep*> steps;
      for (const auto& block : script_.blocks) {
        if (turn < block.first_turn || turn > block.last_turn) continue;
        for (const auto& s : block.steps) steps.push_back(&s);
      }
      if (!answer_shock(steps)) return finish();
      for (const ScriptStep* step : steps) {
        if (!run_step(ctx, *step)) return finish();
      }
      const ActionRecord& end = engine_.apply(action::EndTurn{});
      if (!end.accepted) {
        result_.failing_turn = turn;
        result_.message = end.rejection_message;
        result_.status = end.rejection_code == to_string(ErrorCode::insufficient_supply) ? RunStatus::insufficientSupply
                                                                                           : RunStatus::rejected;
        return finish();
      }
    }
    return finish();
  }

 private:
  bool answer_shock(const std::vector<const ScriptStep*>& steps) {
    const auto& shock = engine_.state().active_shock;
    if (!shock || !requires_response(shock->kind) || shock->choice) return true;
    const bool explicit_answer =
        std::any_of(steps.begin(), steps.end(), [](const ScriptStep* s) { return s->verb == Verb::respond; });
    if (explicit_answer) return true;
    const auto rule = script_.responses.find(shock->kind);
    if (rule == script_.responses.end()) {
      return abort("no response rule for " + std::string(to_string(shock->kind)));
    }
    return submit(action::RespondShock{rule->second}, 0);
  }

  bool abort(const std::string& message) {
    result_.status = RunStatus::rejected;
    result_.failing_turn = engine_.state().turn;
    result_.message = message;
    return false;
  }

  bool submit(const Action& action, std::size_t line) {
    const ActionRecord& r = engine_.apply(action);
    if (r.accepted || script_.skip_rejected) return true;
    const std::string where = line > 0 ? "line " + std::to_string(line) + ": " : std::string();
    return abort(where + std::string(action_name(action)) + " rejected (" + r.rejection_code + "): " +
                 r.rejection_message);
  }

  // Plant of `kind` to upgrade next: fewest upgrades, then lowest id.
  const Plant* upgrade_target(TechnologyKind kind) const {
    const Plant* best = nullptr;
    for (const auto& p : engine_.state().fleet) {
      if (p.kind != kind || !p.active || p.upgrades_applied >= p.max_upgrades) continue;
      if (best == nullptr || p.upgrades_applied < best->upgrades_applied) best = &p;
    }
    return best;
  }

  const Plant* first_plant(TechnologyKind kind) const {
    for (const auto& p : engine_.state().fleet) {
      if (p.kind == kind) return &p;
    }
    return nullptr;
  }

  bool run_step(const GameContext& ctx, const ScriptStep& step) {
    const GameState& s = engine_.state();
    const Parameters& params = ctx.params();
    const int times = step.repeat_max ? kMaxRepeat : step.repeat;
    for (int i = 0; i < times; ++i) {
      switch (step.verb) {
        case Verb::build: {
          if (step.repeat_max) {
            const TechRules& rules = params.tech[*step.technology];
            const double cost = rules.build_fraction * ctx.scenario().capacity[*step.technology] * rules.unit_cost;
            if (s.free_sites[*step.site] <= 0 || cost > s.treasury.budget) return true;
          }
          if (!submit(action::Build{*step.technology, *step.site}, step.line)) return false;
          break;
        }
        case Verb::upgrade: {
          if (step.plant_id) {
            if (!submit(action::Upgrade{*step.plant_id}, step.line)) return false;
            break;
          }
          const Plant* target = upgrade_target(*step.technology);
          if (step.repeat_max) {
            if (target == nullptr) return true;
            const TechRules& rules = params.tech[target->kind];
            if (rules.upgrade_fraction * target->base_capacity * rules.unit_cost > s.treasury.budget) return true;
          }
          if (target == nullptr) target = first_plant(*step.technology);
          if (!submit(action::Upgrade{target ? target->id : -1}, step.line)) return false;
          break;
        }
        case Verb::decommission: {
          if (step.plant_id) {
            if (!submit(action::Decommission{*step.plant_id}, step.line)) return false;
            break;
          }
          const Plant* target = first_plant(*step.technology);
          if (step.repeat_max && target == nullptr) return true;
          if (!submit(action::Decommission{target ? target->id : -1}, step.line)) return false;
          break;
        }
        case Verb::import:
          if (!submit(action::SetImport{step.amount}, step.line)) return false;
          break;
        case Verb::importCover: {
          const SupplyCheck c = check_supply(ctx, s);
          const double needed = s.import_level - std::min(c.summer_surplus, c.winter_surplus) + step.amount;
          const double level = std::clamp(needed, 0.0, params.import_max_level);
          if (!submit(action::SetImport{level}, step.line)) return false;
          break;
        }
        case Verb::policy:
          if (!submit(action::ProposePolicy{*step.policy}, step.line)) return false;
          break;
        case Verb::campaign:
          if (step.repeat_max && (s.policies[*step.policy].status == PolicyStatus::enacted ||
                                  params.campaign_cost > s.treasury.budget ||
                                  resolve_policy_probability(ctx, s, *step.policy) >= 1.0)) {
            return true;
          }
          if (!submit(action::Campaign{*step.policy}, step.line)) return false;
          break;
        case Verb::sequester:
          if (!submit(action::SetSequester{step.amount}, step.line)) return false;
          break;
        case Verb::respond:
          if (!submit(action::RespondShock{*step.response}, step.line)) return false;
          break;
        case Verb::borrow:
          if (!submit(action::Borrow{step.amount}, step.line)) return false;
          break;
      }
    }
    return true;
  }

  RunResult finish() {
    result_.state = engine_.state();
    result_.log = engine_.log();
    result_.card = engine_.score();
    return std::move(result_);
  }

  const StrategyScript& script_;
  Engine engine_;
  RunResult result_;
};

}  // namespace

StrategyScript parse_script(std::istream& in, const std::string& source) {
  StrategyScript script;
  const int turn_count = default_parameters().turn_count();
  std::string line;
  std::size_t lineno = 0;
  bool in_block = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    auto words = words_of(text);
    if (words.empty()) continue;
    const LineParser p(source, lineno, words);
    const std::string_view head = words[0];

    if (head == "turn") {
      script.blocks.push_back(parse_turn_header(p, turn_count));
      in_block = true;
      continue;
    }
    if (!in_block) {
      if (head == "seed") {
        p.expect_count(2, 2);
        std::uint64_t seed = 0;
        const auto word = p.word(1);
        const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), seed);
        if (ec != std::errc{} || ptr != word.data() + word.size()) p.fail("seed expects an unsigned integer");
        script.seed = seed;
        continue;
      }
      if (head == "frame") {
        p.expect_count(2, 2);
        script.objective_frame = p.enumeration<ObjectiveFrame>(1, "objective frame");
        continue;
      }
      if (head == "on-reject") {
        p.expect_count(2, 2);
        if (p.word(1) == "skip") {
          script.skip_rejected = true;
        } else if (p.word(1) == "abort") {
          script.skip_rejected = false;
        } else {
          p.fail("on-reject expects 'skip' or 'abort'");
        }
        continue;
      }
      if (head == "respond") {
        p.expect_count(3, 3);
        const auto shock = p.enumeration<ShockKind>(1, "shock");
        const auto choice = p.enumeration<ShockResponse>(2, "response");
        const auto options = response_options(shock);
        if (std::find(options.begin(), options.end(), choice) == options.end()) {
          p.fail(std::string(to_string(choice)) + " is not an option for " + std::string(to_string(shock)));
        }
        script.responses[shock] = choice;
        continue;
      }
      p.fail("'" + std::string(head) + "' must appear inside a turn block");
    }
    script.blocks.back().steps.push_back(parse_step(p, lineno));
  }
  return script;
}

StrategyScript parse_script(std::string_view text, const std::string& source) {
  std::istringstream in{std::string(text)};
  return parse_script(in, source);
}

StrategyScript load_script(const std::string& path_or_name) {
  std::ifstream in(path_or_name);
  if (in) return parse_script(in, path_or_name);
  if (const auto body = bundled::script(path_or_name)) return parse_script(*body, path_or_name);
  throw Error(ErrorCode::invalid_parameter, "no script file or bundled script named '" + path_or_name + "'");
}

RunResult run_script(std::shared_ptr<const GameContext> ctx, const StrategyScript& script,
                     std::optional<std::uint64_t> seed_override) {
  const std::uint64_t seed = seed_override.value_or(script.seed.value_or(0));
  return Runner(std::move(ctx), script, seed).run();
}

RunResult run_log(std::shared_ptr<const GameContext> ctx, std::uint64_t seed, ObjectiveFrame frame,
                  const std::vector<ActionRecord>& log) {
  RunResult result;
  result.seed = seed;
  result.state = replay(*ctx, seed, frame, log);
  result.log = log;
  result.card = score(*ctx, result.state);
  if (!result.state.completed && !log.empty() && !log.back().accepted &&
      log.back().rejection_code == to_string(ErrorCode::insufficient_supply)) {
    result.status = RunStatus::insufficientSupply;
    result.failing_turn = log.back().turn;
    result.message = log.back().rejection_message;
  }
  return result;
}

}  // namespace pathways
