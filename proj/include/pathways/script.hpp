#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pathways/game.hpp"

namespace pathways {

// One line of a turn block. Plant targets given by technology and the
// `count`/`max` forms are resolved against the state when the line runs.
struct ScriptStep {
  enum class Verb { build, upgrade, decommission, import, importCover, policy, campaign, sequester, respond, borrow };

  std::size_t line = 0;
  Verb verb = Verb::build;
  std::optional<TechnologyKind> technology;
  std::optional<SiteClass> site;
  std::optional<int> plant_id;
  std::optional<PolicyId> policy;
  std::optional<ShockResponse> response;
  double amount = 0.0;
  int repeat = 1;
  bool repeat_max = false;

  bool operator==(const ScriptStep&) const = default;
};

struct TurnBlock {
  int first_turn = 1;
  int last_turn = 1;
  std::vector<ScriptStep> steps;

  bool operator==(const TurnBlock&) const = default;
};

struct StrategyScript {
  std::optional<std::uint64_t> seed;
  ObjectiveFrame objective_frame = ObjectiveFrame::supplyOnly;
  std::map<ShockKind, ShockResponse> responses;
  bool skip_rejected = false;  // `on-reject skip`: log the rejection and carry on
  std::vector<TurnBlock> blocks;

  bool operator==(const StrategyScript&) const = default;
};

StrategyScript parse_script(std::istream& in, const std::string& source);
StrategyScript parse_script(std::string_view text, const std::string& source);
// A file path, or the name of a bundled script.
StrategyScript load_script(const std::string& path_or_name);

enum class RunStatus { completed, insufficientSupply, rejected };

struct RunResult {
  RunStatus status = RunStatus::completed;
  int failing_turn = 0;
  std::string message;
  std::uint64_t seed = 0;
  GameState state;
  std::vector<ActionRecord> log;
  ScoreCard card;

  // 0 completed, 2 simulation failure.
  int exit_code() const { return status == RunStatus::completed ? 0 : 2; }
};

// Plays the script through an Engine exactly as the service would.
RunResult run_script(std::shared_ptr<const GameContext> ctx, const StrategyScript& script,
                     std::optional<std::uint64_t> seed_override = std::nullopt);

// Replays a recorded log; an unfinished game yields a partial card.
RunResult run_log(std::shared_ptr<const GameContext> ctx, std::uint64_t seed, ObjectiveFrame frame,
                  const std::vector<ActionRecord>& log);

}  // namespace pathways
