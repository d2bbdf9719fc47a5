#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathways/game.hpp"

// JSON and CSV encodings shared by the service, the CLI and the Python module.
namespace pathways::wire {

using Json = nlohmann::json;

Json to_json(const Action& action);
// Throws invalid-action for malformed or unknown actions.
Action action_from_json(const Json& j);

Json to_json(const ActionRecord& record);
ActionRecord record_from_json(const Json& j);

Json to_json(const MetricRecord& record);
Json to_json(const ScoreCard& card);
ScoreCard scorecard_from_json(const Json& j);

Json to_json(const LeaderboardEntry& entry);
LeaderboardEntry leaderboard_entry_from_json(const Json& j);

Json to_json(const ShockEvent& event);

// Everything a client needs to draw the current turn.
Json state_view(const GameContext& ctx, const GameState& state);

// One row per model year followed by a `total` row holding the ScoreCard.
std::string metrics_csv(const std::vector<MetricRecord>& history, const ScoreCard& card);

// Compact single-line encoding; identical input gives identical bytes.
std::string dump(const Json& j);

// A replayable game: seed, objective frame and the ordered action log.
struct SessionLog {
  std::string session_id;
  std::uint64_t seed = 0;
  ObjectiveFrame objective_frame = ObjectiveFrame::supplyOnly;
  std::vector<ActionRecord> records;
};

Json meta_line(const SessionLog& log);
// Meta line followed by one action line per record.
void write_session_log(std::ostream& out, const SessionLog& log);
// Accepts a session log or a research export line (first session, or the
// one matching `session_id` when non-empty).
SessionLog read_session_log(std::istream& in, const std::string& source, const std::string& session_id = {});

}  // namespace pathways::wire
