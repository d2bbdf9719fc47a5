#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pathways/store.hpp"
#include "pathways/wire.hpp"

namespace pathways {

struct ServiceConfig {
  // Objective frame assigned to sessions created with a known survey token.
  std::map<std::string, ObjectiveFrame> token_frames;
  std::string research_secret;  // empty disables the export
  std::vector<std::string> name_deny_list = default_name_deny_list();

  static std::vector<std::string> default_name_deny_list();
};

struct CreateSessionRequest {
  std::optional<std::string> survey_token;
  std::optional<ObjectiveFrame> objective_frame;
  std::optional<std::string> language;
  std::optional<std::uint64_t> seed;  // replays and tests; normally generated
};

struct ExportFilter {
  std::optional<std::string> from;  // inclusive, compared against createdAt
  std::optional<std::string> to;    // inclusive
  std::vector<std::string> tokens;  // empty: all
};

// Event-sourced game sessions over an EventStore. The store is the only
// source of truth; cached engines are rebuilt from it on demand.
class SessionService {
 public:
  SessionService(std::shared_ptr<const GameContext> ctx, std::shared_ptr<EventStore> store, ServiceConfig config = {});

  // {"sessionId", "state"}
  wire::Json create_session(const CreateSessionRequest& request);

  // {"record", "state"}. Engine rejections are logged and returned in the
  // record; `expected_sequence` guards against duplicate or stale posts.
  wire::Json post_action(const std::string& session_id, const Action& action,
                         std::optional<std::int64_t> expected_sequence = std::nullopt);

  wire::Json get_state(const std::string& session_id);
  wire::Json abandon(const std::string& session_id);

  wire::Json submit_leaderboard(const std::string& session_id, const std::string& display_name);
  wire::Json leaderboard(Metric order_by, std::size_t limit);

  // Newline-delimited JSON, one session per line, ordered by creation.
  std::string export_research(const std::string& credential, const ExportFilter& filter);

  bool research_credential_valid(const std::string& credential) const;

  // The replayable log of a session (for the CLI and tests).
  wire::SessionLog session_log(const std::string& session_id);

  // Drops cached engines; the next access replays from the store.
  void clear_cache();

  const GameContext& context() const { return *ctx_; }

 private:
  struct Slot {
    std::mutex mu;
    bool loaded = false;
    SessionMeta meta;
    SessionStatus status = SessionStatus::active;
    std::unique_ptr<Engine> engine;
  };

  std::shared_ptr<Slot> slot(const std::string& session_id);
  void load(Slot& slot, const std::string& session_id);
  wire::Json view(const Slot& slot) const;
  std::string new_id();

  std::shared_ptr<const GameContext> ctx_;
  std::shared_ptr<EventStore> store_;
  ServiceConfig config_;

  std::mutex slots_mu_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;

  std::mutex rng_mu_;
  std::random_device device_;
  std::mt19937_64 rng_;
  std::mutex board_mu_;
};

// Parses PATHWAYS_TOKENS-style text: `token=frame` pairs separated by commas.
std::map<std::string, ObjectiveFrame> parse_token_frames(std::string_view text);

}  // namespace pathways
