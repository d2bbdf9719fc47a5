#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pathways/game.hpp"

namespace pathways {

enum class SessionStatus { active, completed, abandoned };

template <>
struct EnumTraits<SessionStatus> {
  static constexpr std::array<std::string_view, 3> names{"active", "completed", "abandoned"};
};

struct SessionMeta {
  std::string id;
  std::optional<std::string> survey_token;
  std::uint64_t seed = 0;
  ObjectiveFrame objective_frame = ObjectiveFrame::supplyOnly;
  std::string language;
  std::string created_at;

  bool operator==(const SessionMeta&) const = default;
};

struct StoredSession {
  SessionMeta meta;
  std::vector<ActionRecord> log;
  SessionStatus status = SessionStatus::active;
};

struct StoredLeaderboardEntry {
  std::string session_id;
  LeaderboardEntry entry;
};

// Append-only persistence for sessions. Every write is durable when the call
// returns. Implementations are safe to call from several threads.
class EventStore {
 public:
  virtual ~EventStore() = default;

  // Throws conflict if the id exists.
  virtual void create(const SessionMeta& meta) = 0;
  virtual void append(const std::string& session_id, const ActionRecord& record) = 0;
  virtual void set_status(const std::string& session_id, SessionStatus status) = 0;
  virtual std::optional<StoredSession> load(const std::string& session_id) = 0;
  // Ordered by creation time, then id.
  virtual std::vector<SessionMeta> list() = 0;

  // Throws conflict if the session already has an entry.
  virtual void add_leaderboard(const StoredLeaderboardEntry& entry) = 0;
  virtual std::vector<StoredLeaderboardEntry> leaderboard() = 0;
};

std::unique_ptr<EventStore> make_memory_store();
// One newline-delimited JSON file per session under `dir`, fsynced per write.
std::unique_ptr<EventStore> make_file_store(const std::filesystem::path& dir);
std::unique_ptr<EventStore> make_sqlite_store(const std::filesystem::path& db);

// "memory", "sqlite:<path>", "file:<dir>" or a bare directory path.
// Throws storage-error when the location cannot be opened.
std::unique_ptr<EventStore> open_store(const std::string& spec);

}  // namespace pathways
