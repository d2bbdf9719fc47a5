#include "pathways/store.hpp"

#include <fcntl.h>
#include <sqlite3.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "pathways/error.hpp"
#include "pathways/wire.hpp"

namespace pathways {

namespace {

using wire::Json;

[[noreturn]] void storage_failure(const std::string& what) {
  throw Error(ErrorCode::storage_error, what + ": " + std::strerror(errno));
}

bool valid_id(const std::string& id) {
  return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](char c) {
           return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
         });
}

void require_valid_id(const std::string& id) {
  if (!valid_id(id)) throw Error(ErrorCode::unknown_session, "malformed session id");
}

Json meta_json(const SessionMeta& m) {
  Json j{{"kind", "meta"},
         {"sessionId", m.id},
         {"seed", m.seed},
         {"objectiveFrame", std::string(to_string(m.objective_frame))},
         {"language", m.language},
         {"createdAt", m.created_at}};
  j["surveyToken"] = m.survey_token ? Json(*m.survey_token) : Json(nullptr);
  return j;
}

SessionMeta meta_from_json(const Json& j) {
  SessionMeta m;
  m.id = j.at("sessionId").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  const auto frame = parse_enum<ObjectiveFrame>(j.at("objectiveFrame").get<std::string>());
  if (!frame) throw Error(ErrorCode::storage_error, "corrupt session meta");
  m.objective_frame = *frame;
  m.language = j.value("language", std::string());
  m.created_at = j.value("createdAt", std::string());
  if (j.contains("surveyToken") && j["surveyToken"].is_string()) m.survey_token = j["surveyToken"].get<std::string>();
  return m;
}

Json leaderboard_json(const StoredLeaderboardEntry& e) {
  Json j = wire::to_json(e.entry);
  j["sessionId"] = e.session_id;
  return j;
}

StoredLeaderboardEntry leaderboard_from_json(const Json& j) {
  return StoredLeaderboardEntry{j.at("sessionId").get<std::string>(), wire::leaderboard_entry_from_json(j)};
}

bool meta_order(const SessionMeta& a, const SessionMeta& b) {
  return std::tie(a.created_at, a.id) < std::tie(b.created_at, b.id);
}

// ---- memory ----------------------------------------------------------------

class MemoryStore final : public EventStore {
 public:
  void create(const SessionMeta& meta) override {
    std::lock_guard lock(mu_);
    if (sessions_.contains(meta.id)) throw Error(ErrorCode::conflict, "session " + meta.id + " exists");
    sessions_[meta.id] = StoredSession{meta, {}, SessionStatus::active};
  }

  void append(const std::string& id, const ActionRecord& record) override {
    std::lock_guard lock(mu_);
    find(id).log.push_back(record);
  }

  void set_status(const std::string& id, SessionStatus status) override {
    std::lock_guard lock(mu_);
    find(id).status = status;
  }

  std::optional<StoredSession> load(const std::string& id) override {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<SessionMeta> list() override {
    std::lock_guard lock(mu_);
    std::vector<SessionMeta> out;
    for (const auto& [id, s] : sessions_) out.push_back(s.meta);
    std::sort(out.begin(), out.end(), meta_order);
    return out;
  }

  void add_leaderboard(const StoredLeaderboardEntry& entry) override {
    std::lock_guard lock(mu_);
    for (const auto& e : board_) {
      if (e.session_id == entry.session_id) throw Error(ErrorCode::conflict, "session already on the leaderboard");
    }
    board_.push_back(entry);
  }

  std::vector<StoredLeaderboardEntry> leaderboard() override {
    std::lock_guard lock(mu_);
    return board_;
  }

 private:
  StoredSession& find(const std::string& id) {
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::unknown_session, "no session " + id);
    return it->second;
  }

  std::mutex mu_;
  std::map<std::string, StoredSession> sessions_;
  std::vector<StoredLeaderboardEntry> board_;
};

// ---- files -----------------------------------------------------------------

// Appends one line and fsyncs. A torn tail from an earlier crash is cut first.
void append_line(const std::filesystem::path& path, const std::string& line, bool must_exist, bool must_not_exist) {
  int flags = O_RDWR | O_CLOEXEC;
  if (!must_exist) flags |= O_CREAT;
  if (must_not_exist) flags |= O_EXCL;
  const int fd = ::open(path.c_str(), flags, 0644);
  if (fd < 0) {
    if (errno == EEXIST) throw Error(ErrorCode::conflict, path.filename().string() + " exists");
    if (errno == ENOENT && must_exist) throw Error(ErrorCode::unknown_session, "no session " + path.stem().string());
    storage_failure("open " + path.string());
  }
  struct Closer {
    int fd;
    ~Closer() { ::close(fd); }
  } closer{fd};

  off_t size = ::lseek(fd, 0, SEEK_END);
  if (size < 0) storage_failure("seek " + path.string());
  if (size > 0) {
    char last = '\n';
    if (::pread(fd, &last, 1, size - 1) != 1) storage_failure("read " + path.string());
    if (last != '\n') {
      // Find the end of the last complete line.
      off_t pos = size - 1;
      char c = 0;
      while (pos > 0) {
        if (::pread(fd, &c, 1, pos - 1) != 1) storage_failure("read " + path.string());
        if (c == '\n') break;
        --pos;
      }
      if (::ftruncate(fd, pos) != 0) storage_failure("truncate " + path.string());
      size = pos;
    }
  }
  const std::string data = line + '\n';
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::pwrite(fd, data.data() + written, data.size() - written, size + static_cast<off_t>(written));
    if (n < 0) {
      if (errno == EINTR) continue;
      storage_failure("write " + path.string());
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) storage_failure("fsync " + path.string());
}

void sync_directory(const std::filesystem::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) storage_failure("open " + dir.string());
  const int rc = ::fsync(fd);
  ::close(fd);
  if (rc != 0) storage_failure("fsync " + dir.string());
}

// Complete lines only; an unterminated or unparsable final line is a torn write.
std::vector<Json> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::vector<Json> out;
  if (!in) return out;
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string::npos) break;
    const std::string_view line(text.data() + start, end - start);
    if (!line.empty()) {
      try {
        out.push_back(Json::parse(line));
      } catch (const Json::exception&) {
        const bool last = end + 1 >= text.size();
        if (!last) throw Error(ErrorCode::storage_error, "corrupt line in " + path.string());
      }
    }
    start = end + 1;
  }
  return out;
}

class FileStore final : public EventStore {
 public:
  explicit FileStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_ / "sessions", ec);
    if (ec || !std::filesystem::is_directory(dir_ / "sessions")) {
      throw Error(ErrorCode::storage_error, "cannot use storage directory " + dir_.string() +
                                                (ec ? ": " + ec.message() : std::string()));
    }
    const auto probe = dir_ / ".write-test";
    const int fd = ::open(probe.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) storage_failure("storage directory " + dir_.string() + " is not writable");
    ::close(fd);
    std::filesystem::remove(probe, ec);
  }

  void create(const SessionMeta& meta) override {
    require_valid_id(meta.id);
    append_line(session_path(meta.id), wire::dump(meta_json(meta)), false, true);
    sync_directory(dir_ / "sessions");
  }

  void append(const std::string& id, const ActionRecord& record) override {
    require_valid_id(id);
    Json line = wire::to_json(record);
    line["kind"] = "action";
    append_line(session_path(id), wire::dump(line), true, false);
  }

  void set_status(const std::string& id, SessionStatus status) override {
    require_valid_id(id);
    append_line(session_path(id), wire::dump(Json{{"kind", "status"}, {"status", std::string(to_string(status))}}),
                true, false);
  }

  std::optional<StoredSession> load(const std::string& id) override {
    if (!valid_id(id)) return std::nullopt;
    const auto path = session_path(id);
    if (!std::filesystem::exists(path)) return std::nullopt;
    StoredSession s;
    bool have_meta = false;
    for (const auto& j : read_lines(path)) {
      const auto kind = j.value("kind", std::string());
      if (kind == "meta") {
        s.meta = meta_from_json(j);
        have_meta = true;
      } else if (kind == "action") {
        s.log.push_back(wire::record_from_json(j));
      } else if (kind == "status") {
        s.status = parse_enum<SessionStatus>(j.value("status", std::string("active"))).value_or(SessionStatus::active);
      }
    }
    if (!have_meta) return std::nullopt;
    return s;
  }

  std::vector<SessionMeta> list() override {
    std::vector<SessionMeta> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir_ / "sessions")) {
      if (entry.path().extension() != ".ndjson") continue;
      const auto lines = read_lines(entry.path());
      if (!lines.empty() && lines.front().value("kind", std::string()) == "meta") {
        out.push_back(meta_from_json(lines.front()));
      }
    }
    std::sort(out.begin(), out.end(), meta_order);
    return out;
  }

  void add_leaderboard(const StoredLeaderboardEntry& entry) override {
    std::lock_guard lock(board_mu_);
    for (const auto& e : leaderboard_locked()) {
      if (e.session_id == entry.session_id) throw Error(ErrorCode::conflict, "session already on the leaderboard");
    }
    const bool fresh = !std::filesystem::exists(dir_ / "leaderboard.ndjson");
    append_line(dir_ / "leaderboard.ndjson", wire::dump(leaderboard_json(entry)), false, false);
    if (fresh) sync_directory(dir_);
  }

  std::vector<StoredLeaderboardEntry> leaderboard() override {
    std::lock_guard lock(board_mu_);
    return leaderboard_locked();
  }

 private:
  std::filesystem::path session_path(const std::string& id) const { return dir_ / "sessions" / (id + ".ndjson"); }

  std::vector<StoredLeaderboardEntry> leaderboard_locked() const {
    std::vector<StoredLeaderboardEntry> out;
    for (const auto& j : read_lines(dir_ / "leaderboard.ndjson")) out.push_back(leaderboard_from_json(j));
    return out;
  }

  std::filesystem::path dir_;
  std::mutex board_mu_;
};

// ---- sqlite ----------------------------------------------------------------

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) fail("prepare");
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int i, const std::string& v) {
    sqlite3_bind_text(stmt_, i, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Statement& bind(int i, std::int64_t v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }
  Statement& bind_null(int i) {
    sqlite3_bind_null(stmt_, i);
    return *this;
  }

  // True while rows remain.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    if (rc == SQLITE_CONSTRAINT) throw Error(ErrorCode::conflict, sqlite3_errmsg(db_));
    fail("step");
  }

  std::string text(int col) const {
    const auto* p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p)) : std::string();
  }
  bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }

 private:
  [[noreturn]] void fail(const char* what) const {
    throw Error(ErrorCode::storage_error, std::string("sqlite ") + what + ": " + sqlite3_errmsg(db_));
  }

  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

class SqliteStore final : public EventStore {
 public:
  explicit SqliteStore(const std::filesystem::path& path) {
    if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                        nullptr) != SQLITE_OK) {
      const std::string message = db_ ? sqlite3_errmsg(db_) : "out of memory";
      sqlite3_close(db_);
      throw Error(ErrorCode::storage_error, "cannot open " + path.string() + ": " + message);
    }
    sqlite3_busy_timeout(db_, 5000);
    exec("PRAGMA journal_mode=WAL");
    exec("PRAGMA synchronous=FULL");
    exec(
        "CREATE TABLE IF NOT EXISTS sessions ("
        " id TEXT PRIMARY KEY, survey_token TEXT, seed TEXT NOT NULL, objective_frame TEXT NOT NULL,"
        " language TEXT NOT NULL, created_at TEXT NOT NULL, status TEXT NOT NULL DEFAULT 'active')");
    exec(
        "CREATE TABLE IF NOT EXISTS actions ("
        " session_id TEXT NOT NULL REFERENCES sessions(id), sequence INTEGER NOT NULL, record TEXT NOT NULL,"
        " PRIMARY KEY (session_id, sequence))");
    exec(
        "CREATE TABLE IF NOT EXISTS leaderboard ("
        " session_id TEXT PRIMARY KEY REFERENCES sessions(id), entry TEXT NOT NULL)");
  }

  ~SqliteStore() override { sqlite3_close(db_); }

  void create(const SessionMeta& m) override {
    std::lock_guard lock(mu_);
    Statement st(db_,
                 "INSERT INTO sessions (id, survey_token, seed, objective_frame, language, created_at)"
                 " VALUES (?, ?, ?, ?, ?, ?)");
    st.bind(1, m.id);
    if (m.survey_token) {
      st.bind(2, *m.survey_token);
    } else {
      st.bind_null(2);
    }
    st.bind(3, std::to_string(m.seed)).bind(4, std::string(to_string(m.objective_frame))).bind(5, m.language);
    st.bind(6, m.created_at);
    st.step();
  }

  void append(const std::string& id, const ActionRecord& record) override {
    std::lock_guard lock(mu_);
    require_session(id);
    Statement st(db_, "INSERT INTO actions (session_id, sequence, record) VALUES (?, ?, ?)");
    st.bind(1, id).bind(2, static_cast<std::int64_t>(record.sequence)).bind(3, wire::dump(wire::to_json(record)));
    st.step();
  }

  void set_status(const std::string& id, SessionStatus status) override {
    std::lock_guard lock(mu_);
    require_session(id);
    Statement st(db_, "UPDATE sessions SET status = ? WHERE id = ?");
    st.bind(1, std::string(to_string(status))).bind(2, id);
    st.step();
  }

  std::optional<StoredSession> load(const std::string& id) override {
    std::lock_guard lock(mu_);
    Statement st(db_,
                 "SELECT id, survey_token, seed, objective_frame, language, created_at, status FROM sessions"
                 " WHERE id = ?");
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    StoredSession s;
    s.meta = meta_from_row(st);
    s.status = parse_enum<SessionStatus>(st.text(6)).value_or(SessionStatus::active);
    Statement actions(db_, "SELECT record FROM actions WHERE session_id = ? ORDER BY sequence");
    actions.bind(1, id);
    while (actions.step()) s.log.push_back(wire::record_from_json(Json::parse(actions.text(0))));
    return s;
  }

  std::vector<SessionMeta> list() override {
    std::lock_guard lock(mu_);
    Statement st(db_,
                 "SELECT id, survey_token, seed, objective_frame, language, created_at FROM sessions"
                 " ORDER BY created_at, id");
    std::vector<SessionMeta> out;
    while (st.step()) out.push_back(meta_from_row(st));
    return out;
  }

  void add_leaderboard(const StoredLeaderboardEntry& entry) override {
    std::lock_guard lock(mu_);
    Statement st(db_, "INSERT INTO leaderboard (session_id, entry) VALUES (?, ?)");
    st.bind(1, entry.session_id).bind(2, wire::dump(wire::to_json(entry.entry)));
    st.step();
  }

  std::vector<StoredLeaderboardEntry> leaderboard() override {
    std::lock_guard lock(mu_);
    Statement st(db_, "SELECT session_id, entry FROM leaderboard ORDER BY rowid");
    std::vector<StoredLeaderboardEntry> out;
    while (st.step()) {
      out.push_back({st.text(0), wire::leaderboard_entry_from_json(Json::parse(st.text(1)))});
    }
    return out;
  }

 private:
  void exec(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      const std::string message = err ? err : "unknown error";
      sqlite3_free(err);
      throw Error(ErrorCode::storage_error, "sqlite: " + message);
    }
  }

  void require_session(const std::string& id) {
    Statement st(db_, "SELECT 1 FROM sessions WHERE id = ?");
    st.bind(1, id);
    if (!st.step()) throw Error(ErrorCode::unknown_session, "no session " + id);
  }

  static SessionMeta meta_from_row(const Statement& st) {
    SessionMeta m;
    m.id = st.text(0);
    if (!st.is_null(1)) m.survey_token = st.text(1);
    m.seed = std::stoull(st.text(2));
    m.objective_frame = parse_enum<ObjectiveFrame>(st.text(3)).value_or(ObjectiveFrame::supplyOnly);
    m.language = st.text(4);
    m.created_at = st.text(5);
    return m;
  }

  sqlite3* db_ = nullptr;
  std::mutex mu_;
};

}  // namespace

std::unique_ptr<EventStore> make_memory_store() { return std::make_unique<MemoryStore>(); }

std::unique_ptr<EventStore> make_file_store(const std::filesystem::path& dir) { return std::make_unique<FileStore>(dir); }

std::unique_ptr<EventStore> make_sqlite_store(const std::filesystem::path& db) {
  return std::make_unique<SqliteStore>(db);
}

std::unique_ptr<EventStore> open_store(const std::string& spec) {
  if (spec == "memory") return make_memory_store();
  if (spec.rfind("sqlite:", 0) == 0) return make_sqlite_store(spec.substr(7));
  if (spec.rfind("file:", 0) == 0) return make_file_store(spec.substr(5));
  if (spec.empty()) throw Error(ErrorCode::storage_error, "empty storage location");
  return make_file_store(spec);
}

}  // namespace pathways
