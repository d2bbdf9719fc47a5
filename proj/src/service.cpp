#include "pathways/service.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "pathways/error.hpp"
#include "pathways/format.hpp"

namespace pathways {

namespace {

using wire::Json;

constexpr std::uint64_t kSeedMask = (std::uint64_t{1} << 53) - 1;  // exact in JSON doubles
constexpr std::size_t kMaxNameLength = 32;
constexpr std::size_t kMaxLimit = 1000;

std::string normalize_name(std::string_view name) {
  std::string out;
  for (char raw : name) {
    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
    switch (c) {
      case '0': c = 'o'; break;
      case '1': c = 'i'; break;
      case '3': c = 'e'; break;
      case '4':
      case '@': c = 'a'; break;
      case '5':
      case '$': c = 's'; break;
      case '7': c = 't'; break;
      default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

bool constant_time_equal(std::string_view a, std::string_view b) {
  unsigned char diff = a.size() == b.size() ? 0 : 1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff |= static_cast<unsigned char>(a[i] ^ (i < b.size() ? b[i] : 0));
  }
  return diff == 0;
}

Json policy_timeline(const std::vector<ActionRecord>& log) {
  Json out = Json::array();
  for (const auto& r : log) {
    const auto* proposal = std::get_if<action::ProposePolicy>(&r.action);
    const auto* campaign = std::get_if<action::Campaign>(&r.action);
    if (proposal == nullptr && campaign == nullptr) continue;
    Json e{{"sequence", r.sequence},
           {"turn", r.turn},
           {"kind", proposal ? "proposal" : "campaign"},
           {"policy", std::string(to_string(proposal ? proposal->policy : campaign->policy))},
           {"accepted", r.accepted},
           {"timestamp", r.timestamp}};
    if (r.outcome.probability) e["probability"] = *r.outcome.probability;
    if (r.outcome.roll) e["roll"] = *r.outcome.roll;
    if (r.outcome.policy_accepted) e["enacted"] = *r.outcome.policy_accepted;
    out.push_back(e);
  }
  return out;
}

Json shock_timeline(const GameState& state, const std::vector<ActionRecord>& log) {
  Json out = Json::array();
  auto add = [&](const ShockEvent& e, bool active) {
    Json j = wire::to_json(e);
    j["active"] = active;
    for (const auto& r : log) {
      if (r.turn != e.turn || !r.accepted) continue;
      if (std::holds_alternative<action::RespondShock>(r.action)) {
        j["respondedAt"] = r.timestamp;
        j["responseSequence"] = r.sequence;
      }
    }
    out.push_back(j);
  };
  for (const auto& e : state.shock_log) add(e, false);
  if (state.active_shock) add(*state.active_shock, true);
  return out;
}

}  // namespace

std::vector<std::string> ServiceConfig::default_name_deny_list() {
  return {"fuck", "shit", "cunt", "bitch", "asshole", "nigger", "nigga", "faggot", "whore", "slut", "nazi", "hitler",
          "wichser", "arschloch", "fotze", "hure", "schlampe", "scheisse", "merde", "putain", "salope", "connard",
          "cazzo", "stronzo", "puttana", "vaffanculo"};
}

std::map<std::string, ObjectiveFrame> parse_token_frames(std::string_view text) {
  std::map<std::string, ObjectiveFrame> out;
  for (auto item : split(text, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::invalid_parameter, "token entry '" + std::string(item) + "' lacks '=frame'");
    }
    const auto frame = parse_enum<ObjectiveFrame>(trim(item.substr(eq + 1)));
    if (!frame) throw Error(ErrorCode::invalid_parameter, "unknown objective frame in '" + std::string(item) + "'");
    out[std::string(trim(item.substr(0, eq)))] = *frame;
  }
  return out;
}

SessionService::SessionService(std::shared_ptr<const GameContext> ctx, std::shared_ptr<EventStore> store,
                               ServiceConfig config)
    : ctx_(std::move(ctx)), store_(std::move(store)), config_(std::move(config)) {
  std::seed_seq seq{device_(), device_(), device_(), device_()};
  rng_.seed(seq);
}

std::string SessionService::new_id() {
  std::lock_guard lock(rng_mu_);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id;
  for (int i = 0; i < 2; ++i) {
    std::uint64_t v = rng_();
    for (int j = 0; j < 16; ++j, v >>= 4) id.push_back(kHex[v & 0xF]);
  }
  return id;
}

Json SessionService::create_session(const CreateSessionRequest& request) {
  SessionMeta meta;
  meta.id = new_id();
  meta.survey_token = request.survey_token;
  meta.language = request.language.value_or("en");
  meta.created_at = utc_now_iso8601();
  {
    std::lock_guard lock(rng_mu_);
    meta.seed = request.seed.value_or(rng_() & kSeedMask);
    if (request.objective_frame) {
      meta.objective_frame = *request.objective_frame;
    } else if (const auto it = request.survey_token ? config_.token_frames.find(*request.survey_token)
                                                    : config_.token_frames.end();
               it != config_.token_frames.end()) {
      meta.objective_frame = it->second;
    } else {
      meta.objective_frame = (rng_() & 1) != 0 ? ObjectiveFrame::transitionFocus : ObjectiveFrame::supplyOnly;
    }
  }
  if (meta.survey_token && (meta.survey_token->empty() || meta.survey_token->size() > 256)) {
    throw Error(ErrorCode::invalid_parameter, "survey token must have 1-256 characters");
  }

  auto engine = std::make_unique<Engine>(ctx_, meta.seed, meta.objective_frame);
  store_->create(meta);

  auto s = std::make_shared<Slot>();
  s->loaded = true;
  s->meta = meta;
  s->engine = std::move(engine);
  const Json state = view(*s);
  {
    std::lock_guard lock(slots_mu_);
    slots_[meta.id] = s;
  }
  return Json{{"sessionId", meta.id}, {"state", state}};
}

std::shared_ptr<SessionService::Slot> SessionService::slot(const std::string& session_id) {
  std::shared_ptr<Slot> s;
  {
    std::lock_guard lock(slots_mu_);
    auto& entry = slots_[session_id];
    if (!entry) entry = std::make_shared<Slot>();
    s = entry;
  }
  return s;
}

void SessionService::load(Slot& s, const std::string& session_id) {
  if (s.loaded) return;
  auto stored = store_->load(session_id);
  if (!stored) {
    std::lock_guard lock(slots_mu_);
    slots_.erase(session_id);
    throw Error(ErrorCode::unknown_session, "no session " + session_id);
  }
  for (std::size_t i = 0; i < stored->log.size(); ++i) {
    if (stored->log[i].sequence != static_cast<std::int64_t>(i)) {
      throw Error(ErrorCode::storage_error, "session " + session_id + " has a gap at sequence " + std::to_string(i));
    }
  }
  s.engine = std::make_unique<Engine>(ctx_, stored->meta.seed, stored->meta.objective_frame, std::move(stored->log));
  s.meta = stored->meta;
  s.status = stored->status;
  if (s.status == SessionStatus::active && s.engine->state().completed) s.status = SessionStatus::completed;
  s.loaded = true;
}

Json SessionService::view(const Slot& s) const {
  Json v = wire::state_view(*ctx_, s.engine->state());
  v["sessionId"] = s.meta.id;
  v["status"] = std::string(to_string(s.status));
  v["surveyToken"] = s.meta.survey_token ? Json(*s.meta.survey_token) : Json(nullptr);
  v["language"] = s.meta.language;
  v["createdAt"] = s.meta.created_at;
  v["nextSequence"] = s.engine->log().size();
  return v;
}

Json SessionService::post_action(const std::string& session_id, const Action& action,
                                 std::optional<std::int64_t> expected_sequence) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mu);
  load(*s, session_id);
  if (s->status == SessionStatus::abandoned) throw Error(ErrorCode::conflict, "session was abandoned");
  if (s->status == SessionStatus::completed) throw Error(ErrorCode::game_complete, "the game is complete");
  const auto next = static_cast<std::int64_t>(s->engine->log().size());
  if (expected_sequence && *expected_sequence != next) {
    throw Error(ErrorCode::conflict, "sequence " + std::to_string(*expected_sequence) + " does not match the next " +
                                         "sequence " + std::to_string(next));
  }

  const ActionRecord record = s->engine->apply(action, utc_now_iso8601());
  try {
    store_->append(session_id, record);
    if (s->engine->state().completed) {
      store_->set_status(session_id, SessionStatus::completed);
      s->status = SessionStatus::completed;
    }
  } catch (...) {
    // The store is authoritative; rebuild from it on next access.
    s->loaded = false;
    s->engine.reset();
    throw;
  }
  return Json{{"record", wire::to_json(record)}, {"state", view(*s)}};
}

Json SessionService::get_state(const std::string& session_id) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mu);
  load(*s, session_id);
  return view(*s);
}

Json SessionService::abandon(const std::string& session_id) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mu);
  load(*s, session_id);
  if (s->status == SessionStatus::completed) throw Error(ErrorCode::game_complete, "the game is complete");
  if (s->status == SessionStatus::active) {
    store_->set_status(session_id, SessionStatus::abandoned);
    s->status = SessionStatus::abandoned;
  }
  return view(*s);
}

Json SessionService::submit_leaderboard(const std::string& session_id, const std::string& display_name) {
  const std::string name(trim(display_name));
  if (name.empty() || name.size() > kMaxNameLength) {
    throw Error(ErrorCode::invalid_parameter, "display name must have 1-32 characters");
  }
  if (std::any_of(name.begin(), name.end(), [](char c) { return std::iscntrl(static_cast<unsigned char>(c)); })) {
    throw Error(ErrorCode::invalid_parameter, "display name contains control characters");
  }
  const std::string normalized = normalize_name(name);
  for (const auto& word : config_.name_deny_list) {
    if (!word.empty() && normalized.find(normalize_name(word)) != std::string::npos) {
      throw Error(ErrorCode::invalid_parameter, "display name is not allowed");
    }
  }

  auto s = slot(session_id);
  std::lock_guard lock(s->mu);
  load(*s, session_id);
  if (s->status != SessionStatus::completed) {
    throw Error(ErrorCode::invalid_action, "only completed games can join the leaderboard");
  }
  const auto& log = s->engine->log();
  LeaderboardEntry entry{name, s->engine->score(), log.empty() ? s->meta.created_at : log.back().timestamp};
  {
    std::lock_guard board(board_mu_);
    store_->add_leaderboard({session_id, entry});
  }
  return wire::to_json(entry);
}

Json SessionService::leaderboard(Metric order_by, std::size_t limit) {
  std::vector<LeaderboardEntry> entries;
  for (auto& stored : store_->leaderboard()) entries.push_back(std::move(stored.entry));
  const auto ranked = rank(entries, order_by);
  Json out = Json::array();
  const std::size_t n = std::min({ranked.size(), limit, kMaxLimit});
  for (std::size_t i = 0; i < n; ++i) {
    Json e = wire::to_json(ranked[i]);
    e["rank"] = i + 1;
    out.push_back(e);
  }
  return Json{{"orderBy", std::string(to_string(order_by))}, {"unit", std::string(metric_unit(order_by))},
              {"entries", out}};
}

std::string SessionService::export_research(const std::string& credential, const ExportFilter& filter) {
  if (!research_credential_valid(credential)) {
    throw Error(ErrorCode::unauthorized, "researcher credential required");
  }
  std::ostringstream out;
  for (const auto& meta : store_->list()) {
    if (filter.from && meta.created_at < *filter.from) continue;
    if (filter.to && meta.created_at > *filter.to) continue;
    if (!filter.tokens.empty()) {
      if (!meta.survey_token) continue;
      if (std::find(filter.tokens.begin(), filter.tokens.end(), *meta.survey_token) == filter.tokens.end()) continue;
    }
    const auto stored = store_->load(meta.id);
    if (!stored) continue;
    const GameState state = replay(*ctx_, meta.seed, meta.objective_frame, stored->log);
    SessionStatus status = stored->status;
    if (status == SessionStatus::active && state.completed) status = SessionStatus::completed;

    Json log = Json::array();
    for (const auto& r : stored->log) log.push_back(wire::to_json(r));
    Json line{{"sessionId", meta.id},
              {"seed", meta.seed},
              {"objectiveFrame", std::string(to_string(meta.objective_frame))},
              {"language", meta.language},
              {"createdAt", meta.created_at},
              {"status", std::string(to_string(status))},
              {"log", log},
              {"score", wire::to_json(score(*ctx_, state))},
              {"shocks", shock_timeline(state, stored->log)},
              {"policies", policy_timeline(stored->log)}};
    line["surveyToken"] = meta.survey_token ? Json(*meta.survey_token) : Json(nullptr);
    out << wire::dump(line) << '\n';
  }
  return out.str();
}

bool SessionService::research_credential_valid(const std::string& credential) const {
  return !config_.research_secret.empty() && constant_time_equal(credential, config_.research_secret);
}

wire::SessionLog SessionService::session_log(const std::string& session_id) {
  auto s = slot(session_id);
  std::lock_guard lock(s->mu);
  load(*s, session_id);
  return wire::SessionLog{session_id, s->meta.seed, s->meta.objective_frame, s->engine->log()};
}

void SessionService::clear_cache() {
  std::lock_guard lock(slots_mu_);
  slots_.clear();
}

}  // namespace pathways
