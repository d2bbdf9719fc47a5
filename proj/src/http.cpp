#include "pathways/http.hpp"

#include <httplib.h>

#include "pathways/format.hpp"

namespace pathways {

namespace {

using wire::Json;

constexpr std::size_t kDefaultLimit = 10;

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(wire::dump(body), "application/json");
}

Json error_body(ErrorCode code, const std::string& message) {
  return Json{{"error", {{"code", std::string(to_string(code))}, {"message", message}}}};
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    Json j = Json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::parse_error, "request body must be a JSON object");
    return j;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("invalid JSON body: ") + e.what());
  }
}

std::optional<std::string> optional_string(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_string()) throw Error(ErrorCode::invalid_parameter, std::string(key) + " must be a string");
  return j[key].get<std::string>();
}

// Wraps a handler so every failure becomes a JSON error response.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_json(res, http_status(e.code()), error_body(e.code(), e.what()));
    } catch (const Json::exception& e) {
      send_json(res, 400, error_body(ErrorCode::parse_error, e.what()));
    } catch (const std::exception& e) {
      send_json(res, 500, Json{{"error", {{"code", "internal"}, {"message", e.what()}}}});
    }
  };
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_parameter:
    case ErrorCode::parse_error:
    case ErrorCode::invalid_action: return 400;
    case ErrorCode::unauthorized: return 401;
    case ErrorCode::unknown_session: return 404;
    case ErrorCode::conflict:
    case ErrorCode::game_complete: return 409;
    case ErrorCode::insufficient_budget:
    case ErrorCode::upgrade_cap:
    case ErrorCode::policy_limit:
    case ErrorCode::no_free_site:
    case ErrorCode::rejected_action:
    case ErrorCode::already_enacted:
    case ErrorCode::unknown_plant:
    case ErrorCode::loan_cap:
    case ErrorCode::response_required:
    case ErrorCode::insufficient_supply: return 422;
    case ErrorCode::storage_error: return 503;
    default: return 500;
  }
}

ListenAddress parse_listen_address(const std::string& text) {
  ListenAddress a;
  std::string_view port_text = text;
  if (const auto colon = text.rfind(':'); colon != std::string::npos) {
    if (colon > 0) a.host = text.substr(0, colon);
    port_text = std::string_view(text).substr(colon + 1);
  }
  int port = 0;
  if (!parse_int(port_text, port) || port < 0 || port > 65535) {
    throw Error(ErrorCode::invalid_parameter, "bad listen address '" + text + "'");
  }
  a.port = port;
  return a;
}

HttpServer::HttpServer(std::shared_ptr<SessionService> service)
    : service_(std::move(service)), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  auto svc = service_;

  s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                         {"Access-Control-Allow-Headers", "Content-Type, X-Research-Secret"},
                         {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  s.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, Json{{"status", "ok"}});
  });

  s.Post("/sessions", guarded([svc](const httplib::Request& req, httplib::Response& res) {
           const Json body = parse_body(req);
           CreateSessionRequest create;
           create.survey_token = optional_string(body, "surveyToken");
           create.language = optional_string(body, "language");
           if (const auto frame = optional_string(body, "objectiveFrame")) {
             create.objective_frame = parse_enum<ObjectiveFrame>(*frame);
             if (!create.objective_frame) throw Error(ErrorCode::invalid_parameter, "unknown objectiveFrame");
           }
           if (body.contains("seed") && !body["seed"].is_null()) {
             // Chosen seeds are reserved for research replays.
             if (!svc->research_credential_valid(req.get_header_value("X-Research-Secret"))) {
               throw Error(ErrorCode::unauthorized, "choosing a seed requires the researcher credential");
             }
             if (!body["seed"].is_number_unsigned()) throw Error(ErrorCode::invalid_parameter, "seed must be unsigned");
             create.seed = body["seed"].get<std::uint64_t>();
           }
           send_json(res, 201, svc->create_session(create));
         }));

  s.Get(R"(/sessions/([A-Za-z0-9_-]+))", guarded([svc](const httplib::Request& req, httplib::Response& res) {
          send_json(res, 200, svc->get_state(req.matches[1]));
        }));

  s.Post(R"(/sessions/([A-Za-z0-9_-]+)/actions)",
         guarded([svc](const httplib::Request& req, httplib::Response& res) {
           const Json body = parse_body(req);
           const Json& action_json = body.contains("action") ? body["action"] : body;
           const Action action = wire::action_from_json(action_json);
           std::optional<std::int64_t> sequence;
           if (body.contains("sequence") && !body["sequence"].is_null()) {
             if (!body["sequence"].is_number_integer()) {
               throw Error(ErrorCode::invalid_parameter, "sequence must be an integer");
             }
             sequence = body["sequence"].get<std::int64_t>();
           }
           Json result = svc->post_action(req.matches[1], action, sequence);
           const Json& record = result["record"];
           if (record["accepted"].get<bool>()) {
             send_json(res, 200, result);
             return;
           }
           const auto code_text = record["rejection"]["code"].get<std::string>();
           const auto code = parse_error_code(code_text).value_or(ErrorCode::invalid_action);
           Json body_out = error_body(code, record["rejection"]["message"].get<std::string>());
           if (code == ErrorCode::insufficient_supply) {
             body_out["error"]["summerSurplus"] = record["deltas"]["summerSurplus"];
             body_out["error"]["winterSurplus"] = record["deltas"]["winterSurplus"];
           }
           body_out["record"] = record;
           body_out["state"] = result["state"];
           send_json(res, http_status(code), body_out);
         }));

  s.Post(R"(/sessions/([A-Za-z0-9_-]+)/abandon)",
         guarded([svc](const httplib::Request& req, httplib::Response& res) {
           send_json(res, 200, svc->abandon(req.matches[1]));
         }));

  s.Post(R"(/sessions/([A-Za-z0-9_-]+)/leaderboard)",
         guarded([svc](const httplib::Request& req, httplib::Response& res) {
           const Json body = parse_body(req);
           const auto name = optional_string(body, "displayName");
           if (!name) throw Error(ErrorCode::invalid_parameter, "displayName is required");
           send_json(res, 201, svc->submit_leaderboard(req.matches[1], *name));
         }));

  s.Get("/leaderboard", guarded([svc](const httplib::Request& req, httplib::Response& res) {
          const std::string order = req.has_param("orderBy") ? req.get_param_value("orderBy") : "emissions";
          std::size_t limit = kDefaultLimit;
          if (req.has_param("limit")) {
            int v = 0;
            if (!parse_int(req.get_param_value("limit"), v) || v < 0) {
              throw Error(ErrorCode::invalid_parameter, "limit must be a non-negative integer");
            }
            limit = static_cast<std::size_t>(v);
          }
          send_json(res, 200, svc->leaderboard(parse_metric(order), limit));
        }));

  s.Get("/research/export", guarded([svc](const httplib::Request& req, httplib::Response& res) {
          ExportFilter filter;
          if (req.has_param("from")) filter.from = req.get_param_value("from");
          if (req.has_param("to")) filter.to = req.get_param_value("to");
          for (std::size_t i = 0; i < req.get_param_value_count("token"); ++i) {
            filter.tokens.push_back(req.get_param_value("token", i));
          }
          if (req.has_param("tokens")) {
            for (auto t : split(req.get_param_value("tokens"), ',')) {
              if (!trim(t).empty()) filter.tokens.emplace_back(trim(t));
            }
          }
          res.status = 200;
          res.set_content(svc->export_research(req.get_header_value("X-Research-Secret"), filter),
                          "application/x-ndjson");
        }));
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::invalid_parameter, "cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw Error(ErrorCode::invalid_parameter, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

bool HttpServer::serve() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

bool HttpServer::running() const { return server_->is_running(); }

}  // namespace pathways
