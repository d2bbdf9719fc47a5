#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <pthread.h>

#include "pathways/bundled.hpp"
#include "pathways/error.hpp"
#include "pathways/http.hpp"
#include "pathways/scenario.hpp"
#include "pathways/script.hpp"
#include "pathways/service.hpp"
#include "pathways/wire.hpp"

namespace pathways::cli {

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kSimulation = 2;

struct ContextOptions {
  std::string scenario;
  std::string params;
};

std::shared_ptr<const GameContext> make_context(const ContextOptions& o) {
  if (o.scenario.empty() && o.params.empty()) return GameContext::bundled();
  Scenario scenario = o.scenario.empty() ? bundled_scenario() : load_scenario(std::filesystem::path(o.scenario));
  Parameters params = o.params.empty() ? default_parameters() : load_parameters(std::filesystem::path(o.params));
  return std::make_shared<const GameContext>(std::move(scenario), std::move(params));
}

void add_context_flags(CLI::App& cmd, ContextOptions& o) {
  cmd.add_option("--scenario", o.scenario, "scenario CSV (default: bundled Swiss 2022 data)");
  cmd.add_option("--params", o.params, "parameter file (default: bundled parameters)");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::invalid_parameter, "cannot write " + path);
  f << text;
  if (!f.flush()) throw Error(ErrorCode::invalid_parameter, "failed writing " + path);
}

std::string status_text(RunStatus status) {
  switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::insufficientSupply: return "insufficient supply";
    case RunStatus::rejected: return "rejected";
  }
  return "unknown";
}

// Writes the CSV to --out (or stdout) and reports failures on stderr.
int report(const RunResult& r, const std::string& out_path, std::ostream& out, std::ostream& err) {
  const std::string csv = wire::metrics_csv(r.state.metrics_history, r.card);
  if (out_path.empty()) {
    out << csv;
  } else {
    write_text(out_path, csv);
  }
  if (r.status != RunStatus::completed) {
    err << status_text(r.status) << " at turn " << r.failing_turn << ": " << r.message << "\n";
  }
  return r.exit_code();
}

int cmd_run(const ContextOptions& co, const std::string& script_path, std::optional<std::uint64_t> seed,
            const std::string& out_path, const std::string& log_path, std::ostream& out, std::ostream& err) {
  const auto ctx = make_context(co);
  const StrategyScript script = load_script(script_path);
  const RunResult r = run_script(ctx, script, seed);
  if (!log_path.empty()) {
    std::ostringstream log;
    wire::write_session_log(log, wire::SessionLog{"", r.seed, script.objective_frame, r.log});
    write_text(log_path, log.str());
  }
  return report(r, out_path, out, err);
}

int cmd_replay(const ContextOptions& co, const std::string& log_path, const std::string& session,
               const std::string& out_path, std::ostream& out, std::ostream& err) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::invalid_parameter, "cannot open " + log_path);
  const wire::SessionLog log = wire::read_session_log(in, log_path, session);
  const RunResult r = run_log(make_context(co), log.seed, log.objective_frame, log.records);
  return report(r, out_path, out, err);
}

int cmd_calibrate(const std::string& history, const std::string& out_path, std::ostream& out, std::ostream& err) {
  std::ifstream in(history, std::ios::binary);
  if (!in) throw Error(ErrorCode::invalid_parameter, "cannot open " + history);
  const CalibrationSet set = load_history(in, history);
  if (set.forecasts.empty()) throw Error(ErrorCode::insufficient_data, history + " holds no time series");

  std::ostringstream csv;
  write_calibration_csv(set, csv);
  if (out_path.empty()) {
    out << csv.str();
  } else {
    write_text(out_path, csv.str());
  }

  auto& summary = out_path.empty() ? err : out;
  for (const auto& [id, m] : set.forecasts) {
    summary << std::left << std::setw(40) << id << " window " << m.window << "  base " << m.base_year
            << "  level " << m.intercept << "  slope " << m.slope << "/yr\n";
  }
  summary << set.forecasts.size() << " series, " << set.seasonal.size() << " seasonal profiles\n";
  return kOk;
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

int cmd_serve(const ContextOptions& co, const std::string& listen, const std::string& storage, std::ostream& out) {
  ServiceConfig config;
  config.research_secret = env_or("PATHWAYS_RESEARCH_SECRET", "");
  config.token_frames = parse_token_frames(env_or("PATHWAYS_TOKENS", ""));
  const ListenAddress addr = parse_listen_address(listen);

  auto store = open_store(storage);
  auto service = std::make_shared<SessionService>(make_context(co), std::move(store), std::move(config));
  HttpServer server(service);

  // Signals are taken synchronously by a waiter thread rather than a handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigset_t previous;
  pthread_sigmask(SIG_BLOCK, &signals, &previous);

  const int port = server.bind(addr.host, addr.port);
  out << "listening on " << addr.host << ":" << port << std::endl;

  std::atomic<bool> signalled{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    signalled = true;
    server.stop();
  });
  const bool clean = server.serve();
  if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  pthread_sigmask(SIG_SETMASK, &previous, nullptr);
  out << "stopped" << std::endl;
  return clean || signalled ? kOk : kUsage;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pathways: energy transition game engine"};
  app.require_subcommand(1);

  ContextOptions co;
  std::string script = "balanced-renewables";
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string log_path;
  auto* run = app.add_subcommand("run", "play a strategy script and write the metrics CSV");
  add_context_flags(*run, co);
  run->add_option("--script", script, "script file or bundled script name")->capture_default_str();
  run->add_option("--seed", seed, "override the script seed");
  run->add_option("--out", out_path, "metrics CSV path (default: stdout)");
  run->add_option("--log", log_path, "also write the replayable session log");

  std::string replay_log;
  std::string session;
  auto* replay = app.add_subcommand("replay", "replay a session log or research export");
  add_context_flags(*replay, co);
  replay->add_option("--log", replay_log, "session log (ndjson)")->required();
  replay->add_option("--session", session, "session id inside a research export");
  replay->add_option("--out", out_path, "metrics CSV path (default: stdout)");

  std::string history;
  auto* calibrate = app.add_subcommand("calibrate", "fit forecasts from a history file");
  calibrate->add_option("history", history, "history in the scenario CSV format")->required();
  calibrate->add_option("--out", out_path, "calibration CSV path (default: stdout)");

  std::string listen = env_or("PATHWAYS_LISTEN", "127.0.0.1:8080");
  std::string storage = env_or("PATHWAYS_STORAGE", "pathways-data");
  auto* serve = app.add_subcommand("serve", "run the HTTP session service");
  add_context_flags(*serve, co);
  serve->add_option("--listen", listen, "host:port")->capture_default_str();
  serve->add_option("--storage", storage, "memory, sqlite:PATH, file:DIR or a directory")->capture_default_str();

  auto* scripts = app.add_subcommand("scripts", "list bundled strategy scripts");

  std::vector<std::string> argv_rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv_rest.begin(), argv_rest.end());
  try {
    app.parse(argv_rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(co, script, seed, out_path, log_path, out, err);
    if (*replay) return cmd_replay(co, replay_log, session, out_path, out, err);
    if (*calibrate) return cmd_calibrate(history, out_path, out, err);
    if (*serve) return cmd_serve(co, listen, storage, out);
    if (*scripts) {
      for (auto name : bundled::script_names()) out << name << "\n";
      return kOk;
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::insufficient_supply:
      case ErrorCode::incomplete_simulation:
      case ErrorCode::replay_divergence: return kSimulation;
      default: return kUsage;
    }
  }
  return kUsage;
}

}  // namespace pathways::cli
