#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "pathways/bundled.hpp"
#include "pathways/error.hpp"
#include "pathways/scenario.hpp"
#include "pathways/script.hpp"
#include "pathways/service.hpp"
#include "pathways/wire.hpp"

namespace py = pybind11;
using namespace pathways;
using wire::Json;

namespace {

// JSON crosses the boundary as text; the json module does the conversion.
py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(wire::dump(j)); }

Json from_python(const py::handle& obj) {
  return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

std::shared_ptr<const GameContext> make_context(const std::optional<std::string>& scenario,
                                                const std::optional<std::string>& params) {
  if (!scenario && !params) return GameContext::bundled();
  Scenario sc = scenario ? load_scenario(std::filesystem::path(*scenario)) : bundled_scenario();
  Parameters p = params ? load_parameters(std::filesystem::path(*params)) : default_parameters();
  return std::make_shared<const GameContext>(std::move(sc), std::move(p));
}

ObjectiveFrame frame_of(const std::string& text) {
  const auto frame = parse_enum<ObjectiveFrame>(text);
  if (!frame) throw Error(ErrorCode::invalid_parameter, "unknown objective frame '" + text + "'");
  return *frame;
}

std::string_view status_name(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::insufficientSupply: return "insufficientSupply";
    case RunStatus::rejected: return "rejected";
  }
  return "unknown";
}

Json run_json(const RunResult& r) {
  Json log = Json::array();
  for (const auto& rec : r.log) log.push_back(wire::to_json(rec));
  Json metrics = Json::array();
  for (const auto& m : r.state.metrics_history) metrics.push_back(wire::to_json(m));
  Json j;
  j["status"] = std::string(status_name(r.status));
  j["exitCode"] = r.exit_code();
  j["failingTurn"] = r.failing_turn;
  j["message"] = r.message;
  j["seed"] = r.seed;
  j["objectiveFrame"] = std::string(to_string(r.state.objective_frame));
  j["score"] = wire::to_json(r.card);
  j["metrics"] = std::move(metrics);
  j["log"] = std::move(log);
  j["csv"] = wire::metrics_csv(r.state.metrics_history, r.card);
  return j;
}

Json balance_json(const AnnualBalance& b) {
  Json flows = Json::object();
  for (CarrierKind c : all_values<CarrierKind>()) {
    const CarrierFlows& f = b.flows[c];
    Json consumption = Json::object();
    for (Sector s : all_values<Sector>()) consumption[std::string(to_string(s))] = f.final_consumption[s];
    Json row;
    row["imports"] = f.imports;
    row["exports"] = f.exports;
    row["domesticProduction"] = f.domestic_production;
    row["stockChange"] = f.stock_change;
    row["transformationInput"] = f.transformation_input;
    row["transformationOutput"] = f.transformation_output;
    row["deliveryLoss"] = f.delivery_loss;
    row["finalConsumption"] = std::move(consumption);
    row["residual"] = f.closure_residual();
    flows[std::string(to_string(c))] = std::move(row);
  }
  Json generation = Json::object();
  for (TechnologyKind k : all_values<TechnologyKind>()) generation[std::string(to_string(k))] = b.generation[k];
  Json j;
  j["year"] = b.year;
  j["flows"] = std::move(flows);
  j["generation"] = std::move(generation);
  j["maxRelativeResidual"] = b.max_relative_residual();
  return j;
}

std::vector<ActionRecord> records_from(const py::handle& log) {
  std::vector<ActionRecord> out;
  for (const auto& r : from_python(log)) out.push_back(wire::record_from_json(r));
  return out;
}

class PyEngine {
 public:
  PyEngine(std::uint64_t seed, const std::string& frame, std::optional<std::string> scenario,
           std::optional<std::string> params)
      : engine_(make_context(scenario, params), seed, frame_of(frame)) {}

  py::object apply(const py::handle& action) {
    return to_python(wire::to_json(engine_.apply(wire::action_from_json(from_python(action)))));
  }
  py::object state() const { return to_python(wire::state_view(engine_.context(), engine_.state())); }
  py::object score() const { return to_python(wire::to_json(engine_.score())); }
  py::object log() const {
    Json out = Json::array();
    for (const auto& r : engine_.log()) out.push_back(wire::to_json(r));
    return to_python(out);
  }
  py::object balance(int year) const { return to_python(balance_json(turn_balance(engine_.context(), engine_.state(), year))); }
  bool completed() const { return engine_.state().completed; }
  int turn() const { return engine_.state().turn; }

 private:
  Engine engine_;
};

class PyService {
 public:
  PyService(const std::string& storage, const std::string& research_secret, const std::string& tokens) {
    ServiceConfig config;
    config.research_secret = research_secret;
    config.token_frames = parse_token_frames(tokens);
    service_ = std::make_shared<SessionService>(GameContext::bundled(), open_store(storage), std::move(config));
  }

  py::object create_session(std::optional<std::string> survey_token, std::optional<std::string> frame,
                            std::optional<std::string> language, std::optional<std::uint64_t> seed) {
    CreateSessionRequest req;
    req.survey_token = std::move(survey_token);
    if (frame) req.objective_frame = frame_of(*frame);
    req.language = std::move(language);
    req.seed = seed;
    return to_python(service_->create_session(req));
  }
  py::object post_action(const std::string& id, const py::handle& action, std::optional<std::int64_t> sequence) {
    return to_python(service_->post_action(id, wire::action_from_json(from_python(action)), sequence));
  }
  py::object get_state(const std::string& id) { return to_python(service_->get_state(id)); }
  py::object abandon(const std::string& id) { return to_python(service_->abandon(id)); }
  py::object submit_leaderboard(const std::string& id, const std::string& name) {
    return to_python(service_->submit_leaderboard(id, name));
  }
  py::object leaderboard(const std::string& order_by, std::size_t limit) {
    return to_python(service_->leaderboard(parse_metric(order_by), limit));
  }
  std::string export_research(const std::string& credential) { return service_->export_research(credential, {}); }
  void clear_cache() { service_->clear_cache(); }

 private:
  std::shared_ptr<SessionService> service_;
};

}  // namespace

PYBIND11_MODULE(_pathways, m) {
  m.doc() = "Energy transition game engine: balances, calibration, metrics and sessions.";

  // Held for the life of the interpreter.
  static py::handle error = py::exception<Error>(m, "PathwaysError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      exc.attr("line") = e.line();
      PyErr_SetObject(error.ptr(), exc.ptr());
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    } catch (const Json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def(
      "run_script",
      [](const std::string& script, std::optional<std::uint64_t> seed, std::optional<std::string> scenario,
         std::optional<std::string> params) {
        return to_python(run_json(run_script(make_context(scenario, params), load_script(script), seed)));
      },
      py::arg("script"), py::arg("seed") = py::none(), py::arg("scenario") = py::none(),
      py::arg("params") = py::none(), "Play a bundled script (by name) or a script file.");
  m.def(
      "run_script_text",
      [](const std::string& text, std::optional<std::uint64_t> seed, std::optional<std::string> scenario,
         std::optional<std::string> params) {
        return to_python(
            run_json(run_script(make_context(scenario, params), parse_script(std::string_view(text), "<text>"), seed)));
      },
      py::arg("text"), py::arg("seed") = py::none(), py::arg("scenario") = py::none(),
      py::arg("params") = py::none());
  m.def(
      "replay",
      [](std::uint64_t seed, const std::string& frame, const py::handle& log) {
        return to_python(run_json(run_log(GameContext::bundled(), seed, frame_of(frame), records_from(log))));
      },
      py::arg("seed"), py::arg("objective_frame"), py::arg("log"), "Replay a recorded action log.");
  m.def("bundled_scripts", [] {
    std::vector<std::string> names;
    for (auto n : bundled::script_names()) names.emplace_back(n);
    return names;
  });

  m.def(
      "fit_linear",
      [](const std::vector<std::pair<int, double>>& points, int window) {
        TimeSeries ts{"series", {}};
        for (const auto& [year, value] : points) ts.points.push_back({year, value});
        const ForecastModel f = fit_linear(ts, window);
        py::dict d;
        d["intercept"] = f.intercept;
        d["slope"] = f.slope;
        d["base_year"] = f.base_year;
        d["window"] = f.window;
        return d;
      },
      py::arg("points"), py::arg("window") = kDefaultFitWindow, "Least-squares line over the last `window` points.");
  m.def(
      "forecast",
      [](double intercept, double slope, int base_year, int year) {
        ForecastModel f;
        f.intercept = intercept;
        f.slope = slope;
        f.base_year = base_year;
        return forecast(f, year);
      },
      py::arg("intercept"), py::arg("slope"), py::arg("base_year"), py::arg("year"));
  m.def(
      "calibrate",
      [](const std::string& history) {
        std::ostringstream out;
        write_calibration_csv(load_history(std::filesystem::path(history)), out);
        return out.str();
      },
      py::arg("history"), "Fit every series of a history file; returns the calibration CSV.");

  py::class_<PyEngine>(m, "Engine")
      .def(py::init<std::uint64_t, const std::string&, std::optional<std::string>, std::optional<std::string>>(),
           py::arg("seed"), py::arg("objective_frame") = "supply-only", py::arg("scenario") = py::none(),
           py::arg("params") = py::none())
      .def("apply", &PyEngine::apply, py::arg("action"), "Apply an action dict; returns its record.")
      .def("state", &PyEngine::state)
      .def("score", &PyEngine::score)
      .def("log", &PyEngine::log)
      .def("balance", &PyEngine::balance, py::arg("year"))
      .def_property_readonly("completed", &PyEngine::completed)
      .def_property_readonly("turn", &PyEngine::turn);

  py::class_<PyService>(m, "Service")
      .def(py::init<const std::string&, const std::string&, const std::string&>(), py::arg("storage") = "memory",
           py::arg("research_secret") = "", py::arg("tokens") = "")
      .def("create_session", &PyService::create_session, py::arg("survey_token") = py::none(),
           py::arg("objective_frame") = py::none(), py::arg("language") = py::none(), py::arg("seed") = py::none())
      .def("post_action", &PyService::post_action, py::arg("session_id"), py::arg("action"),
           py::arg("sequence") = py::none())
      .def("get_state", &PyService::get_state, py::arg("session_id"))
      .def("abandon", &PyService::abandon, py::arg("session_id"))
      .def("submit_leaderboard", &PyService::submit_leaderboard, py::arg("session_id"), py::arg("display_name"))
      .def("leaderboard", &PyService::leaderboard, py::arg("order_by") = "emissions", py::arg("limit") = 10)
      .def("export_research", &PyService::export_research, py::arg("credential"))
      .def("clear_cache", &PyService::clear_cache);
}
