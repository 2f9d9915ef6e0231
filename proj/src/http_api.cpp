#include "plab/http_api.hpp"

#include <httplib.h>

#include <sstream>

namespace plab {

using nlohmann::json;

namespace {

json point_json(const Point& x) { return std::vector<double>(x.begin(), x.end()); }

json box_json(const Box& box) { return {{"lower", point_json(box.lower)}, {"upper", point_json(box.upper)}}; }

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message, json extra = json::object()) {
  extra["error"] = message;
  send(res, status, extra);
}

// Maps library exceptions onto HTTP statuses.
template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const DomainError& e) {
      send_error(res, 400, e.what(), {{"domain", box_json(e.domain())}});
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    } catch (const StateError& e) {
      send_error(res, 409, e.what());
    } catch (const InputError& e) {
      send_error(res, 400, e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, std::string("malformed request: ") + e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw InputError("request body must be a JSON object");
  return body;
}

std::optional<std::string> query(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  auto value = req.get_param_value(key);
  if (value.empty()) return std::nullopt;
  return value;
}

}  // namespace

json problem_json(const TestProblem& problem, bool include_optimum) {
  json j{{"id", problem.id}, {"name", problem.name}, {"domain", box_json(problem.domain)}};
  if (include_optimum) {
    j["minimum"] = problem.minimum;
    j["target_score"] = -problem.minimum;
    json mins = json::array();
    for (const auto& m : problem.minimizers) mins.push_back(point_json(m));
    j["minimizers"] = mins;
  }
  return j;
}

json click_json(const ClickRecord& r) {
  return {{"session_id", r.session_id}, {"player_id", r.player_id}, {"problem_id", r.problem_id},
          {"click_index", r.click_index}, {"x", point_json(r.x)}, {"score", r.score},
          {"cum_score", r.cum_score}, {"ts", r.ts}};
}

json session_json(const Session& s) {
  json j{{"session_id", s.session_id}, {"player_id", s.player_id}, {"mode", s.mode},
         {"status", std::string(to_string(s.status))}, {"budget", s.budget}, {"problems", s.problems},
         {"current_problem_index", s.current}, {"remaining", s.remaining()}};
  json history = json::object();
  for (std::size_t i = 0; i < s.problems.size(); ++i) {
    json events = json::array();
    for (const auto& c : s.clicks[i]) events.push_back(click_json(c));
    history[s.problems[i]] = events;
  }
  if (const std::string* id = s.current_problem(); id && s.status == SessionStatus::Active) {
    json current = problem_json(find_problem(*id), false);
    if (s.mode == 2) current["target_score"] = -find_problem(*id).minimum;
    j["current_problem"] = current;
    j["clicks"] = history[*id];
  } else {
    j["current_problem"] = nullptr;
    j["clicks"] = json::array();
  }
  j["history"] = history;
  return j;
}

json trace_json(const Trace& t) {
  json steps = json::array();
  for (const auto& s : t.steps) steps.push_back({{"x", point_json(s.x)}, {"score", s.score}, {"ts", s.timestamp}});
  return {{"session_id", t.session_id}, {"player_id", t.player_id}, {"problem_id", t.problem_id},
          {"mode", t.mode}, {"budget", t.budget}, {"steps", steps}};
}

void install_routes(httplib::Server& server, SessionService& service) {
  server.Get("/problems", guarded([](const httplib::Request& req, httplib::Response& res) {
    const bool full = req.get_param_value("include_optimum") == "true";
    json out = json::array();
    for (const auto& p : list_problems()) out.push_back(problem_json(p, full));
    send(res, 200, out);
  }));

  server.Post("/sessions", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    std::optional<std::vector<std::string>> problems;
    if (body.contains("problems")) problems = body.at("problems").get<std::vector<std::string>>();
    std::optional<std::uint64_t> seed;
    if (body.contains("seed")) seed = body.at("seed").get<std::uint64_t>();
    const Session s = service.create_session(body.value("player_id", std::string("anonymous")), body.value("mode", 1),
                                             problems, seed);
    send(res, 201, session_json(s));
  }));

  server.Get(R"(/sessions/([0-9A-Za-z_-]+))", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    send(res, 200, session_json(service.get_session(req.matches[1])));
  }));

  server.Post(R"(/sessions/([0-9A-Za-z_-]+)/clicks)",
              guarded([&service](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                const Point x = make_point({body.at("x1").get<double>(), body.at("x2").get<double>()});
                const ClickResult r = service.submit_click(req.matches[1], x);
                const Session s = service.get_session(req.matches[1]);
                json out{{"event", click_json(r.event)}, {"remaining", r.remaining},
                         {"problem_done", r.problem_done}, {"session_done", r.session_done},
                         {"session", session_json(s)}};
                send(res, 200, out);
              }));

  server.Post(R"(/sessions/([0-9A-Za-z_-]+)/close)",
              guarded([&service](const httplib::Request& req, httplib::Response& res) {
                send(res, 200, session_json(service.close_session(req.matches[1])));
              }));

  server.Get("/export", guarded([&service](const httplib::Request& req, httplib::Response& res) {
    TraceFilter filter{query(req, "player"), query(req, "problem"), query(req, "since"), query(req, "until")};
    const auto result = service.export_traces(filter);
    if (req.get_param_value("format") == "ndjson") {
      std::ostringstream out;
      write_traces(out, result.traces);
      res.status = 200;
      res.set_content(out.str(), "application/x-ndjson");
      return;
    }
    json traces = json::array();
    for (const auto& t : result.traces) traces.push_back(trace_json(t));
    send(res, 200, {{"traces", traces}, {"diagnostics", result.diagnostics}});
  }));
}

}  // namespace plab
