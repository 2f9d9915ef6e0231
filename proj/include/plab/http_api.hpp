#pragma once

#include "plab/service.hpp"
#include "plab/testbed.hpp"

#include <json.hpp>

namespace httplib {
class Server;
}

namespace plab {

/// Problem descriptor. The optimum is only included on request.
nlohmann::json problem_json(const TestProblem& problem, bool include_optimum);
nlohmann::json click_json(const ClickRecord& record);
/// Session snapshot. Mode 2 adds the current problem's target score.
nlohmann::json session_json(const Session& session);
nlohmann::json trace_json(const Trace& trace);

/// Registers the JSON routes:
///   POST /sessions                  {player_id, mode, problems?, seed?}
///   GET  /sessions/{id}
///   POST /sessions/{id}/clicks      {x1, x2}
///   POST /sessions/{id}/close
///   GET  /problems[?include_optimum=true]
///   GET  /export?player=&problem=&since=&until=[&format=ndjson]
void install_routes(httplib::Server& server, SessionService& service);

}  // namespace plab
