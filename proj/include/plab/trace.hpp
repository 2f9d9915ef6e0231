#pragma once

#include "plab/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace plab {

struct TraceStep {
  Point x;
  double score = 0.0;
  std::string timestamp;  // ISO-8601 UTC
};

/// One player's (or agent's) ordered decisions on one problem.
struct Trace {
  std::string session_id;
  std::string player_id;
  std::string problem_id;
  int mode = 1;
  int budget = 20;
  std::vector<TraceStep> steps;

  [[nodiscard]] PointList decisions(std::size_t count) const;
  [[nodiscard]] std::vector<double> outcomes(std::size_t count) const;
};

// Trace log: newline-delimited JSON, one record per line.
//
// Click record (schema version 1):
//   {"v":1, "session_id", "player_id", "problem_id", "mode", "click_index",
//    "x":[x1,x2], "score", "cum_score", "ts"}
// Session record, written once when a session opens:
//   {"v":1, "record":"session", "session_id", "player_id", "mode",
//    "problems":[...], "budget", "seed", "ts"}
// Close record: {"v":1, "record":"close", "session_id", "ts"}
inline constexpr int kTraceLogVersion = 1;

struct ClickRecord {
  std::string session_id;
  std::string player_id;
  std::string problem_id;
  int mode = 1;
  int click_index = 1;  // 1-based within the problem
  Point x;
  double score = 0.0;
  double cum_score = 0.0;
  std::string ts;
};

std::string to_json_line(const ClickRecord& record);
/// Throws InputError on malformed JSON or missing fields.
ClickRecord parse_click_record(const std::string& line);

struct TraceFilter {
  std::optional<std::string> player;
  std::optional<std::string> problem;
  std::optional<std::string> since;  // inclusive ISO-8601 prefix comparison on ts
  std::optional<std::string> until;  // inclusive
};

struct TraceReadResult {
  std::vector<Trace> traces;
  std::vector<std::string> diagnostics;  // one per skipped line
};

/// Rebuilds traces from a log stream. Malformed lines are skipped with a
/// diagnostic; non-click records are ignored. Traces are ordered by first
/// appearance of their (session, problem) key; steps by click index.
TraceReadResult read_traces(std::istream& in, const TraceFilter& filter = {}, int default_budget = 20);

/// Writes each trace as click records, in order.
void write_traces(std::ostream& out, const std::vector<Trace>& traces);

std::string utc_now_iso8601();

}  // namespace plab
