#include "plab/trace.hpp"

#include "plab/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <istream>
#include <map>
#include <ostream>

namespace plab {

using nlohmann::json;

PointList Trace::decisions(std::size_t count) const {
  PointList out;
  for (std::size_t i = 0; i < count && i < steps.size(); ++i) out.push_back(steps[i].x);
  return out;
}

std::vector<double> Trace::outcomes(std::size_t count) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < count && i < steps.size(); ++i) out.push_back(steps[i].score);
  return out;
}

std::string to_json_line(const ClickRecord& r) {
  json j;
  j["v"] = kTraceLogVersion;
  j["session_id"] = r.session_id;
  j["player_id"] = r.player_id;
  j["problem_id"] = r.problem_id;
  j["mode"] = r.mode;
  j["click_index"] = r.click_index;
  j["x"] = std::vector<double>(r.x.data(), r.x.data() + r.x.size());
  j["score"] = r.score;
  j["cum_score"] = r.cum_score;
  j["ts"] = r.ts;
  return j.dump();
}

namespace {

ClickRecord click_from_json(const json& j) {
  if (j.at("v").get<int>() != kTraceLogVersion) {
    throw InputError(fmt::format("unsupported trace log version {}", j.at("v").dump()));
  }
  ClickRecord r;
  r.session_id = j.at("session_id").get<std::string>();
  r.player_id = j.at("player_id").get<std::string>();
  r.problem_id = j.at("problem_id").get<std::string>();
  r.mode = j.at("mode").get<int>();
  r.click_index = j.at("click_index").get<int>();
  const auto coords = j.at("x").get<std::vector<double>>();
  r.x = Eigen::Map<const Eigen::VectorXd>(coords.data(), static_cast<Eigen::Index>(coords.size()));
  r.score = j.at("score").get<double>();
  r.cum_score = j.at("cum_score").get<double>();
  r.ts = j.at("ts").get<std::string>();
  if (r.click_index < 1) throw InputError("click_index must be 1-based");
  return r;
}

bool passes(const ClickRecord& r, const TraceFilter& f) {
  if (f.player && r.player_id != *f.player) return false;
  if (f.problem && r.problem_id != *f.problem) return false;
  if (f.since && r.ts.substr(0, f.since->size()) < *f.since) return false;
  if (f.until && r.ts.substr(0, f.until->size()) > *f.until) return false;
  return true;
}

}  // namespace

ClickRecord parse_click_record(const std::string& line) {
  try {
    return click_from_json(json::parse(line));
  } catch (const json::exception& e) {
    throw InputError(fmt::format("malformed click record: {}", e.what()));
  }
}

TraceReadResult read_traces(std::istream& in, const TraceFilter& filter, int default_budget) {
  TraceReadResult result;
  std::map<std::string, int> session_budget;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::map<std::size_t, std::map<int, TraceStep>> steps;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (j.contains("record")) {
        if (j.at("record") == "session" && j.contains("budget")) {
          session_budget[j.at("session_id").get<std::string>()] = j.at("budget").get<int>();
        }
        continue;
      }
      const ClickRecord r = click_from_json(j);
      if (!passes(r, filter)) continue;
      const auto key = std::make_pair(r.session_id, r.problem_id);
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(key, result.traces.size()).first;
        Trace t;
        t.session_id = r.session_id;
        t.player_id = r.player_id;
        t.problem_id = r.problem_id;
        t.mode = r.mode;
        result.traces.push_back(std::move(t));
      }
      auto& bucket = steps[it->second];
      if (bucket.contains(r.click_index)) {
        result.diagnostics.push_back(fmt::format("line {}: duplicate click index {}", line_no, r.click_index));
        continue;
      }
      bucket.emplace(r.click_index, TraceStep{r.x, r.score, r.ts});
    } catch (const std::exception& e) {
      result.diagnostics.push_back(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  for (std::size_t i = 0; i < result.traces.size(); ++i) {
    auto& t = result.traces[i];
    const auto b = session_budget.find(t.session_id);
    t.budget = b == session_budget.end() ? default_budget : b->second;
    for (auto& [click, step] : steps[i]) t.steps.push_back(std::move(step));
  }
  return result;
}

void write_traces(std::ostream& out, const std::vector<Trace>& traces) {
  for (const auto& t : traces) {
    double cum = 0.0;
    int click = 0;
    for (const auto& s : t.steps) {
      cum += s.score;
      out << to_json_line({t.session_id, t.player_id, t.problem_id, t.mode, ++click, s.x, s.score, cum, s.timestamp})
          << '\n';
    }
  }
}

std::string utc_now_iso8601() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  return fmt::format("{}.{:03d}Z", buf, static_cast<int>(ms));
}

}  // namespace plab
