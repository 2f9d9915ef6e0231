#include "plab/service.hpp"

#include "plab/testbed.hpp"

#include <fcntl.h>
#include <fmt/format.h>
#include <json.hpp>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <random>

namespace plab {

using nlohmann::json;

std::string_view to_string(SessionStatus status) {
  return status == SessionStatus::Active ? "active" : "finished";
}

int Session::remaining() const {
  if (current >= problems.size()) return 0;
  return budget - static_cast<int>(clicks[current].size());
}

const std::string* Session::current_problem() const {
  return current < problems.size() ? &problems[current] : nullptr;
}

TraceLogWriter::TraceLogWriter(const std::filesystem::path& path) {
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw InputError(fmt::format("cannot open trace log {}: {}", path.string(), std::strerror(errno)));
}

TraceLogWriter::~TraceLogWriter() {
  if (fd_ >= 0) ::close(fd_);
}

void TraceLogWriter::append(const std::string& line) {
  const std::string data = line + '\n';
  const ssize_t written = ::write(fd_, data.data(), data.size());
  if (written != static_cast<ssize_t>(data.size())) {
    throw std::runtime_error(fmt::format("trace log write failed: {}", std::strerror(errno)));
  }
  ::fsync(fd_);
}

SessionService::SessionService(std::filesystem::path log_path, int default_budget)
    : log_path_(std::move(log_path)), default_budget_(default_budget) {
  if (default_budget_ < 1) throw InputError("budget must be positive");
  const auto parent = log_path_.parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent)) {
    throw InputError(fmt::format("log directory {} does not exist", parent.string()));
  }
  replay();
  writer_.emplace(log_path_);
}

void SessionService::apply_click(Session& s, ClickRecord record) {
  const auto it = std::find(s.problems.begin(), s.problems.end(), record.problem_id);
  if (it == s.problems.end()) throw InputError("click for a problem outside the session");
  const auto idx = static_cast<std::size_t>(it - s.problems.begin());
  s.clicks[idx].push_back(std::move(record));
  while (s.current < s.problems.size() && static_cast<int>(s.clicks[s.current].size()) >= s.budget) ++s.current;
  if (s.current >= s.problems.size()) s.status = SessionStatus::Finished;
}

void SessionService::replay() {
  std::ifstream in(log_path_);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (j.contains("record")) {
        const auto id = j.at("session_id").get<std::string>();
        if (j.at("record") == "session") {
          Session s;
          s.session_id = id;
          s.player_id = j.at("player_id").get<std::string>();
          s.mode = j.at("mode").get<int>();
          s.problems = j.at("problems").get<std::vector<std::string>>();
          s.budget = j.at("budget").get<int>();
          s.seed = j.at("seed").get<std::uint64_t>();
          s.created = j.at("ts").get<std::string>();
          s.clicks.resize(s.problems.size());
          sessions_[id] = std::move(s);
        } else if (j.at("record") == "close") {
          if (auto it = sessions_.find(id); it != sessions_.end()) it->second.status = SessionStatus::Finished;
        }
        continue;
      }
      ClickRecord r = parse_click_record(line);
      auto it = sessions_.find(r.session_id);
      if (it == sessions_.end()) continue;  // clicks written by other tools
      apply_click(it->second, std::move(r));
    } catch (const std::exception& e) {
      replay_diagnostics_.push_back(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
}

Session& SessionService::find(const std::string& session_id) {
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError(fmt::format("unknown session '{}'", session_id));
  return it->second;
}

Session SessionService::create_session(const std::string& player_id, int mode,
                                       const std::optional<std::vector<std::string>>& problems,
                                       std::optional<std::uint64_t> seed) {
  if (mode < 1 || mode > 3) throw InputError(fmt::format("mode must be 1, 2 or 3, got {}", mode));
  if (player_id.empty()) throw InputError("player_id must not be empty");

  Session s;
  s.player_id = player_id;
  s.mode = mode;
  s.budget = default_budget_;
  std::random_device rd;
  s.seed = seed.value_or((static_cast<std::uint64_t>(rd()) << 32) | rd());
  if (problems) {
    if (problems->empty()) throw InputError("problem list must not be empty");
    for (const auto& id : *problems) find_problem(id);
    s.problems = *problems;
  } else {
    for (const auto& p : list_problems()) s.problems.push_back(p.id);
    std::mt19937_64 rng(s.seed);
    std::shuffle(s.problems.begin(), s.problems.end(), rng);
  }
  s.clicks.resize(s.problems.size());
  s.created = utc_now_iso8601();

  std::lock_guard lock(mutex_);
  do {
    s.session_id = fmt::format("{:08x}{:08x}", rd(), rd());
  } while (sessions_.contains(s.session_id));

  json j;
  j["v"] = kTraceLogVersion;
  j["record"] = "session";
  j["session_id"] = s.session_id;
  j["player_id"] = s.player_id;
  j["mode"] = s.mode;
  j["problems"] = s.problems;
  j["budget"] = s.budget;
  j["seed"] = s.seed;
  j["ts"] = s.created;
  writer_->append(j.dump());
  sessions_[s.session_id] = s;
  return s;
}

ClickResult SessionService::submit_click(const std::string& session_id, const Point& x) {
  std::lock_guard lock(mutex_);
  Session& s = find(session_id);
  if (s.status == SessionStatus::Finished || s.current >= s.problems.size()) {
    throw StateError(fmt::format("session '{}' is finished", session_id));
  }
  const std::string problem_id = s.problems[s.current];
  const TestProblem& problem = find_problem(problem_id);
  if (x.size() != problem.domain.dim() || !x.allFinite() || !problem.domain.contains(x)) {
    throw DomainError(fmt::format("click outside the {} domain", problem_id), problem.domain);
  }
  auto& done = s.clicks[s.current];
  const double score = problem.score(x);
  const double cum = (done.empty() ? 0.0 : done.back().cum_score) + score;
  ClickRecord record{s.session_id, s.player_id, problem_id, s.mode, static_cast<int>(done.size()) + 1,
                     x, score, cum, utc_now_iso8601()};
  writer_->append(to_json_line(record));

  const std::size_t before = s.current;
  apply_click(s, record);
  ClickResult result;
  result.event = std::move(record);
  result.remaining = s.budget - static_cast<int>(s.clicks[before].size());
  result.problem_done = s.current != before;
  result.session_done = s.status == SessionStatus::Finished;
  return result;
}

Session SessionService::get_session(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError(fmt::format("unknown session '{}'", session_id));
  return it->second;
}

Session SessionService::close_session(const std::string& session_id) {
  std::lock_guard lock(mutex_);
  Session& s = find(session_id);
  if (s.status == SessionStatus::Active) {
    json j{{"v", kTraceLogVersion}, {"record", "close"}, {"session_id", session_id}, {"ts", utc_now_iso8601()}};
    writer_->append(j.dump());
    s.status = SessionStatus::Finished;
  }
  return s;
}

TraceReadResult SessionService::export_traces(const TraceFilter& filter) const {
  std::lock_guard lock(mutex_);
  std::ifstream in(log_path_);
  if (!in) return {};
  return read_traces(in, filter, default_budget_);
}

}  // namespace plab
