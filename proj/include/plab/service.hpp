#pragma once

#include "plab/error.hpp"
#include "plab/trace.hpp"
#include "plab/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace plab {

/// Click outside the current problem's domain.
class DomainError : public InputError {
 public:
  DomainError(const std::string& what, Box domain) : InputError(what), domain_(std::move(domain)) {}
  [[nodiscard]] const Box& domain() const { return domain_; }

 private:
  Box domain_;
};

enum class SessionStatus { Active, Finished };

std::string_view to_string(SessionStatus status);

struct Session {
  std::string session_id;
  std::string player_id;
  int mode = 1;  // 1: best score, 2: best score with the optimum value shown, 3: cumulative score
  std::vector<std::string> problems;
  std::uint64_t seed = 0;
  int budget = 20;
  std::size_t current = 0;  // index into problems; == problems.size() once exhausted
  SessionStatus status = SessionStatus::Active;
  std::vector<std::vector<ClickRecord>> clicks;  // per problem, in order
  std::string created;

  [[nodiscard]] int remaining() const;
  [[nodiscard]] const std::string* current_problem() const;
};

struct ClickResult {
  ClickRecord event;
  int remaining = 0;          // shots left on the problem just clicked
  bool problem_done = false;  // budget exhausted, session moved on
  bool session_done = false;
};

/// Append-only NDJSON writer; each line goes out in a single write() and is
/// fsynced before append() returns.
class TraceLogWriter {
 public:
  explicit TraceLogWriter(const std::filesystem::path& path);
  ~TraceLogWriter();
  TraceLogWriter(const TraceLogWriter&) = delete;
  TraceLogWriter& operator=(const TraceLogWriter&) = delete;

  void append(const std::string& line);

 private:
  int fd_ = -1;
};

/// Game sessions backed by the trace log. State is rebuilt from the log on
/// construction, so a restarted service continues where it stopped.
/// All operations are serialized.
class SessionService {
 public:
  explicit SessionService(std::filesystem::path log_path, int default_budget = 20);

  Session create_session(const std::string& player_id, int mode,
                         const std::optional<std::vector<std::string>>& problems = std::nullopt,
                         std::optional<std::uint64_t> seed = std::nullopt);
  ClickResult submit_click(const std::string& session_id, const Point& x);
  [[nodiscard]] Session get_session(const std::string& session_id) const;
  Session close_session(const std::string& session_id);
  [[nodiscard]] TraceReadResult export_traces(const TraceFilter& filter = {}) const;

  [[nodiscard]] const std::vector<std::string>& replay_diagnostics() const { return replay_diagnostics_; }
  [[nodiscard]] const std::filesystem::path& log_path() const { return log_path_; }

 private:
  void replay();
  void apply_click(Session& s, ClickRecord record);
  Session& find(const std::string& session_id);

  std::filesystem::path log_path_;
  int default_budget_;
  mutable std::mutex mutex_;
  std::map<std::string, Session> sessions_;
  std::vector<std::string> replay_diagnostics_;
  std::optional<TraceLogWriter> writer_;
};

}  // namespace plab
