#include "plab/analysis.hpp"

#include "plab/csv.hpp"
#include "plab/error.hpp"
#include "plab/testbed.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

namespace plab {

std::vector<DecisionTableRow> analyze_trace(const Trace& trace, const AnalysisConfig& config) {
  if (config.kernels.empty() || config.measures.empty()) throw InputError("analysis needs kernels and measures");
  if (config.n_init < 1) throw InputError("n_init must be at least 1");
  const auto n_init = static_cast<std::size_t>(config.n_init);
  if (trace.steps.size() < n_init + 1) {
    throw InputError(fmt::format("trace {}/{} has {} steps; at least {} are needed", trace.player_id,
                                 trace.problem_id, trace.steps.size(), n_init + 1));
  }
  const TestProblem& problem = find_problem(trace.problem_id);
  const PointList grid = build_grid(problem.domain, config.grid);

  std::vector<DecisionTableRow> rows;
  rows.reserve((trace.steps.size() - n_init) * config.measures.size());
  for (std::size_t n = n_init; n < trace.steps.size(); ++n) {
    const Dataset data{trace.decisions(n), trace.outcomes(n), problem.domain};
    const Point& next = trace.steps[n].x;
    const int step = static_cast<int>(n) + 1;

    std::vector<GPPosterior> gps;
    std::string failure;
    try {
      for (KernelKind kind : config.kernels) gps.push_back(fit_gp(data, kind, config.fit));
    } catch (const NumericalError& e) {
      failure = e.what();
    }

    const Incumbent incumbent = Incumbent::of(data.y);
    for (UQMeasureKind measure : config.measures) {
      DecisionTableRow row{trace.player_id, trace.problem_id, step, measure, 0.0, {}, true, {}};
      if (!failure.empty()) {
        row.valid = false;
        row.min_dist = std::nan("");
        row.diagnostic = failure;
      } else {
        const auto c = classify_decision(gps, grid, measure, incumbent, data.x, next, config.distance);
        row.min_dist = c.min_distance;
        row.per_kernel = c.per_kernel;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<DecisionTableRow> analyze_traces(const std::vector<Trace>& traces, const AnalysisConfig& config) {
  std::vector<std::vector<DecisionTableRow>> per_trace(traces.size());
  unsigned workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, traces.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < traces.size(); i = next++) {
      try {
        per_trace[i] = analyze_trace(traces[i], config);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);

  std::vector<DecisionTableRow> rows;
  for (auto& r : per_trace) std::move(r.begin(), r.end(), std::back_inserter(rows));
  return rows;
}

namespace {

std::string format_distance(const DecisionTableRow& row, double value) {
  return row.valid ? fmt::format("{}", value) : std::string("NA");
}

std::vector<std::string> narrow_fields(const DecisionTableRow& row) {
  return {row.user_id, row.problem_id, std::to_string(row.step), std::string(to_string(row.measure)),
          format_distance(row, row.min_dist)};
}

}  // namespace

void write_decision_table(std::ostream& out, const std::vector<DecisionTableRow>& rows) {
  out << kDecisionTableHeader << '\n';
  for (const auto& row : rows) out << csv::join(narrow_fields(row)) << '\n';
}

void write_decision_table_wide(std::ostream& out, const std::vector<DecisionTableRow>& rows,
                               const std::vector<KernelKind>& kernels) {
  out << kDecisionTableHeader;
  for (auto k : kernels) out << ",dist_" << to_string(k);
  out << '\n';
  for (const auto& row : rows) {
    auto fields = narrow_fields(row);
    for (std::size_t k = 0; k < kernels.size(); ++k) {
      fields.push_back(row.valid && k < row.per_kernel.size() ? fmt::format("{}", row.per_kernel[k]) : "NA");
    }
    out << csv::join(fields) << '\n';
  }
}

std::vector<DecisionTableRow> read_decision_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("decision table is empty");
  const auto header = csv::split(line);
  const auto expected = csv::split(kDecisionTableHeader);
  if (header.size() < expected.size() || !std::equal(expected.begin(), expected.end(), header.begin())) {
    throw InputError(fmt::format("decision table header mismatch: '{}'", line));
  }
  const std::size_t extra = header.size() - expected.size();
  std::vector<DecisionTableRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != header.size()) {
      throw InputError(fmt::format("decision table line {}: expected {} fields, got {}", line_no, header.size(),
                                   f.size()));
    }
    DecisionTableRow row;
    row.user_id = f[0];
    row.problem_id = f[1];
    try {
      row.step = std::stoi(f[2]);
      row.measure = parse_measure_kind(f[3]);
      if (f[4] == "NA") {
        row.valid = false;
        row.min_dist = std::nan("");
      } else {
        row.min_dist = std::stod(f[4]);
      }
      for (std::size_t k = 0; k < extra; ++k) {
        const auto& v = f[expected.size() + k];
        row.per_kernel.push_back(v == "NA" ? std::nan("") : std::stod(v));
      }
    } catch (const InputError&) {
      throw;
    } catch (const std::exception&) {
      throw InputError(fmt::format("decision table line {}: malformed number", line_no));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------

ParetoCounts pareto_counts(const std::vector<DecisionTableRow>& rows, double threshold) {
  using CellKey = std::tuple<std::string, std::string, UQMeasureKind>;
  using GroupKey = std::pair<std::string, UQMeasureKind>;
  std::map<CellKey, RationalCount> cells;
  std::map<GroupKey, RationalCount> players, problems;
  for (const auto& row : rows) {
    if (!row.valid) continue;
    const bool rational = row.min_dist < threshold;
    for (RationalCount* c : {&cells[{row.user_id, row.problem_id, row.measure}],
                             &players[{row.user_id, row.measure}], &problems[{row.problem_id, row.measure}]}) {
      c->total += 1;
      c->rational += rational ? 1 : 0;
    }
  }
  ParetoCounts out;
  for (const auto& [k, c] : cells) out.cells.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), c});
  for (const auto& [k, c] : players) out.by_player.push_back({k.first, k.second, c});
  for (const auto& [k, c] : problems) out.by_problem.push_back({k.first, k.second, c});
  return out;
}

std::vector<int> runs_of_true(const std::vector<bool>& flags) {
  std::vector<int> runs;
  int current = 0;
  for (bool f : flags) {
    if (f) {
      ++current;
    } else if (current > 0) {
      runs.push_back(current);
      current = 0;
    }
  }
  if (current > 0) runs.push_back(current);
  return runs;
}

RunLengths run_lengths(const std::vector<DecisionTableRow>& rows, double threshold) {
  using SeqKey = std::tuple<std::string, std::string, UQMeasureKind>;
  // step -> rational flag; invalid rows break runs.
  std::map<SeqKey, std::map<int, bool>> sequences;
  for (const auto& row : rows) {
    sequences[{row.user_id, row.problem_id, row.measure}][row.step] = row.valid && row.min_dist < threshold;
  }
  RunLengths out;
  std::map<std::pair<std::string, UQMeasureKind>, std::vector<int>> players, problems;
  for (const auto& [key, steps] : sequences) {
    std::vector<bool> flags;
    int previous = -1;
    for (const auto& [step, rational] : steps) {
      if (previous >= 0 && step != previous + 1) flags.push_back(false);
      flags.push_back(rational);
      previous = step;
    }
    RunSequence seq{std::get<0>(key), std::get<1>(key), std::get<2>(key), runs_of_true(flags)};
    auto& p = players[{seq.user_id, seq.measure}];
    auto& q = problems[{seq.problem_id, seq.measure}];
    p.insert(p.end(), seq.runs.begin(), seq.runs.end());
    q.insert(q.end(), seq.runs.begin(), seq.runs.end());
    out.sequences.push_back(std::move(seq));
  }
  for (auto& [k, v] : players) out.by_player.push_back({k.first, k.second, std::move(v)});
  for (auto& [k, v] : problems) out.by_problem.push_back({k.first, k.second, std::move(v)});
  return out;
}

ACRRecord acr(const Trace& trace, int step) {
  if (step < 2 || step > static_cast<int>(trace.steps.size())) {
    throw InputError(fmt::format("ACR step {} outside [2, {}]", step, trace.steps.size()));
  }
  const auto outcomes = trace.outcomes(static_cast<std::size_t>(step - 1));
  return {trace.player_id, trace.problem_id, step, mean(outcomes)};
}

std::vector<ACRComparison> step3_report(const std::vector<DecisionTableRow>& rows, const std::vector<Trace>& traces,
                                        UQMeasureKind measure, double threshold) {
  std::map<std::pair<std::string, std::string>, const Trace*> by_key;
  for (const auto& t : traces) by_key.emplace(std::make_pair(t.player_id, t.problem_id), &t);

  std::map<std::string, ACRComparison> per_problem;
  for (const auto& row : rows) {
    if (!row.valid || row.measure != measure) continue;
    const auto it = by_key.find({row.user_id, row.problem_id});
    if (it == by_key.end()) {
      throw InputError(fmt::format("no trace for {}/{}", row.user_id, row.problem_id));
    }
    auto& cmp = per_problem[row.problem_id];
    cmp.problem_id = row.problem_id;
    const double value = acr(*it->second, row.step).acr;
    (row.min_dist < threshold ? cmp.pareto : cmp.not_pareto).push_back(value);
  }

  std::vector<ACRComparison> out;
  for (const auto& p : list_problems()) {
    const auto it = per_problem.find(p.id);
    if (it == per_problem.end()) continue;
    out.push_back(std::move(it->second));
    per_problem.erase(it);
  }
  for (auto& [id, cmp] : per_problem) out.push_back(std::move(cmp));
  for (auto& cmp : out) {
    if (!cmp.pareto.empty() && !cmp.not_pareto.empty()) cmp.test = mann_whitney_u(cmp.pareto, cmp.not_pareto);
  }
  return out;
}

}  // namespace plab
