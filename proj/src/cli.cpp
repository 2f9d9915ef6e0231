#include "plab/cli.hpp"

#include "plab/agents.hpp"
#include "plab/analysis.hpp"
#include "plab/error.hpp"
#include "plab/http_api.hpp"
#include "plab/report.hpp"
#include "plab/service.hpp"
#include "plab/testbed.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <httplib.h>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

namespace plab {

namespace {

struct CommonOptions {
  std::vector<std::string> problems;
  std::uint64_t seed = 0;
  int budget = 20;
  int n_init = 3;
  std::string grid = "30x30";
  double threshold = 1e-4;
  bool normalize = true;
  std::vector<std::string> kernels;
  std::vector<std::string> measures;
  std::string in;
  std::string out;
  unsigned threads = 0;
};

std::vector<int> parse_grid(const std::string& text) {
  std::vector<int> counts;
  std::string part;
  for (char c : text + 'x') {
    if (c == 'x' || c == 'X' || c == ',') {
      try {
        std::size_t used = 0;
        counts.push_back(std::stoi(part, &used));
        if (used != part.size()) throw std::invalid_argument(part);
      } catch (const std::exception&) {
        throw InputError(fmt::format("bad grid '{}', expected e.g. 30x30", text));
      }
      part.clear();
    } else {
      part += c;
    }
  }
  if (counts.size() != 2 || counts[0] < 2 || counts[1] < 2) throw InputError(fmt::format("bad grid '{}'", text));
  return counts;
}

std::vector<const TestProblem*> selected_problems(const std::vector<std::string>& ids) {
  std::vector<const TestProblem*> out;
  if (ids.empty()) {
    for (const auto& p : list_problems()) out.push_back(&p);
  } else {
    for (const auto& id : ids) out.push_back(&find_problem(id));
  }
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<Trace> read_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open trace log '{}'", path));
  auto result = read_traces(in);
  for (const auto& d : result.diagnostics) std::cerr << "warning: " << path << ": " << d << '\n';
  return std::move(result.traces);
}

// Runs fn(i) for i in [0, n) on a small pool; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------

int cmd_serve(const CommonOptions& opts, int port, const std::string& host, const std::string& log_path) {
  SessionService service(log_path, opts.budget);
  for (const auto& d : service.replay_diagnostics()) std::cerr << "warning: " << log_path << ": " << d << '\n';

  httplib::Server server;
  install_routes(server, service);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
  } else if (!server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw std::runtime_error(fmt::format("cannot bind {}:{}", host, port));

  std::jthread stopper([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  std::cout << "listening on " << host << ":" << bound << std::endl;
  server.listen_after_bind();
  if (stopper.joinable()) {
    // Woken by a signal normally; if listen ended on its own, release the waiter.
    pthread_kill(stopper.native_handle(), SIGTERM);
  }
  return 0;
}

int cmd_simulate(const CommonOptions& opts, const std::vector<std::string>& policy_specs, int agents) {
  if (agents < 1) throw InputError("--agents must be positive");
  if (opts.budget <= opts.n_init) throw InputError("--budget must exceed --n-init");
  std::vector<AgentPolicy> policies;
  for (const auto& spec : policy_specs) policies.push_back(parse_policy(spec));
  if (policies.empty()) policies.push_back(parse_policy("ei"));
  const auto problems = selected_problems(opts.problems);

  struct Job {
    std::size_t policy;
    int agent;
    const TestProblem* problem;
    std::string player;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < policies.size(); ++p) {
    const std::string prefix = policies.size() > 1 ? fmt::format("p{}-{}", p, to_string(policies[p].kind))
                                                   : std::string(to_string(policies[p].kind));
    for (int a = 0; a < agents; ++a) {
      for (const auto* problem : problems) jobs.push_back({p, a, problem, fmt::format("{}-{:02}", prefix, a)});
    }
  }

  AgentRunOptions run;
  run.budget = opts.budget;
  run.n_init = opts.n_init;
  run.grid = parse_grid(opts.grid);
  std::vector<Trace> traces(jobs.size());
  parallel_for(jobs.size(), opts.threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    AgentRunOptions o = run;
    o.player_id = job.player;
    o.session_id = fmt::format("sim-{}", job.player);
    // One stream per (policy, agent, problem), independent of job order.
    const std::uint64_t seed =
        splitmix64(opts.seed ^ splitmix64((job.policy << 40) ^ (static_cast<std::uint64_t>(job.agent) << 20) ^
                                          std::hash<std::string>{}(job.problem->id)));
    traces[i] = run_agent(*job.problem, policies[job.policy], o, seed);
  });

  if (opts.out.empty() || opts.out == "-") {
    write_traces(std::cout, traces);
  } else {
    std::ofstream out(opts.out);
    if (!out) throw InputError(fmt::format("cannot write '{}'", opts.out));
    write_traces(out, traces);
  }
  std::cerr << fmt::format("simulated {} traces\n", traces.size());
  return 0;
}

AnalysisConfig analysis_config(const CommonOptions& opts) {
  AnalysisConfig config;
  if (!opts.kernels.empty()) {
    config.kernels.clear();
    for (const auto& k : opts.kernels) config.kernels.push_back(parse_kernel_kind(k));
  }
  if (!opts.measures.empty()) {
    config.measures.clear();
    for (const auto& m : opts.measures) config.measures.push_back(parse_measure_kind(m));
  }
  config.grid = parse_grid(opts.grid);
  config.n_init = opts.n_init;
  config.distance.normalize = opts.normalize;
  config.distance.threshold = opts.threshold;
  config.threads = opts.threads;
  return config;
}

int cmd_analyze(const CommonOptions& opts, bool wide) {
  if (opts.in.empty()) throw InputError("--in is required");
  auto traces = read_log(opts.in);
  if (traces.empty()) throw InputError(fmt::format("trace log '{}' holds no traces", opts.in));
  const AnalysisConfig config = analysis_config(opts);

  std::vector<Trace> usable;
  for (auto& t : traces) {
    if (t.steps.size() < static_cast<std::size_t>(config.n_init) + 1) {
      std::cerr << fmt::format("warning: skipping {}/{}: {} steps\n", t.player_id, t.problem_id, t.steps.size());
      continue;
    }
    if (!opts.problems.empty() &&
        std::find(opts.problems.begin(), opts.problems.end(), t.problem_id) == opts.problems.end()) {
      continue;
    }
    usable.push_back(std::move(t));
  }
  if (usable.empty()) throw InputError("no trace long enough to analyze");

  const auto rows = analyze_traces(usable, config);
  for (const auto& r : rows) {
    if (!r.valid) std::cerr << fmt::format("warning: {}/{} step {}: {}\n", r.user_id, r.problem_id, r.step, r.diagnostic);
  }
  auto write = [&](std::ostream& out) {
    if (wide) {
      write_decision_table_wide(out, rows, config.kernels);
    } else {
      write_decision_table(out, rows);
    }
  };
  if (opts.out.empty() || opts.out == "-") {
    write(std::cout);
  } else {
    std::ofstream out(opts.out);
    if (!out) throw InputError(fmt::format("cannot write '{}'", opts.out));
    write(out);
  }
  return 0;
}

int cmd_report(const CommonOptions& opts, const std::string& log_path, const std::string& acr_measure) {
  if (opts.in.empty()) throw InputError("--in (decision table) is required");
  if (log_path.empty()) throw InputError("--log is required");
  if (opts.out.empty()) throw InputError("--out directory is required");
  std::ifstream table(opts.in);
  if (!table) throw InputError(fmt::format("cannot open decision table '{}'", opts.in));
  const auto rows = read_decision_table(table);
  const auto traces = read_log(log_path);

  ReportOptions report;
  report.threshold = opts.threshold;
  report.acr_measure = parse_measure_kind(acr_measure);
  for (const auto& path : write_reports(rows, traces, opts.out, report)) std::cout << path.string() << '\n';
  return 0;
}

void add_common(CLI::App* cmd, CommonOptions& o, bool analysis_flags) {
  cmd->add_option("--problems", o.problems, "Problem ids (default: all ten)")->delimiter(',');
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_option("--budget", o.budget, "Clicks per problem")->capture_default_str();
  cmd->add_option("--n-init", o.n_init, "Decisions before the first analyzed one")->capture_default_str();
  cmd->add_option("--grid", o.grid, "Evaluation grid, e.g. 30x30")->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads (0: all cores)")->capture_default_str();
  cmd->add_option("--in", o.in, "Input path");
  cmd->add_option("--out", o.out, "Output path");
  if (analysis_flags) {
    cmd->add_option("--threshold", o.threshold, "Pareto distance threshold")->capture_default_str();
    cmd->add_option("--normalize", o.normalize, "Min-max normalize objectives (true/false)")->capture_default_str();
    cmd->add_option("--kernels", o.kernels, "Kernel subset: se,exp,powexp,matern32,matern52")->delimiter(',');
    cmd->add_option("--measures", o.measures, "Measure subset: sigma,entropy,distance")->delimiter(',');
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Pareto-rationality lab: game service, agents and decision analysis"};
  app.set_config("--config", "", "TOML/INI config file; command-line flags take precedence");
  app.require_subcommand(1);

  CommonOptions opts;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string log_path = "traces.ndjson";
  std::vector<std::string> policies;
  int agents = 1;
  bool wide = false;
  std::string acr_measure = "distance";

  auto* serve = app.add_subcommand("serve", "Run the game session service");
  add_common(serve, opts, false);
  serve->add_option("--port", port, "TCP port (0: any free port)")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--log", log_path, "Trace log path")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Run synthetic agents and write a trace log");
  add_common(simulate, opts, false);
  simulate->add_option("--policy", policies, "Policy spec, repeatable, e.g. ei, ucb:beta=1, random");
  simulate->add_option("--agents", agents, "Agents per policy")->capture_default_str();

  auto* analyze = app.add_subcommand("analyze", "Classify every decision in a trace log");
  add_common(analyze, opts, true);
  analyze->add_flag("--wide", wide, "Add one distance column per kernel");

  auto* report = app.add_subcommand("report", "Aggregate a decision table into report files");
  add_common(report, opts, true);
  report->add_option("--log", log_path, "Trace log path")->capture_default_str();
  report->add_option("--acr-measure", acr_measure, "Measure used for the ACR comparison")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*serve) return cmd_serve(opts, port, host, log_path);
    if (*simulate) return cmd_simulate(opts, policies, agents);
    if (*analyze) return cmd_analyze(opts, wide);
    if (*report) return cmd_report(opts, log_path, acr_measure);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace plab
