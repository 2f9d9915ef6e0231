#include "fixtures.hpp"
#include "plab/agents.hpp"
#include "plab/analysis.hpp"
#include "plab/error.hpp"
#include "plab/report.hpp"
#include "plab/testbed.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace plab;

namespace {

Trace agent_trace(const char* policy, const char* problem, std::uint64_t seed, int budget = 20) {
  AgentRunOptions opts;
  opts.budget = budget;
  return run_agent(find_problem(problem), parse_policy(policy), opts, seed);
}

std::string table_text(const std::vector<DecisionTableRow>& rows) {
  std::ostringstream out;
  write_decision_table(out, rows);
  return out.str();
}

DecisionTableRow row(const std::string& user, const std::string& problem, int step, double d,
                     UQMeasureKind m = UQMeasureKind::Sigma) {
  return {user, problem, step, m, d, {}, true, {}};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("a 20-step trace yields 51 rows in step-then-measure order") {
  const Trace t = agent_trace("random", "ackley", 1);
  const auto rows = analyze_trace(t, {});
  REQUIRE(rows.size() == 51);
  CHECK(rows.front().step == 4);
  CHECK(rows.back().step == 20);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].measure == kAllMeasures[i % 3]);
    CHECK(rows[i].per_kernel.size() == 5);
    CHECK(rows[i].valid);
    CHECK(rows[i].min_dist >= 0.0);
  }
  const std::string text = table_text(rows);
  CHECK(text.substr(0, text.find('\n')) == "user_id,problem_id,step,uncertainty_measure,min_dist_from_Pareto_frontier");
  CHECK(table_text(analyze_trace(t, {})) == text);
}

TEST_CASE("short traces are rejected") {
  const Trace t = agent_trace("random", "ackley", 1, 3);
  CHECK_THROWS_AS(analyze_trace(t, {}), InputError);
}

TEST_CASE("parallel analysis equals sequential analysis") {
  std::vector<Trace> traces;
  for (std::uint64_t s = 0; s < 3; ++s) traces.push_back(agent_trace("random", "levy", s, 7));
  AnalysisConfig one;
  one.threads = 1;
  AnalysisConfig four;
  four.threads = 4;
  CHECK(table_text(analyze_traces(traces, one)) == table_text(analyze_traces(traces, four)));
}

TEST_CASE("EI agent decisions are Pareto-rational under sigma") {
  const Trace t = agent_trace("ei", "branin", 3);
  AnalysisConfig config;
  config.measures = {UQMeasureKind::Sigma};
  const auto rows = analyze_trace(t, config);
  int rational = 0;
  for (const auto& r : rows) rational += r.min_dist < 1e-4;
  CHECK(rational >= 0.9 * static_cast<double>(rows.size()));
}

TEST_CASE("decision table round trip") {
  std::vector<DecisionTableRow> rows{row("a,b", "branin", 4, 0.125), row("c", "levy", 5, 1e-17)};
  rows[1].valid = false;
  rows[1].min_dist = std::nan("");
  rows[0].per_kernel = {0.125, 0.5, 1, 2, 3};
  rows[1].per_kernel = {0, 0, 0, 0, 0};
  std::ostringstream out;
  write_decision_table_wide(out, rows, {kAllKernels.begin(), kAllKernels.end()});
  std::istringstream in(out.str());
  const auto back = read_decision_table(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].user_id == "a,b");
  CHECK(back[0].min_dist == 0.125);
  CHECK(back[0].per_kernel == rows[0].per_kernel);
  CHECK_FALSE(back[1].valid);

  std::istringstream bad("user,problem\nx,y\n");
  CHECK_THROWS_AS(read_decision_table(bad), InputError);
}

TEST_CASE("rational counts") {
  SUBCASE("all zero distances") {
    const auto c = pareto_counts({row("a", "p", 4, 0.0), row("a", "p", 5, 0.0)}, 1e-4);
    CHECK(c.cells.at(0).count.percent() == 100.0);
  }
  SUBCASE("all unit distances") {
    const auto c = pareto_counts({row("a", "p", 4, 1.0), row("b", "p", 4, 1.0)}, 1e-4);
    for (const auto& g : c.by_problem) CHECK(g.count.percent() == 0.0);
  }
  SUBCASE("two of six") {
    std::vector<DecisionTableRow> rows;
    for (int s = 4; s < 10; ++s) rows.push_back(row("a", "p", s, s < 6 ? 0.0 : 0.5));
    const auto c = pareto_counts(rows, 1e-4);
    CHECK(c.by_player.at(0).count.rational == 2);
    CHECK(c.by_player.at(0).count.percent() == doctest::Approx(33.333333333));
  }
  SUBCASE("threshold is strict") {
    const auto c = pareto_counts({row("a", "p", 4, 1e-4)}, 1e-4);
    CHECK(c.cells.at(0).count.rational == 0);
  }
}

TEST_CASE("run lengths") {
  CHECK(runs_of_true({true, true, false, true}) == std::vector<int>{2, 1});
  CHECK(runs_of_true(std::vector<bool>(17, true)) == std::vector<int>{17});
  CHECK(runs_of_true({false, false}).empty());

  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<bool> flags(1 + trial % 25);
    for (auto&& f : flags) f = coin(rng);
    std::vector<int> expected;
    for (std::size_t i = 0; i < flags.size();) {
      if (!flags[i]) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < flags.size() && flags[j]) ++j;
      expected.push_back(static_cast<int>(j - i));
      i = j;
    }
    CHECK(runs_of_true(flags) == expected);
  }

  // Steps 4,5 rational, 6 missing, 7 rational: the gap splits the run.
  const auto r = run_lengths({row("a", "p", 4, 0), row("a", "p", 5, 0), row("a", "p", 7, 0), row("b", "p", 4, 1)}, 1e-4);
  REQUIRE(r.sequences.size() == 2);
  CHECK(r.sequences[0].runs == std::vector<int>{2, 1});
  CHECK(r.sequences[1].runs.empty());
}

TEST_CASE("average cumulative reward") {
  Trace t;
  t.player_id = "a";
  t.problem_id = "branin";
  t.steps = {{make_point({0, 0}), 2.0, ""}, {make_point({0, 0}), 4.0, ""}, {make_point({0, 0}), 9.0, ""}};
  CHECK(acr(t, 3).acr == 3.0);
  CHECK(acr(t, 2).acr == 2.0);
  CHECK_THROWS_AS(acr(t, 1), InputError);
  CHECK_THROWS_AS(acr(t, 4), InputError);

  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    Trace r;
    for (int i = 0; i < 20; ++i) r.steps.push_back({make_point({0, 0}), g(rng), ""});
    double sum = 0.0;
    for (int step = 2; step <= 20; ++step) {
      sum += r.steps[static_cast<std::size_t>(step - 2)].score;
      CHECK(acr(r, step).acr == doctest::Approx(sum / (step - 1)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ACR comparison on the stytang fixture") {
  const auto f = fixture::stytang_acr();
  const auto cmp = step3_report(f.rows, f.traces, UQMeasureKind::Distance, 1e-4);
  REQUIRE(cmp.size() == 1);
  const auto line = format_acr_comparison_row(cmp[0]);
  CHECK(line.test_function == "stytang");
  CHECK(line.pareto == "157.231 (100.050)");
  CHECK(line.not_pareto == "319.434 (227.555)");
  CHECK(line.p_value == "<0.001*");
  REQUIRE(cmp[0].test);
  CHECK(cmp[0].test->p_value < 0.05);
}

TEST_CASE("ACR comparison CSV re-emits the fixture verbatim") {
  const std::string path = std::string(PLAB_FIXTURE_DIR) + "/acr_comparison_stytang.csv";
  const std::string original = slurp(path);
  std::istringstream in(original);
  const auto rows = read_acr_comparison_csv(in);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].pareto == "157.231 (100.050)");
  std::ostringstream out;
  write_acr_comparison_csv(out, rows);
  CHECK(out.str() == original);
}

TEST_CASE("all-rational comparison leaves the other class empty") {
  fixture::AcrFixture f;
  for (int i = 0; i < 5; ++i) fixture::add_decision(f, "levy", i, true);
  const auto cmp = step3_report(f.rows, f.traces, UQMeasureKind::Distance, 1e-4);
  REQUIRE(cmp.size() == 1);
  CHECK_FALSE(cmp[0].test.has_value());
  const auto line = format_acr_comparison_row(cmp[0]);
  CHECK(line.not_pareto == "n/a");
  CHECK(line.p_value == "n/a");
}

TEST_CASE("value formatting") {
  CHECK(format_mean_sd(std::vector<double>{1.0, 3.0}) == "2.000 (1.414)");
  CHECK(format_p_value(MWUResult{0, 0.0301, 3, 3, MWUMethod::Exact}) == "0.030*");
  CHECK(format_p_value(MWUResult{0, 0.409, 3, 3, MWUMethod::Exact}) == "0.409");
  CHECK(format_p_value(MWUResult{0, 0.0004, 3, 3, MWUMethod::Exact}) == "<0.001*");
}

TEST_CASE("report files") {
  const auto dir = std::filesystem::temp_directory_path() / "plab_report_test";
  std::filesystem::remove_all(dir);
  const auto f = fixture::stytang_acr();
  const auto written = write_reports(f.rows, f.traces, dir, {});
  CHECK(written.size() == 12);
  for (const auto& p : written) CHECK(std::filesystem::exists(p));
  const std::string comparison = slurp(dir / "acr_comparison.csv");
  CHECK(comparison.find("stytang,157.231 (100.050),319.434 (227.555),<0.001*") != std::string::npos);

  // All rational: every player lands in the top percentage bucket.
  fixture::AcrFixture all;
  for (int i = 0; i < 4; ++i) fixture::add_decision(all, "levy", 1.0, true);
  write_reports(all.rows, all.traces, dir, {});
  const std::string hist = slurp(dir / "hist_players_by_percent.csv");
  CHECK(hist.find("levy,distance,90,100,4") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("percent histogram") {
  const std::vector<double> p{0.0, 9.99, 10.0, 55.0, 100.0, 100.0};
  const auto h = percent_histogram(p, 10);
  REQUIRE(h.size() == 10);
  CHECK(h[0] == 2);
  CHECK(h[1] == 1);
  CHECK(h[5] == 1);
  CHECK(h[9] == 2);
}
