#include "plab/report.hpp"

#include "plab/csv.hpp"
#include "plab/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace plab {

std::string format_mean_sd(std::span<const double> values) {
  if (values.empty()) return "n/a";
  if (values.size() == 1) return fmt::format("{:.3f} (n/a)", values.front());
  return fmt::format("{:.3f} ({:.3f})", mean(values), sample_sd(values));
}

std::string format_p_value(const std::optional<MWUResult>& test) {
  if (!test) return "n/a";
  const double p = test->p_value;
  if (p < 0.001) return "<0.001*";
  return fmt::format("{:.3f}{}", p, p < 0.05 ? "*" : "");
}

AcrComparisonRow format_acr_comparison_row(const ACRComparison& c) {
  return {c.problem_id, format_mean_sd(c.pareto), format_mean_sd(c.not_pareto), format_p_value(c.test)};
}

void write_acr_comparison_csv(std::ostream& out, const std::vector<AcrComparisonRow>& rows) {
  out << kAcrComparisonHeader << '\n';
  for (const auto& r : rows) out << csv::join({r.test_function, r.pareto, r.not_pareto, r.p_value}) << '\n';
}

std::vector<AcrComparisonRow> read_acr_comparison_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv::split(line) != csv::split(kAcrComparisonHeader)) {
    throw InputError("ACR table header mismatch");
  }
  std::vector<AcrComparisonRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 4) throw InputError(fmt::format("ACR table row has {} fields: '{}'", f.size(), line));
    rows.push_back({f[0], f[1], f[2], f[3]});
  }
  return rows;
}

std::string acr_comparison_json(const std::vector<ACRComparison>& comparisons) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& c : comparisons) {
    nlohmann::ordered_json j;
    j["test_function"] = c.problem_id;
    j["pareto"] = {{"n", c.pareto.size()}, {"mean", mean(c.pareto)}, {"sd", sample_sd(c.pareto)}};
    j["not_pareto"] = {{"n", c.not_pareto.size()}, {"mean", mean(c.not_pareto)}, {"sd", sample_sd(c.not_pareto)}};
    if (c.test) {
      j["mann_whitney"] = {{"u", c.test->u}, {"p_value", c.test->p_value}, {"method", to_string(c.test->method)}};
    } else {
      j["mann_whitney"] = nullptr;
    }
    const auto formatted = format_acr_comparison_row(c);
    j["formatted"] = {formatted.test_function, formatted.pareto, formatted.not_pareto, formatted.p_value};
    rows.push_back(std::move(j));
  }
  return rows.dump(2);
}

std::vector<int> percent_histogram(std::span<const double> percents, int buckets) {
  if (buckets < 1) throw InputError("histogram needs at least one bucket");
  std::vector<int> counts(static_cast<std::size_t>(buckets), 0);
  for (double p : percents) {
    const double width = 100.0 / buckets;
    auto b = static_cast<int>(std::floor(p / width));
    b = std::clamp(b, 0, buckets - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  return counts;
}

namespace {

class ReportWriter {
 public:
  explicit ReportWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::ofstream open(const std::string& name) {
    auto path = dir_ / name;
    std::ofstream out(path);
    if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
    written_.push_back(std::move(path));
    return out;
  }

  std::vector<std::filesystem::path> written() && { return std::move(written_); }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
};

std::string bucket_label(int b, int buckets) {
  const double w = 100.0 / buckets;
  return fmt::format("{:g},{:g}", b * w, (b + 1) * w);
}

}  // namespace

std::vector<std::filesystem::path> write_reports(const std::vector<DecisionTableRow>& rows,
                                                 const std::vector<Trace>& traces,
                                                 const std::filesystem::path& out_dir, const ReportOptions& options) {
  if (rows.empty()) throw InputError("no decision-table rows to report on");
  std::filesystem::create_directories(out_dir);
  ReportWriter w(out_dir);
  const auto counts = pareto_counts(rows, options.threshold);
  const auto runs = run_lengths(rows, options.threshold);

  {
    auto out = w.open("counts_by_cell.csv");
    out << "user_id,problem_id,uncertainty_measure,rational,total,percent\n";
    for (const auto& c : counts.cells) {
      out << csv::join({c.user_id, c.problem_id, std::string(to_string(c.measure)), std::to_string(c.count.rational),
                        std::to_string(c.count.total), fmt::format("{:.4f}", c.count.percent())})
          << '\n';
    }
  }
  for (const auto& [name, groups, column] :
       {std::tuple{"counts_by_player.csv", &counts.by_player, "user_id"},
        std::tuple{"counts_by_problem.csv", &counts.by_problem, "problem_id"}}) {
    auto out = w.open(name);
    out << column << ",uncertainty_measure,rational,total,percent\n";
    for (const auto& g : *groups) {
      out << csv::join({g.group, std::string(to_string(g.measure)), std::to_string(g.count.rational),
                        std::to_string(g.count.total), fmt::format("{:.4f}", g.count.percent())})
          << '\n';
    }
  }
  {
    auto out = w.open("run_lengths.csv");
    out << "user_id,problem_id,uncertainty_measure,run_index,length\n";
    for (const auto& s : runs.sequences) {
      for (std::size_t i = 0; i < s.runs.size(); ++i) {
        out << csv::join({s.user_id, s.problem_id, std::string(to_string(s.measure)), std::to_string(i + 1),
                          std::to_string(s.runs[i])})
            << '\n';
      }
    }
  }

  // Percentage histograms: players per bucket for each problem, problems per bucket for each player.
  const int buckets = options.percent_buckets;
  {
    std::map<std::pair<std::string, UQMeasureKind>, std::vector<double>> per_problem, per_player;
    for (const auto& c : counts.cells) {
      per_problem[{c.problem_id, c.measure}].push_back(c.count.percent());
      per_player[{c.user_id, c.measure}].push_back(c.count.percent());
    }
    for (const auto& [name, source, column, counted] :
         {std::tuple{"hist_players_by_percent.csv", &per_problem, "problem_id", "players"},
          std::tuple{"hist_problems_by_percent.csv", &per_player, "user_id", "problems"}}) {
      auto out = w.open(name);
      out << column << ",uncertainty_measure,percent_lo,percent_hi," << counted << '\n';
      for (const auto& [key, values] : *source) {
        const auto h = percent_histogram(values, buckets);
        for (int b = 0; b < buckets; ++b) {
          out << csv::escape(key.first) << ',' << to_string(key.second) << ',' << bucket_label(b, buckets) << ','
              << h[static_cast<std::size_t>(b)] << '\n';
        }
      }
    }
  }
  for (const auto& [name, groups, column] :
       {std::tuple{"hist_run_lengths_by_problem.csv", &runs.by_problem, "problem_id"},
        std::tuple{"hist_run_lengths_by_player.csv", &runs.by_player, "user_id"}}) {
    auto out = w.open(name);
    out << column << ",uncertainty_measure,run_length,count\n";
    for (const auto& g : *groups) {
      std::map<int, int> h;
      for (int len : g.lengths) ++h[len];
      for (const auto& [len, n] : h) {
        out << csv::escape(g.group) << ',' << to_string(g.measure) << ',' << len << ',' << n << '\n';
      }
    }
  }

  // Per-step distances, one column per measure present.
  {
    std::set<UQMeasureKind> measures;
    std::map<std::tuple<std::string, std::string, int>, std::map<UQMeasureKind, const DecisionTableRow*>> series;
    std::vector<std::tuple<std::string, std::string, int>> order;
    for (const auto& r : rows) {
      measures.insert(r.measure);
      const auto key = std::make_tuple(r.user_id, r.problem_id, r.step);
      auto [it, inserted] = series.try_emplace(key);
      if (inserted) order.push_back(key);
      it->second[r.measure] = &r;
    }
    auto out = w.open("distance_series.csv");
    out << "user_id,problem_id,step";
    for (auto m : measures) out << ",min_dist_" << to_string(m);
    out << '\n';
    for (const auto& key : order) {
      std::vector<std::string> f{std::get<0>(key), std::get<1>(key), std::to_string(std::get<2>(key))};
      const auto& cells = series.at(key);
      for (auto m : measures) {
        const auto it = cells.find(m);
        f.push_back(it != cells.end() && it->second->valid ? fmt::format("{}", it->second->min_dist) : "NA");
      }
      out << csv::join(f) << '\n';
    }
  }

  {
    std::map<std::pair<std::string, std::string>, const Trace*> by_key;
    for (const auto& t : traces) by_key.emplace(std::make_pair(t.player_id, t.problem_id), &t);
    auto out = w.open("acr_by_decision.csv");
    out << "user_id,problem_id,step,uncertainty_measure,acr,pareto_rational\n";
    for (const auto& r : rows) {
      if (!r.valid || r.measure != options.acr_measure) continue;
      const auto it = by_key.find({r.user_id, r.problem_id});
      if (it == by_key.end()) throw InputError(fmt::format("no trace for {}/{}", r.user_id, r.problem_id));
      out << csv::join({r.user_id, r.problem_id, std::to_string(r.step), std::string(to_string(r.measure)),
                        fmt::format("{}", acr(*it->second, r.step).acr), r.min_dist < options.threshold ? "1" : "0"})
          << '\n';
    }
  }

  const auto comparisons = step3_report(rows, traces, options.acr_measure, options.threshold);
  {
    std::vector<AcrComparisonRow> table;
    for (const auto& c : comparisons) table.push_back(format_acr_comparison_row(c));
    auto out = w.open("acr_comparison.csv");
    write_acr_comparison_csv(out, table);
  }
  {
    auto out = w.open("acr_comparison.json");
    out << acr_comparison_json(comparisons) << '\n';
  }
  return std::move(w).written();
}

}  // namespace plab
