#pragma once

#include "plab/kernel_gp.hpp"
#include "plab/pareto.hpp"
#include "plab/stats.hpp"
#include "plab/trace.hpp"
#include "plab/uncertainty.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace plab {

struct AnalysisConfig {
  std::vector<KernelKind> kernels{kAllKernels.begin(), kAllKernels.end()};
  std::vector<UQMeasureKind> measures{kAllMeasures.begin(), kAllMeasures.end()};
  std::vector<int> grid{30, 30};
  int n_init = 3;  // decisions before the first analyzed one
  DistanceOptions distance;
  FitOptions fit;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct DecisionTableRow {
  std::string user_id;
  std::string problem_id;
  int step = 0;  // 1-based index of the analyzed decision
  UQMeasureKind measure = UQMeasureKind::Sigma;
  double min_dist = 0.0;
  std::vector<double> per_kernel;  // aligned with AnalysisConfig::kernels
  bool valid = true;               // false when a GP fit failed at this step
  std::string diagnostic;
};

/// For n = n_init .. |trace|-1: fits one GP per kernel on the first n
/// decisions and classifies decision n+1 under every measure. Rows come out
/// ordered by step, then measure in config order.
std::vector<DecisionTableRow> analyze_trace(const Trace& trace, const AnalysisConfig& config);

/// analyze_trace over many traces, parallel across traces, output in input order.
std::vector<DecisionTableRow> analyze_traces(const std::vector<Trace>& traces, const AnalysisConfig& config);

inline constexpr const char* kDecisionTableHeader =
    "user_id,problem_id,step,uncertainty_measure,min_dist_from_Pareto_frontier";

/// Narrow table: exactly the five columns above. Invalid rows carry "NA".
void write_decision_table(std::ostream& out, const std::vector<DecisionTableRow>& rows);
/// Narrow columns followed by one dist_<kernel> column per kernel.
void write_decision_table_wide(std::ostream& out, const std::vector<DecisionTableRow>& rows,
                               const std::vector<KernelKind>& kernels);
/// Reads either variant. Throws InputError when the header does not match.
std::vector<DecisionTableRow> read_decision_table(std::istream& in);

// ---------------------------------------------------------------------------
// Aggregation

struct RationalCount {
  int rational = 0;
  int total = 0;
  [[nodiscard]] double percent() const { return total == 0 ? 0.0 : 100.0 * rational / total; }
};

struct CellCount {
  std::string user_id;
  std::string problem_id;
  UQMeasureKind measure;
  RationalCount count;
};

struct GroupCount {
  std::string group;  // player id or problem id
  UQMeasureKind measure;
  RationalCount count;
};

struct ParetoCounts {
  std::vector<CellCount> cells;  // per (player, problem, measure)
  std::vector<GroupCount> by_player;
  std::vector<GroupCount> by_problem;
};

/// Rows with min_dist < threshold are rational; invalid rows are skipped.
ParetoCounts pareto_counts(const std::vector<DecisionTableRow>& rows, double threshold);

struct RunSequence {
  std::string user_id;
  std::string problem_id;
  UQMeasureKind measure;
  std::vector<int> runs;  // maximal runs of consecutive rational steps, in order
};

struct RunLengthGroup {
  std::string group;
  UQMeasureKind measure;
  std::vector<int> lengths;
};

struct RunLengths {
  std::vector<RunSequence> sequences;
  std::vector<RunLengthGroup> by_player;
  std::vector<RunLengthGroup> by_problem;
};

/// Runs restart at every (player, problem) boundary, at step gaps and at
/// invalid rows.
RunLengths run_lengths(const std::vector<DecisionTableRow>& rows, double threshold);

/// Lengths of maximal runs of `true` in order.
std::vector<int> runs_of_true(const std::vector<bool>& flags);

struct ACRRecord {
  std::string user_id;
  std::string problem_id;
  int step = 0;
  double acr = 0.0;
};

/// Mean of the first step-1 outcomes. Requires 2 <= step <= |trace|.
ACRRecord acr(const Trace& trace, int step);

struct ACRComparison {
  std::string problem_id;
  std::vector<double> pareto;      // ACR values of rational decisions
  std::vector<double> not_pareto;  // ACR values of the rest
  std::optional<MWUResult> test;   // absent when a class is empty
};

/// Per problem, ACR of rational against non-rational decisions under one
/// measure. Problems appear in catalog order, unknown ids after them sorted.
std::vector<ACRComparison> step3_report(const std::vector<DecisionTableRow>& rows, const std::vector<Trace>& traces,
                                        UQMeasureKind measure, double threshold);

/// One formatted line of the ACR comparison table.
struct AcrComparisonRow {
  std::string test_function;
  std::string pareto;      // "mean (sd)"
  std::string not_pareto;  // "mean (sd)"
  std::string p_value;
};

inline constexpr const char* kAcrComparisonHeader =
    "test function,ACR Pareto mean (sd),ACR not-Pareto mean (sd),U Mann-Whitney test p-value";

AcrComparisonRow format_acr_comparison_row(const ACRComparison& comparison);
std::string format_mean_sd(std::span<const double> values);
std::string format_p_value(const std::optional<MWUResult>& test);

void write_acr_comparison_csv(std::ostream& out, const std::vector<AcrComparisonRow>& rows);
std::vector<AcrComparisonRow> read_acr_comparison_csv(std::istream& in);
std::string acr_comparison_json(const std::vector<ACRComparison>& comparisons);

}  // namespace plab
