#pragma once

#include "plab/analysis.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace plab {

struct ReportOptions {
  double threshold = 1e-4;
  UQMeasureKind acr_measure = UQMeasureKind::Distance;
  int percent_buckets = 10;
};

/// Counts of values per equal-width bucket over [0, 100]; 100 lands in the last bucket.
std::vector<int> percent_histogram(std::span<const double> percents, int buckets);

/// Writes every report file into out_dir (created if needed) and returns the paths written:
///   counts_by_cell.csv, counts_by_player.csv, counts_by_problem.csv,
///   run_lengths.csv, hist_players_by_percent.csv, hist_problems_by_percent.csv,
///   hist_run_lengths_by_problem.csv, hist_run_lengths_by_player.csv,
///   distance_series.csv, acr_by_decision.csv, acr_comparison.csv, acr_comparison.json
std::vector<std::filesystem::path> write_reports(const std::vector<DecisionTableRow>& rows,
                                                 const std::vector<Trace>& traces,
                                                 const std::filesystem::path& out_dir, const ReportOptions& options);

}  // namespace plab
