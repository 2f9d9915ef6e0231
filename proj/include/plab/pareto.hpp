#pragma once

#include "plab/kernel_gp.hpp"
#include "plab/uncertainty.hpp"

#include <span>
#include <vector>

namespace plab {

/// (zeta, u): improvement and uncertainty of one candidate decision. Both maximized.
struct ObjectivePair {
  double improvement = 0.0;
  double uncertainty = 0.0;

  friend bool operator==(const ObjectivePair&, const ObjectivePair&) = default;
};

/// a >= b in both objectives and > in at least one.
constexpr bool strongly_dominates(const ObjectivePair& a, const ObjectivePair& b) {
  return a.improvement >= b.improvement && a.uncertainty >= b.uncertainty &&
         (a.improvement > b.improvement || a.uncertainty > b.uncertainty);
}

struct ObjectiveRange {
  double improvement_min = 0.0, improvement_max = 0.0;
  double uncertainty_min = 0.0, uncertainty_max = 0.0;
};

/// Non-dominated subset of a pair list. Pairs tied in both objectives are
/// mutually non-dominating, so duplicates of a kept pair are all kept.
struct ParetoFrontier {
  std::vector<ObjectivePair> pairs;
  std::vector<std::size_t> members;  // ascending indices into pairs
  ObjectiveRange range;

  [[nodiscard]] std::vector<ObjectivePair> frontier() const;
  [[nodiscard]] bool contains(std::size_t index) const;
};

ParetoFrontier pareto_frontier(std::vector<ObjectivePair> pairs);

struct DistanceOptions {
  bool normalize = true;
  double threshold = 1e-4;
};

struct RationalityVerdict {
  double distance = 0.0;
  bool is_rational = true;
  double threshold = 1e-4;
};

/// Squared Euclidean distance from `query` to the frontier of pairs + {query}:
/// zero when the query is non-dominated there. With normalization each
/// objective is min-max scaled over pairs + {query} first.
RationalityVerdict frontier_distance(const ObjectivePair& query, const ParetoFrontier& frontier,
                                     DistanceOptions options = {});
RationalityVerdict frontier_distance(const ObjectivePair& query, std::span<const ObjectivePair> pairs,
                                     DistanceOptions options = {});

/// Full lattice over the box with both endpoints per dimension. The first
/// dimension varies slowest.
PointList build_grid(const Box& domain, std::span<const int> counts);

std::vector<ObjectivePair> evaluate_objectives(const GPPosterior& gp, const PointList& grid, UQMeasureKind measure,
                                               Incumbent incumbent, const PointList& prefix);

struct DecisionClassification {
  std::vector<double> per_kernel;  // aligned with the GP set
  double min_distance = 0.0;
  bool is_rational = true;
};

/// Maps x_next through each GP, measures its distance to that GP's grid
/// frontier and keeps the smallest.
DecisionClassification classify_decision(std::span<const GPPosterior> gps, const PointList& grid,
                                         UQMeasureKind measure, Incumbent incumbent, const PointList& prefix,
                                         const Point& x_next, DistanceOptions options = {});

}  // namespace plab
