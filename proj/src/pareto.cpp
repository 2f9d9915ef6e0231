#include "plab/pareto.hpp"

#include "plab/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace plab {

std::vector<ObjectivePair> ParetoFrontier::frontier() const {
  std::vector<ObjectivePair> out;
  out.reserve(members.size());
  for (auto i : members) out.push_back(pairs[i]);
  return out;
}

bool ParetoFrontier::contains(std::size_t index) const {
  return std::binary_search(members.begin(), members.end(), index);
}

ParetoFrontier pareto_frontier(std::vector<ObjectivePair> pairs) {
  if (pairs.empty()) throw InputError("frontier of an empty pair list");
  ParetoFrontier result;
  result.range = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : pairs) {
    if (!std::isfinite(p.improvement) || !std::isfinite(p.uncertainty)) {
      throw InputError("objective pairs must be finite");
    }
    result.range.improvement_min = std::min(result.range.improvement_min, p.improvement);
    result.range.improvement_max = std::max(result.range.improvement_max, p.improvement);
    result.range.uncertainty_min = std::min(result.range.uncertainty_min, p.uncertainty);
    result.range.uncertainty_max = std::max(result.range.uncertainty_max, p.uncertainty);
  }

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pairs[a].improvement != pairs[b].improvement) return pairs[a].improvement > pairs[b].improvement;
    return pairs[a].uncertainty > pairs[b].uncertainty;
  });

  // Sweep groups of equal improvement in decreasing order. Within a group
  // only the pairs at the group's best uncertainty survive, and only if no
  // strictly better improvement already reached that uncertainty.
  double best_u = -std::numeric_limits<double>::infinity();
  std::size_t g = 0;
  while (g < order.size()) {
    const double zeta = pairs[order[g]].improvement;
    const double group_u = pairs[order[g]].uncertainty;
    std::size_t end = g;
    while (end < order.size() && pairs[order[end]].improvement == zeta) ++end;
    if (group_u > best_u) {
      for (std::size_t i = g; i < end && pairs[order[i]].uncertainty == group_u; ++i) {
        result.members.push_back(order[i]);
      }
      best_u = group_u;
    }
    g = end;
  }
  std::sort(result.members.begin(), result.members.end());
  result.pairs = std::move(pairs);
  return result;
}

RationalityVerdict frontier_distance(const ObjectivePair& query, const ParetoFrontier& frontier,
                                     DistanceOptions options) {
  if (!std::isfinite(query.improvement) || !std::isfinite(query.uncertainty)) {
    throw InputError("query pair must be finite");
  }
  RationalityVerdict verdict{0.0, true, options.threshold};
  bool dominated = false;
  for (auto i : frontier.members) {
    if (strongly_dominates(frontier.pairs[i], query)) {
      dominated = true;
      break;
    }
  }
  if (!dominated) return verdict;

  // A dominated query cannot dominate any frontier member, so the augmented
  // frontier is the original one.
  double zeta_range = 1.0, u_range = 1.0;
  if (options.normalize) {
    const auto& r = frontier.range;
    const double zr = std::max(r.improvement_max, query.improvement) - std::min(r.improvement_min, query.improvement);
    const double ur = std::max(r.uncertainty_max, query.uncertainty) - std::min(r.uncertainty_min, query.uncertainty);
    if (zr > 0.0) zeta_range = zr;
    if (ur > 0.0) u_range = ur;
  }
  double best = std::numeric_limits<double>::infinity();
  for (auto i : frontier.members) {
    const double dz = (frontier.pairs[i].improvement - query.improvement) / zeta_range;
    const double du = (frontier.pairs[i].uncertainty - query.uncertainty) / u_range;
    best = std::min(best, dz * dz + du * du);
  }
  verdict.distance = best;
  verdict.is_rational = best < options.threshold;
  return verdict;
}

RationalityVerdict frontier_distance(const ObjectivePair& query, std::span<const ObjectivePair> pairs,
                                     DistanceOptions options) {
  return frontier_distance(query, pareto_frontier({pairs.begin(), pairs.end()}), options);
}

PointList build_grid(const Box& domain, std::span<const int> counts) {
  domain.validate();
  const int d = domain.dim();
  if (static_cast<int>(counts.size()) != d) {
    throw InputError(fmt::format("grid needs {} per-dimension counts, got {}", d, counts.size()));
  }
  std::size_t total = 1;
  for (int c : counts) {
    if (c < 2) throw InputError("grid resolution must be at least 2 per dimension");
    total *= static_cast<std::size_t>(c);
  }
  PointList grid;
  grid.reserve(total);
  std::vector<int> index(static_cast<std::size_t>(d), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Point p(d);
    for (int k = 0; k < d; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const double t = static_cast<double>(index[kk]) / static_cast<double>(counts[kk] - 1);
      // Exact endpoints rather than lower + 1.0 * (upper - lower).
      p(k) = index[kk] == counts[kk] - 1 ? domain.upper(k) : domain.lower(k) + t * (domain.upper(k) - domain.lower(k));
    }
    grid.push_back(std::move(p));
    for (int k = d - 1; k >= 0; --k) {
      const auto kk = static_cast<std::size_t>(k);
      if (++index[kk] < counts[kk]) break;
      index[kk] = 0;
    }
  }
  return grid;
}

std::vector<ObjectivePair> evaluate_objectives(const GPPosterior& gp, const PointList& grid, UQMeasureKind measure,
                                               Incumbent incumbent, const PointList& prefix) {
  if (grid.empty()) throw InputError("objective evaluation over an empty grid");
  const auto pred = gp.predict(grid);
  std::vector<double> u;
  if (measure == UQMeasureKind::Sigma) {
    u.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) u[i] = std::sqrt(pred[i].variance);
  } else {
    u = evaluate_uncertainty(gp, prefix, measure, grid);
  }
  std::vector<ObjectivePair> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = {pred[i].mean - incumbent.best, u[i]};
  return out;
}

DecisionClassification classify_decision(std::span<const GPPosterior> gps, const PointList& grid,
                                         UQMeasureKind measure, Incumbent incumbent, const PointList& prefix,
                                         const Point& x_next, DistanceOptions options) {
  if (gps.empty()) throw InputError("classification needs at least one GP");
  DecisionClassification result;
  result.min_distance = std::numeric_limits<double>::infinity();
  for (const auto& gp : gps) {
    const auto frontier = pareto_frontier(evaluate_objectives(gp, grid, measure, incumbent, prefix));
    const auto image = evaluate_objectives(gp, PointList{x_next}, measure, incumbent, prefix).front();
    const double d = frontier_distance(image, frontier, options).distance;
    result.per_kernel.push_back(d);
    result.min_distance = std::min(result.min_distance, d);
  }
  result.is_rational = result.min_distance < options.threshold;
  return result;
}

}  // namespace plab
