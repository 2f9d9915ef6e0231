#pragma once

#include <Eigen/Dense>

#include <vector>

namespace plab {

using Point = Eigen::VectorXd;
using PointList = std::vector<Point>;

inline Point make_point(std::initializer_list<double> coords) {
  Point p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) p(i++) = c;
  return p;
}

/// Axis-aligned box domain.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  [[nodiscard]] int dim() const { return static_cast<int>(lower.size()); }
  [[nodiscard]] bool contains(const Point& x) const;
  [[nodiscard]] double diagonal() const { return (upper - lower).norm(); }
  /// Throws InputError unless lower < upper in every dimension.
  void validate() const;
};

}  // namespace plab
