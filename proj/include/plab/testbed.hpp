#pragma once

#include "plab/types.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace plab {

/// A 2-D minimization benchmark played as a maximization game: score = -f(x).
struct TestProblem {
  std::string id;
  std::string name;
  Box domain;
  std::function<double(const Point&)> f;  // minimization form
  double minimum = 0.0;                   // f at the minimizers below
  PointList minimizers;

  [[nodiscard]] double score(const Point& x) const { return -f(x); }
};

/// The ten problems, in catalog order.
const std::vector<TestProblem>& list_problems();

/// Throws InputError for an unknown id.
const TestProblem& find_problem(std::string_view id);

/// -f(x). Throws InputError when x lies outside the problem's domain.
double evaluate_problem(std::string_view id, const Point& x);

}  // namespace plab
