#include "plab/testbed.hpp"

#include "plab/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

// Definitions, domains and optima follow the Virtual Library of Simulation
// Experiments (Surjanovic & Bingham) optimization test functions, d = 2.

namespace plab {

namespace {

constexpr double kPi = std::numbers::pi;

Box box(double lo1, double hi1, double lo2, double hi2) {
  return {make_point({lo1, lo2}), make_point({hi1, hi2})};
}

double ackley(const Point& x) {
  constexpr double a = 20.0, b = 0.2, c = 2.0 * kPi;
  const double d = static_cast<double>(x.size());
  double sq = 0.0, cs = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sq += x(i) * x(i);
    cs += std::cos(c * x(i));
  }
  return -a * std::exp(-b * std::sqrt(sq / d)) - std::exp(cs / d) + a + std::numbers::e;
}

double beale(const Point& x) {
  const double x1 = x(0), x2 = x(1);
  const double t1 = 1.5 - x1 + x1 * x2;
  const double t2 = 2.25 - x1 + x1 * x2 * x2;
  const double t3 = 2.625 - x1 + x1 * x2 * x2 * x2;
  return t1 * t1 + t2 * t2 + t3 * t3;
}

double branin(const Point& x) {
  constexpr double a = 1.0, r = 6.0, s = 10.0;
  const double b = 5.1 / (4.0 * kPi * kPi), c = 5.0 / kPi, t = 1.0 / (8.0 * kPi);
  const double x1 = x(0), x2 = x(1);
  const double q = x2 - b * x1 * x1 + c * x1 - r;
  return a * q * q + s * (1.0 - t) * std::cos(x1) + s;
}

double bukin6(const Point& x) {
  const double x1 = x(0), x2 = x(1);
  return 100.0 * std::sqrt(std::abs(x2 - 0.01 * x1 * x1)) + 0.01 * std::abs(x1 + 10.0);
}

double goldpr(const Point& x) {
  const double x1 = x(0), x2 = x(1);
  const double s1 = x1 + x2 + 1.0;
  const double f1 = 1.0 + s1 * s1 * (19.0 - 14.0 * x1 + 3.0 * x1 * x1 - 14.0 * x2 + 6.0 * x1 * x2 + 3.0 * x2 * x2);
  const double s2 = 2.0 * x1 - 3.0 * x2;
  const double f2 =
      30.0 + s2 * s2 * (18.0 - 32.0 * x1 + 12.0 * x1 * x1 + 48.0 * x2 - 36.0 * x1 * x2 + 27.0 * x2 * x2);
  return f1 * f2;
}

double griewank(const Point& x) {
  double sum = 0.0, prod = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sum += x(i) * x(i) / 4000.0;
    prod *= std::cos(x(i) / std::sqrt(static_cast<double>(i + 1)));
  }
  return sum - prod + 1.0;
}

double levy(const Point& x) {
  const Eigen::Index d = x.size();
  auto w = [&](Eigen::Index i) { return 1.0 + (x(i) - 1.0) / 4.0; };
  const double s0 = std::sin(kPi * w(0));
  double total = s0 * s0;
  for (Eigen::Index i = 0; i + 1 < d; ++i) {
    const double wi = w(i);
    const double s = std::sin(kPi * wi + 1.0);
    total += (wi - 1.0) * (wi - 1.0) * (1.0 + 10.0 * s * s);
  }
  const double wd = w(d - 1);
  const double sd = std::sin(2.0 * kPi * wd);
  return total + (wd - 1.0) * (wd - 1.0) * (1.0 + sd * sd);
}

double rastr(const Point& x) {
  double total = 10.0 * static_cast<double>(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) total += x(i) * x(i) - 10.0 * std::cos(2.0 * kPi * x(i));
  return total;
}

double schwef(const Point& x) {
  double total = 418.9829 * static_cast<double>(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) total -= x(i) * std::sin(std::sqrt(std::abs(x(i))));
  return total;
}

double stytang(const Point& x) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x(i);
    total += v * v * v * v - 16.0 * v * v + 5.0 * v;
  }
  return 0.5 * total;
}

std::vector<TestProblem> make_catalog() {
  constexpr double kStyTangArg = -2.903534027771178;
  std::vector<TestProblem> c;
  c.push_back({"ackley", "Ackley", box(-32.768, 32.768, -32.768, 32.768), ackley, 0.0, {make_point({0, 0})}});
  c.push_back({"beale", "Beale", box(-4.5, 4.5, -4.5, 4.5), beale, 0.0, {make_point({3, 0.5})}});
  c.push_back({"branin", "Branin-Hoo", box(-5, 10, 0, 15), branin, 0.39788735772973816,
               {make_point({-kPi, 12.275}), make_point({kPi, 2.275}), make_point({9.42478, 2.475})}});
  c.push_back({"bukin6", "Bukin N.6", box(-15, -5, -3, 3), bukin6, 0.0, {make_point({-10, 1})}});
  c.push_back({"goldpr", "Goldstein-Price", box(-2, 2, -2, 2), goldpr, 3.0, {make_point({0, -1})}});
  c.push_back({"griewank", "Griewank", box(-600, 600, -600, 600), griewank, 0.0, {make_point({0, 0})}});
  c.push_back({"levy", "Levy", box(-10, 10, -10, 10), levy, 0.0, {make_point({1, 1})}});
  c.push_back({"rastr", "Rastrigin", box(-5.12, 5.12, -5.12, 5.12), rastr, 0.0, {make_point({0, 0})}});
  c.push_back({"schwef", "Schwefel", box(-500, 500, -500, 500), schwef, 0.0,
               {make_point({420.9687, 420.9687})}});
  // The library quotes -39.16599 d; the value below is f at the stated minimizer to full precision.
  c.push_back({"stytang", "Styblinski-Tang", box(-5, 5, -5, 5), stytang, -78.33233140754282,
               {make_point({kStyTangArg, kStyTangArg})}});
  return c;
}

}  // namespace

const std::vector<TestProblem>& list_problems() {
  static const std::vector<TestProblem> catalog = make_catalog();
  return catalog;
}

const TestProblem& find_problem(std::string_view id) {
  for (const auto& p : list_problems()) {
    if (p.id == id) return p;
  }
  throw InputError(fmt::format("unknown problem '{}'", id));
}

double evaluate_problem(std::string_view id, const Point& x) {
  const auto& problem = find_problem(id);
  if (!problem.domain.contains(x)) {
    throw InputError(fmt::format("point outside the {} domain", id));
  }
  return problem.score(x);
}

}  // namespace plab
