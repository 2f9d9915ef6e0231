#include "oracles.hpp"
#include "plab/agents.hpp"
#include "plab/pareto.hpp"

#include <doctest.h>

#include <random>

using namespace plab;

namespace {

std::vector<ObjectivePair> random_pairs(std::mt19937_64& rng, std::size_t m, bool coarse) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> k(0, 9);
  std::vector<ObjectivePair> out(m);
  for (auto& p : out) p = coarse ? ObjectivePair{0.1 * k(rng), 0.1 * k(rng)} : ObjectivePair{u(rng), u(rng)};
  return out;
}

}  // namespace

TEST_CASE("frontier examples") {
  const auto f = pareto_frontier({{1, 1}, {0.5, 0.5}, {0, 2}});
  CHECK(f.members == std::vector<std::size_t>{0, 2});
  CHECK(f.frontier() == std::vector<ObjectivePair>{{1, 1}, {0, 2}});
  CHECK(f.contains(0));
  CHECK_FALSE(f.contains(1));

  CHECK(pareto_frontier({{3, -1}}).members == std::vector<std::size_t>{0});
  CHECK(pareto_frontier({{1, 1}, {1, 1}, {0, 0}}).members == std::vector<std::size_t>{0, 1});
  CHECK(pareto_frontier({{1, 0}, {1, 1}}).members == std::vector<std::size_t>{1});
  CHECK_THROWS(pareto_frontier({}));
  CHECK_THROWS(pareto_frontier({{std::nan(""), 0.0}}));
}

TEST_CASE("frontier matches brute force") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const auto pairs = random_pairs(rng, 1 + trial * 9, trial % 2 == 0);
    CHECK(pareto_frontier(pairs).members == oracle::frontier_indices(pairs));
  }
}

TEST_CASE("frontier distance examples") {
  const std::vector<ObjectivePair> one{{1, 1}};
  const auto off = DistanceOptions{false, 1e-4};
  const auto v = frontier_distance({0.5, 0.5}, one, off);
  CHECK(v.distance == doctest::Approx(0.5));
  CHECK_FALSE(v.is_rational);
  const auto on_front = frontier_distance({0.0, 2.0}, std::vector<ObjectivePair>{{1, 1}, {0.5, 0.5}, {0, 2}});
  CHECK(on_front.distance == 0.0);
  CHECK(on_front.is_rational);
  // Normalized over {(1,1), (0.5,0.5)}: both axes scale by 0.5.
  CHECK(frontier_distance({0.5, 0.5}, one).distance == doctest::Approx(2.0));
  // A tie with a frontier member is not dominated.
  CHECK(frontier_distance({1, 1}, one).distance == 0.0);
}

TEST_CASE("frontier distance matches brute force") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pairs = random_pairs(rng, 200, trial % 3 == 0);
    const ObjectivePair q = trial % 4 == 0 ? pairs[static_cast<std::size_t>(trial)] : ObjectivePair{u(rng), u(rng)};
    const auto front = pareto_frontier(pairs);
    for (bool normalize : {true, false}) {
      const DistanceOptions opts{normalize, 1e-4};
      const double expected = oracle::frontier_distance(q, pairs, normalize);
      CHECK(frontier_distance(q, front, opts).distance == expected);
      CHECK(frontier_distance(q, pairs, opts).distance == expected);
    }
  }
}

TEST_CASE("grid construction") {
  const Box box{make_point({-5.0, 0.0}), make_point({10.0, 15.0})};
  const std::vector<int> c30{30, 30};
  CHECK(build_grid(box, c30).size() == 900);
  const std::vector<int> c76{76, 26};
  const auto g = build_grid(box, c76);
  CHECK(g.size() == 1976);
  CHECK(g.front() == make_point({-5.0, 0.0}));
  CHECK(g.back() == make_point({10.0, 15.0}));
  CHECK(g[1] == make_point({-5.0, 0.6}));  // first dimension slowest
  const std::vector<int> two{2};
  const auto line = build_grid(Box{make_point({0.0}), make_point({1.0})}, two);
  REQUIRE(line.size() == 2);
  CHECK(line[0](0) == 0.0);
  CHECK(line[1](0) == 1.0);
  const std::vector<int> bad{1, 5};
  CHECK_THROWS(build_grid(box, bad));
  const std::vector<int> wrong_dim{5};
  CHECK_THROWS(build_grid(box, wrong_dim));
}

TEST_CASE("objective pairs") {
  const Dataset data{{make_point({0.0}), make_point({1.0}), make_point({2.0})}, {0.0, 1.0, 0.5}, {}};
  const KernelSpec s{KernelKind::SquaredExponential, 1.0, 1.0};
  const auto gp = GPPosterior::condition(s, data, {0.0, false});
  const Incumbent inc = Incumbent::of(data.y);
  SUBCASE("distance measure on the prefix is zero") {
    for (const auto& p : evaluate_objectives(gp, data.x, UQMeasureKind::Distance, inc, data.x)) {
      CHECK(p.uncertainty == 0.0);
    }
  }
  SUBCASE("composition of the dense oracle") {
    const oracle::DenseGP dense(s, data.x, data.y, gp.noise() + gp.jitter(), false);
    const PointList grid{make_point({-0.5}), make_point({0.5}), make_point({1.0}), make_point({3.0})};
    const auto pairs = evaluate_objectives(gp, grid, UQMeasureKind::Sigma, inc, data.x);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(pairs[i].improvement == doctest::Approx(dense.mean(grid[i]) - 1.0).epsilon(1e-10));
      CHECK(std::abs(pairs[i].uncertainty - std::sqrt(dense.variance(grid[i]))) < 1e-8);
    }
    CHECK(pairs[2].uncertainty <= 1e-4);
  }
}

TEST_CASE("grid argmax of either objective is rational") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Box box{make_point({0.0, 0.0}), make_point({1.0, 1.0})};
  const std::vector<int> counts{15, 15};
  const auto grid = build_grid(box, counts);
  for (int trial = 0; trial < 5; ++trial) {
    Dataset data;
    data.domain = box;
    for (int i = 0; i < 5; ++i) {
      data.x.push_back(make_point({u(rng), u(rng)}));
      data.y.push_back(std::sin(5 * data.x.back()(0)) + data.x.back()(1));
    }
    std::vector<GPPosterior> gps;
    for (auto k : kAllKernels) gps.push_back(fit_gp(data, k));
    const Incumbent inc = Incumbent::of(data.y);
    for (auto measure : kAllMeasures) {
      // The same argmax point must be rational under its own kernel; take the
      // first kernel's argmax of each objective with the library tie-break.
      const auto pairs = evaluate_objectives(gps[0], grid, measure, inc, data.x);
      std::vector<double> zeta, unc;
      for (const auto& p : pairs) {
        zeta.push_back(p.improvement);
        unc.push_back(p.uncertainty);
      }
      std::vector<Prediction> by_unc(pairs.size()), by_zeta(pairs.size());
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        by_unc[i] = {pairs[i].improvement, pairs[i].uncertainty};
        by_zeta[i] = {pairs[i].uncertainty, pairs[i].improvement};
      }
      const std::size_t a = argmax_with_ties(zeta, by_zeta);
      const std::size_t b = argmax_with_ties(unc, by_unc);
      const std::span<const GPPosterior> first(gps.data(), 1);
      CHECK(classify_decision(first, grid, measure, inc, data.x, grid[a]).min_distance == 0.0);
      CHECK(classify_decision(first, grid, measure, inc, data.x, grid[b]).min_distance == 0.0);
      // Minimum over kernels can only be smaller.
      CHECK(classify_decision(gps, grid, measure, inc, data.x, grid[a]).min_distance == 0.0);
    }
  }
}

TEST_CASE("classification is the minimum over kernels") {
  const Box box{make_point({0.0, 0.0}), make_point({1.0, 1.0})};
  const Dataset data{{make_point({0.1, 0.2}), make_point({0.7, 0.7}), make_point({0.3, 0.9})}, {0.2, 1.0, -0.4}, box};
  std::vector<GPPosterior> gps;
  for (auto k : kAllKernels) gps.push_back(fit_gp(data, k));
  const std::vector<int> counts{10, 10};
  const auto grid = build_grid(box, counts);
  const auto c = classify_decision(gps, grid, UQMeasureKind::Sigma, Incumbent::of(data.y), data.x,
                                   make_point({0.05, 0.05}));
  REQUIRE(c.per_kernel.size() == 5);
  CHECK(c.min_distance == *std::min_element(c.per_kernel.begin(), c.per_kernel.end()));
  CHECK(c.is_rational == (c.min_distance < 1e-4));
}
