#include "oracles.hpp"
#include "plab/uncertainty.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace plab;

namespace {

double z_oracle(const std::vector<Point>& prefix, const Point& x) {
  double s = 0.0;
  for (const auto& p : prefix) {
    const double d2 = (x - p).squaredNorm();
    if (d2 == 0.0) return 0.0;
    s += std::exp(-d2) / d2;
  }
  return 2.0 / M_PI * std::atan(1.0 / s);
}

}  // namespace

TEST_CASE("measure names") {
  for (auto m : kAllMeasures) CHECK(parse_measure_kind(to_string(m)) == m);
  CHECK_THROWS(parse_measure_kind("variance"));
}

TEST_CASE("incumbent is the best outcome") {
  const std::vector<double> y{-3.0, 2.5, 1.0};
  CHECK(Incumbent::of(y).best == 2.5);
  CHECK_THROWS(Incumbent::of(std::vector<double>{}));
}

TEST_CASE("improvement") {
  const Dataset data{{make_point({0.0}), make_point({1.0}), make_point({2.0})}, {0.0, 1.0, 0.5}, {}};
  const KernelSpec s{KernelKind::SquaredExponential, 1.0, 1.0};
  const auto gp = GPPosterior::condition(s, data, {0.0, false});
  const Incumbent inc = Incumbent::of(data.y);
  SUBCASE("vanishes at the incumbent") { CHECK(std::abs(improvement(gp, make_point({1.0}), inc)) < 1e-5); }
  SUBCASE("matches the dense oracle at the midpoint") {
    const oracle::DenseGP dense(s, data.x, data.y, gp.noise() + gp.jitter(), false);
    CHECK(improvement(gp, make_point({0.5}), inc) == doctest::Approx(dense.mean(make_point({0.5})) - 1.0));
  }
  SUBCASE("negative far away") { CHECK(improvement(gp, make_point({50.0}), inc) < 0.0); }
}

TEST_CASE("sigma") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset data;
  for (int i = 0; i < 6; ++i) {
    data.x.push_back(make_point({u(rng), u(rng)}));
    data.y.push_back(u(rng));
  }
  const KernelSpec s{KernelKind::Matern52, 0.5, 1.3};
  const auto gp = GPPosterior::condition(s, data, {0.0, true});
  CHECK(uq_sigma(gp, data.x[2]) < 1e-4);
  const oracle::DenseGP dense(s, data.x, data.y, gp.noise() + gp.jitter(), true);
  for (int i = 0; i < 10; ++i) {
    const Point x = make_point({u(rng), u(rng)});
    CHECK(std::abs(uq_sigma(gp, x) - std::sqrt(dense.variance(x))) < 1e-8);
  }
  CHECK(uq_sigma(GPPosterior::prior(s, 2), make_point({0.1, 0.2})) == doctest::Approx(std::sqrt(1.3)));
}

TEST_CASE("entropy closed form for a single prior point") {
  const KernelSpec s{KernelKind::SquaredExponential, 1.0, 1.0};
  const PointList prefix{make_point({0.0, 0.0})};
  const auto gp = GPPosterior::condition(s, {prefix, {0.0}, {}}, {0.0, false});
  const double eps = gp.noise() + gp.jitter();
  for (int i = 1; i <= 100; ++i) {
    const double r = 0.05 * i;
    const Point x = make_point({r / std::sqrt(2.0), r / std::sqrt(2.0)});
    const double expected = 0.5 * std::log((1.0 + eps) * (1.0 + eps) - std::exp(-r * r));
    CHECK(std::abs(uq_entropy(gp, prefix, x) - expected) < 1e-9);
  }
}

TEST_CASE("entropy field against dense determinants") {
  const KernelSpec s{KernelKind::Matern32, 0.3, 1.0};
  const PointList prefix{make_point({0.2, 0.2}), make_point({0.8, 0.3}), make_point({0.4, 0.9})};
  const auto gp = GPPosterior::condition(s, {prefix, {1.0, 2.0, 0.0}, {}});
  const EntropyField field(gp, prefix);
  const double at_sample = field(prefix[1]);
  double best = -1e300;
  Point best_x;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const Point x = make_point({0.05 * i, 0.05 * j});
      const double h = field(x);
      CHECK(h >= at_sample - 1e-12);
      CHECK(h == doctest::Approx(uq_entropy(gp, prefix, x)).epsilon(1e-10));
      if (h > best) {
        best = h;
        best_x = x;
      }
    }
  }
  // Exhaustive oracle: dense determinant of the augmented covariance.
  const double eps = gp.noise() + gp.jitter();
  double oracle_best = -1e300;
  Point oracle_x;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const Point x = make_point({0.05 * i, 0.05 * j});
      PointList aug = prefix;
      aug.push_back(x);
      Eigen::MatrixXd k(4, 4);
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) k(a, b) = oracle::kernel(s.kind, (aug[a] - aug[b]).norm(), 0.3, 1.0);
      }
      k.diagonal().array() += eps;
      const double h = 0.5 * std::log(k.determinant());
      CHECK(field(x) == doctest::Approx(h).epsilon(1e-9));
      if (h > oracle_best) {
        oracle_best = h;
        oracle_x = x;
      }
    }
  }
  CHECK((best_x - oracle_x).norm() == 0.0);
}

TEST_CASE("distance measure") {
  const PointList origin{make_point({0.0, 0.0})};
  CHECK(uq_distance(origin, make_point({0.0, 0.0})) == 0.0);
  CHECK(std::abs(uq_distance(origin, make_point({1.0, 0.0})) - 0.77558298567141500) < 1e-9);
  CHECK(uq_distance(origin, make_point({10.0, 0.0})) > 0.999);
  double previous = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double z = uq_distance(origin, make_point({0.0, 0.04 * i}));
    CHECK(z > previous);
    CHECK(z < 1.0);
    previous = z;
  }

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  PointList prefix;
  for (int i = 0; i < 7; ++i) prefix.push_back(make_point({u(rng), u(rng)}));
  for (const auto& p : prefix) CHECK(uq_distance(prefix, p) == 0.0);
  for (int i = 0; i < 200; ++i) {
    const Point x = make_point({u(rng), u(rng)});
    const double z = uq_distance(prefix, x);
    CHECK(z >= 0.0);
    CHECK(z < 1.0);
    CHECK(z == doctest::Approx(z_oracle(prefix, x)).epsilon(1e-12));
  }
}

TEST_CASE("evaluate_uncertainty dispatches per measure") {
  const KernelSpec s{KernelKind::SquaredExponential, 0.5, 1.0};
  const PointList prefix{make_point({0.1, 0.1}), make_point({0.9, 0.5})};
  const auto gp = GPPosterior::condition(s, {prefix, {0.0, 1.0}, {}});
  const PointList xs{make_point({0.5, 0.5}), prefix[0]};
  const auto sig = evaluate_uncertainty(gp, prefix, UQMeasureKind::Sigma, xs);
  const auto ent = evaluate_uncertainty(gp, prefix, UQMeasureKind::Entropy, xs);
  const auto dis = evaluate_uncertainty(gp, prefix, UQMeasureKind::Distance, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(sig[i] == uq_sigma(gp, xs[i]));
    CHECK(ent[i] == doctest::Approx(uq_entropy(gp, prefix, xs[i])).epsilon(1e-12));
    CHECK(dis[i] == uq_distance(prefix, xs[i]));
  }
  CHECK(dis[1] == 0.0);
}
