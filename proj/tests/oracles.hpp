#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. They share no code with the library beyond the plain data types.

#include "plab/kernel_gp.hpp"
#include "plab/pareto.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

inline double kernel(plab::KernelKind kind, double r, double lengthscale, double amplitude, double power = 1.5) {
  const double t = r / lengthscale;
  double c = 0.0;
  switch (kind) {
    case plab::KernelKind::SquaredExponential: c = std::exp(-t * t / 2.0); break;
    case plab::KernelKind::Exponential: c = std::exp(-t); break;
    case plab::KernelKind::PowerExponential: c = std::exp(-std::pow(t, power)); break;
    case plab::KernelKind::Matern32: c = (1.0 + std::sqrt(3.0) * t) * std::exp(-std::sqrt(3.0) * t); break;
    case plab::KernelKind::Matern52:
      c = (1.0 + std::sqrt(5.0) * t + 5.0 * t * t / 3.0) * std::exp(-std::sqrt(5.0) * t);
      break;
  }
  return amplitude * c;
}

/// GP posterior by explicit inversion of K + eps I, with the same target
/// standardization contract as the library (population sd, 1 when degenerate).
struct DenseGP {
  plab::KernelSpec spec;
  std::vector<Eigen::VectorXd> x;
  Eigen::VectorXd y_std;
  Eigen::MatrixXd k_inv;
  double y_mean = 0.0;
  double y_scale = 1.0;

  DenseGP(const plab::KernelSpec& s, const std::vector<Eigen::VectorXd>& xs, const std::vector<double>& ys, double eps,
          bool standardize)
      : spec(s), x(xs) {
    const auto n = static_cast<Eigen::Index>(xs.size());
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
    if (standardize) {
      y_mean = y.sum() / static_cast<double>(n);
      double ss = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) ss += (y(i) - y_mean) * (y(i) - y_mean);
      const double sd = std::sqrt(ss / static_cast<double>(n));
      y_scale = sd > 1e-12 * std::max(1.0, std::abs(y_mean)) ? sd : 1.0;
    }
    y_std = (y.array() - y_mean) / y_scale;
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) k(i, j) = cov(xs[i], xs[j]);
    }
    k.diagonal().array() += eps;
    k_inv = k.inverse();
  }

  [[nodiscard]] double cov(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return kernel(spec.kind, (a - b).norm(), spec.lengthscale, spec.amplitude, spec.power);
  }

  [[nodiscard]] Eigen::VectorXd kvec(const Eigen::VectorXd& q) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = cov(x[i], q);
    return v;
  }

  [[nodiscard]] double mean(const Eigen::VectorXd& q) const { return y_mean + y_scale * kvec(q).dot(k_inv * y_std); }

  [[nodiscard]] double variance(const Eigen::VectorXd& q) const {
    const Eigen::VectorXd kq = kvec(q);
    const double latent = spec.amplitude - kq.dot(k_inv * kq);
    return y_scale * y_scale * std::clamp(latent, 0.0, spec.amplitude);
  }

  [[nodiscard]] double log_marginal_likelihood() const {
    const auto n = static_cast<double>(x.size());
    const double log_det = std::log(k_inv.inverse().determinant());
    return -0.5 * y_std.dot(k_inv * y_std) - 0.5 * log_det - 0.5 * n * std::log(2.0 * M_PI);
  }
};

inline bool dominates(const plab::ObjectivePair& a, const plab::ObjectivePair& b) {
  return a.improvement >= b.improvement && a.uncertainty >= b.uncertainty &&
         (a.improvement > b.improvement || a.uncertainty > b.uncertainty);
}

/// O(m^2) pairwise dominance.
inline std::vector<std::size_t> frontier_indices(const std::vector<plab::ObjectivePair>& pairs) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pairs.size() && !dominated; ++j) dominated = j != i && dominates(pairs[j], pairs[i]);
    if (!dominated) out.push_back(i);
  }
  return out;
}

/// Distance of `query` to the brute-force frontier of pairs + {query}.
inline double frontier_distance(const plab::ObjectivePair& query, std::vector<plab::ObjectivePair> pairs,
                                bool normalize) {
  pairs.push_back(query);
  const std::size_t q = pairs.size() - 1;
  const auto front = frontier_indices(pairs);
  if (std::find(front.begin(), front.end(), q) != front.end()) return 0.0;
  double lo1 = pairs[0].improvement, hi1 = lo1, lo2 = pairs[0].uncertainty, hi2 = lo2;
  for (const auto& p : pairs) {
    lo1 = std::min(lo1, p.improvement);
    hi1 = std::max(hi1, p.improvement);
    lo2 = std::min(lo2, p.uncertainty);
    hi2 = std::max(hi2, p.uncertainty);
  }
  const double w1 = normalize && hi1 > lo1 ? hi1 - lo1 : 1.0;
  const double w2 = normalize && hi2 > lo2 ? hi2 - lo2 : 1.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i : front) {
    const double d1 = (pairs[i].improvement - query.improvement) / w1;
    const double d2 = (pairs[i].uncertainty - query.uncertainty) / w2;
    best = std::min(best, d1 * d1 + d2 * d2);
  }
  return best;
}

/// Two-sided Mann-Whitney p-value by enumerating every assignment of the
/// pooled (mid)ranks to sample a. P = min(1, 2 min(P(U <= u), P(U >= u))).
inline double mwu_enumerated_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size();
  auto rank_of = [&](double v) {
    double less = 0, equal = 0;
    for (double w : pooled) {
      less += w < v;
      equal += w == v;
    }
    return less + (equal + 1.0) / 2.0;
  };
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) ranks[i] = rank_of(pooled[i]);
  const double na = static_cast<double>(a.size());
  const double offset = na * (na + 1.0) / 2.0;
  double observed = -offset;
  for (std::size_t i = 0; i < a.size(); ++i) observed += ranks[i];

  double total = 0, le = 0, ge = 0;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(a.size()), true);
  std::sort(pick.begin(), pick.end());
  do {
    double u = -offset;
    for (std::size_t i = 0; i < n; ++i) {
      if (pick[i]) u += ranks[i];
    }
    total += 1;
    le += u <= observed + 1e-9;
    ge += u >= observed - 1e-9;
  } while (std::next_permutation(pick.begin(), pick.end()));
  return std::min(1.0, 2.0 * std::min(le, ge) / total);
}

}  // namespace oracle
