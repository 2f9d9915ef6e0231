#include "plab/stats.hpp"

#include "plab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

namespace plab {

std::string_view to_string(MWUMethod method) {
  return method == MWUMethod::Exact ? "exact" : "normal-approx";
}

namespace {

// counts[u] = number of rank arrangements of sizes (m, n) giving U = u.
std::vector<double> u_distribution(std::size_t m, std::size_t n) {
  // table[i][j] holds the distribution for sizes (i, j), built for j <= n.
  std::vector<std::vector<std::vector<double>>> table(m + 1, std::vector<std::vector<double>>(n + 1));
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      auto& cur = table[i][j];
      cur.assign(i * j + 1, 0.0);
      if (i == 0 || j == 0) {
        cur[0] = 1.0;
        continue;
      }
      // Largest observation belongs to a (contributes j) or to b.
      const auto& from_a = table[i - 1][j];
      const auto& from_b = table[i][j - 1];
      for (std::size_t u = 0; u < from_a.size(); ++u) cur[u + j] += from_a[u];
      for (std::size_t u = 0; u < from_b.size(); ++u) cur[u] += from_b[u];
    }
  }
  return table[m][n];
}

}  // namespace

MWUResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("Mann-Whitney U needs two nonempty samples");
  const std::size_t na = a.size(), nb = b.size(), total = na + nb;

  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(total);
  for (double v : a) pooled.emplace_back(v, 0);
  for (double v : b) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

  double rank_sum_a = 0.0;
  double tie_term = 0.0;  // sum of t^3 - t over tie groups
  bool ties = false;
  for (std::size_t i = 0; i < total;) {
    std::size_t j = i;
    while (j < total && pooled[j].first == pooled[i].first) ++j;
    const double t = static_cast<double>(j - i);
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    if (j - i > 1) {
      ties = true;
      tie_term += t * t * t - t;
    }
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].second == 0) rank_sum_a += midrank;
    }
    i = j;
  }

  MWUResult r;
  r.n_a = na;
  r.n_b = nb;
  r.u = rank_sum_a - 0.5 * static_cast<double>(na * (na + 1));
  const double mean_u = 0.5 * static_cast<double>(na * nb);

  if (na * nb <= kExactProductLimit && !ties) {
    r.method = MWUMethod::Exact;
    const auto counts = u_distribution(na, nb);
    const double all = std::accumulate(counts.begin(), counts.end(), 0.0);
    const auto u = static_cast<std::size_t>(std::llround(r.u));
    double lower = 0.0, upper = 0.0;
    for (std::size_t k = 0; k <= u; ++k) lower += counts[k];
    for (std::size_t k = u; k < counts.size(); ++k) upper += counts[k];
    r.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    return r;
  }

  r.method = MWUMethod::NormalApprox;
  const double n = static_cast<double>(total);
  const double var =
      static_cast<double>(na * nb) / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) {
    r.p_value = 1.0;
    return r;
  }
  const double z = std::max(0.0, std::abs(r.u - mean_u) - 0.5) / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(z / std::numbers::sqrt2));
  return r;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace plab
