#pragma once

#include <span>
#include <string_view>

namespace plab {

enum class MWUMethod { Exact, NormalApprox };

std::string_view to_string(MWUMethod method);

struct MWUResult {
  double u = 0.0;        // statistic for sample a
  double p_value = 1.0;  // two-sided
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  MWUMethod method = MWUMethod::Exact;
};

inline constexpr std::size_t kExactProductLimit = 400;

/// Two-sided Mann-Whitney U test with midranks for ties. Exact null
/// distribution when n_a * n_b <= 400 and there are no ties; otherwise the
/// normal approximation with tie and continuity corrections.
MWUResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> values);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_sd(std::span<const double> values);

}  // namespace plab
