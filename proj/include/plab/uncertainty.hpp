#pragma once

#include "plab/kernel_gp.hpp"

#include <array>
#include <span>
#include <string_view>

namespace plab {

/// sigma(x), h(x), z(x).
enum class UQMeasureKind { Sigma, Entropy, Distance };

inline constexpr std::array<UQMeasureKind, 3> kAllMeasures{UQMeasureKind::Sigma, UQMeasureKind::Entropy,
                                                           UQMeasureKind::Distance};

std::string_view to_string(UQMeasureKind kind);
/// Accepts "sigma", "entropy", "distance".
UQMeasureKind parse_measure_kind(std::string_view name);

struct Incumbent {
  double best = 0.0;  // y+
  static Incumbent of(std::span<const double> outcomes);
};

/// zeta(x) = mu(x) - y+, unclamped.
double improvement(const GPPosterior& gp, const Point& x, Incumbent incumbent);

/// Posterior standard deviation in outcome units.
double uq_sigma(const GPPosterior& gp, const Point& x);

/// Location-dependent entropy: 1/2 log det(K' + eps I) over prefix plus {x},
/// with eps = noise + jitter of `gp` and the kernel hyperparameters of `gp`.
/// The x-independent 2*pi*e term is dropped.
double uq_entropy(const GPPosterior& gp, const PointList& prefix, const Point& x);

/// Inverse-distance-weighting uncertainty: 0 on samples, otherwise
/// (2/pi) atan(1 / sum_j exp(-|x-x_j|^2) / |x-x_j|^2). Depends on decisions only.
double uq_distance(const PointList& prefix, const Point& x);

/// Entropy evaluator that factors the prefix covariance once and uses the
/// Schur complement for each candidate.
class EntropyField {
 public:
  EntropyField(const GPPosterior& gp, const PointList& prefix);
  [[nodiscard]] double operator()(const Point& x) const;
  [[nodiscard]] std::vector<double> evaluate(const PointList& xs) const;

 private:
  KernelSpec kernel_;
  PointList prefix_;
  double eps_ = 0.0;
  double base_log_det_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// u(x) for each point under the chosen measure.
std::vector<double> evaluate_uncertainty(const GPPosterior& gp, const PointList& prefix, UQMeasureKind measure,
                                         const PointList& xs);

}  // namespace plab
