#include "plab/uncertainty.hpp"

#include "plab/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace plab {

std::string_view to_string(UQMeasureKind kind) {
  switch (kind) {
    case UQMeasureKind::Sigma: return "sigma";
    case UQMeasureKind::Entropy: return "entropy";
    case UQMeasureKind::Distance: return "distance";
  }
  return "?";
}

UQMeasureKind parse_measure_kind(std::string_view name) {
  for (UQMeasureKind k : kAllMeasures) {
    if (to_string(k) == name) return k;
  }
  throw InputError(fmt::format("unknown uncertainty measure '{}'", name));
}

Incumbent Incumbent::of(std::span<const double> outcomes) {
  if (outcomes.empty()) throw InputError("incumbent of an empty outcome list");
  return {*std::max_element(outcomes.begin(), outcomes.end())};
}

double improvement(const GPPosterior& gp, const Point& x, Incumbent incumbent) {
  return gp.mean(x) - incumbent.best;
}

double uq_sigma(const GPPosterior& gp, const Point& x) { return std::sqrt(gp.variance(x)); }

double uq_distance(const PointList& prefix, const Point& x) {
  if (prefix.empty()) throw InputError("distance uncertainty needs at least one previous decision");
  double total = 0.0;
  for (const auto& p : prefix) {
    if (p.size() != x.size()) throw InputError("dimension mismatch in distance uncertainty");
    const double sq = (x - p).squaredNorm();
    if (sq == 0.0) return 0.0;
    total += std::exp(-sq) / sq;
  }
  // total underflows to 0 far from every sample; atan(inf) = pi/2 keeps z < 1 there in the limit.
  return (2.0 / std::numbers::pi) * std::atan(1.0 / total);
}

EntropyField::EntropyField(const GPPosterior& gp, const PointList& prefix)
    : kernel_(gp.kernel()), prefix_(prefix), eps_(gp.noise() + gp.jitter()) {
  if (prefix_.empty()) return;
  Eigen::MatrixXd k = gram_matrix(kernel_, prefix_);
  k.diagonal().array() += eps_;
  llt_.compute(k);
  if (llt_.info() != Eigen::Success) {
    eps_ += factor_with_jitter(k, kernel_.amplitude, llt_);
  }
  base_log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

double EntropyField::operator()(const Point& x) const {
  const double self = kernel_.amplitude + eps_;
  if (prefix_.empty()) return 0.5 * std::log(self);
  const auto n = static_cast<Eigen::Index>(prefix_.size());
  Eigen::VectorXd kx(n);
  for (Eigen::Index i = 0; i < n; ++i) kx(i) = kernel_eval(kernel_, x, prefix_[static_cast<std::size_t>(i)]);
  const double reduction = llt_.matrixL().solve(kx).squaredNorm();
  const double schur = std::max(self - reduction, std::numeric_limits<double>::min());
  return 0.5 * (base_log_det_ + std::log(schur));
}

std::vector<double> EntropyField::evaluate(const PointList& xs) const {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back((*this)(x));
  return out;
}

double uq_entropy(const GPPosterior& gp, const PointList& prefix, const Point& x) {
  return EntropyField(gp, prefix)(x);
}

std::vector<double> evaluate_uncertainty(const GPPosterior& gp, const PointList& prefix, UQMeasureKind measure,
                                         const PointList& xs) {
  std::vector<double> out(xs.size());
  switch (measure) {
    case UQMeasureKind::Sigma: {
      const auto pred = gp.predict(xs);
      for (std::size_t i = 0; i < xs.size(); ++i) out[i] = std::sqrt(pred[i].variance);
      break;
    }
    case UQMeasureKind::Entropy: out = EntropyField(gp, prefix).evaluate(xs); break;
    case UQMeasureKind::Distance:
      for (std::size_t i = 0; i < xs.size(); ++i) out[i] = uq_distance(prefix, xs[i]);
      break;
  }
  return out;
}

}  // namespace plab
