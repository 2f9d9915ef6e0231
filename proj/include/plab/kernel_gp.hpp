#pragma once

#include "plab/types.hpp"

#include <Eigen/Cholesky>

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace plab {

enum class KernelKind { SquaredExponential, Exponential, PowerExponential, Matern32, Matern52 };

inline constexpr std::array<KernelKind, 5> kAllKernels{
    KernelKind::SquaredExponential, KernelKind::Exponential, KernelKind::PowerExponential,
    KernelKind::Matern32, KernelKind::Matern52};

std::string_view to_string(KernelKind kind);
/// Accepts "se", "exp", "powexp", "matern32", "matern52".
KernelKind parse_kernel_kind(std::string_view name);

/// Isotropic stationary kernel: amplitude * rho(|x - x'| / lengthscale).
struct KernelSpec {
  KernelKind kind = KernelKind::SquaredExponential;
  double lengthscale = 1.0;
  double amplitude = 1.0;  // s^2, the value at zero distance
  double power = 1.5;      // PowerExponential only, in (0, 2]

  void validate() const;
};

/// Unit-amplitude correlation as a function of Euclidean distance r >= 0.
double correlation(const KernelSpec& spec, double r);

double kernel_eval(const KernelSpec& spec, const Point& a, const Point& b);

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const PointList& points);

/// rows index `a`, columns index `b`.
Eigen::MatrixXd cross_covariance(const KernelSpec& spec, const PointList& a, const PointList& b);

struct Dataset {
  PointList x;
  std::vector<double> y;
  std::optional<Box> domain;

  [[nodiscard]] std::size_t size() const { return x.size(); }
  /// n >= 1, |x| == |y|, equal dimensions, points inside the domain when one is set.
  void validate() const;
};

struct ConditionOptions {
  double noise = 1e-6;  // lambda^2, in standardized units when standardize is on
  bool standardize = true;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// A GP conditioned on a dataset. Immutable once built.
///
/// With standardization on, targets are shifted to zero mean and scaled to
/// unit variance before conditioning; the kernel amplitude and noise refer to
/// that standardized scale, and every prediction is mapped back to outcome
/// units. The factorization covers K + (noise + jitter) I where jitter is 0
/// when the plain Cholesky succeeds, otherwise it starts at 1e-8 * amplitude
/// and grows tenfold up to 1e-4 * amplitude. Latent variances at or below
/// kVarianceFloor * amplitude read as 0.
class GPPosterior {
 public:
  static GPPosterior condition(const KernelSpec& kernel, Dataset data, ConditionOptions options = {});
  /// No observations: mean 0, variance = amplitude.
  static GPPosterior prior(const KernelSpec& kernel, int dim);

  [[nodiscard]] double mean(const Point& x) const;
  [[nodiscard]] double variance(const Point& x) const;
  [[nodiscard]] Prediction predict(const Point& x) const;
  [[nodiscard]] std::vector<Prediction> predict(const PointList& xs) const;

  /// Standardized-space latent variance before clamping and rescaling:
  /// amplitude - k^T (K + eps I)^-1 k.
  [[nodiscard]] double latent_variance(const Point& x) const;

  /// -1/2 y^T alpha - 1/2 log det(K + eps I) - n/2 log(2 pi), on the
  /// (standardized) targets the factorization was built from.
  [[nodiscard]] double log_marginal_likelihood() const;
  /// log det(K + (noise + jitter) I).
  [[nodiscard]] double log_det() const { return log_det_; }

  [[nodiscard]] const KernelSpec& kernel() const { return kernel_; }
  [[nodiscard]] const Dataset& data() const { return data_; }
  [[nodiscard]] double noise() const { return noise_; }
  [[nodiscard]] double jitter() const { return jitter_; }
  [[nodiscard]] double y_mean() const { return y_mean_; }
  [[nodiscard]] double y_scale() const { return y_scale_; }
  [[nodiscard]] bool standardized() const { return standardized_; }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] std::size_t size() const { return data_.x.size(); }
  [[nodiscard]] const Eigen::VectorXd& weights() const { return alpha_; }
  [[nodiscard]] const Eigen::VectorXd& targets() const { return targets_; }
  [[nodiscard]] const Eigen::LLT<Eigen::MatrixXd>& factor() const { return llt_; }

 private:
  GPPosterior() = default;

  KernelSpec kernel_;
  Dataset data_;
  double noise_ = 0.0;
  double jitter_ = 0.0;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  bool standardized_ = false;
  int dim_ = 0;
  Eigen::VectorXd targets_;  // standardized y
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double log_det_ = 0.0;
};

inline constexpr double kJitterStart = 1e-8;
inline constexpr double kVarianceFloor = 1e-8;
inline constexpr double kJitterMax = 1e-4;

/// Cholesky of `matrix + j I`: j = 0 first, then the jitter ladder scaled by
/// `base`. Returns the jitter actually used. Throws NumericalError when even
/// the largest jitter fails.
double factor_with_jitter(const Eigen::MatrixXd& matrix, double base, Eigen::LLT<Eigen::MatrixXd>& llt);

struct FitOptions {
  bool fit_lengthscale = true;
  bool fit_amplitude = true;
  bool fit_noise = false;

  // Values used when the matching parameter is held fixed.
  double lengthscale = 1.0;
  double amplitude = 1.0;
  double noise = 1e-6;
  double power = 1.5;

  // Lengthscale bounds are multiples of the domain diagonal.
  double lengthscale_lower = 1e-2;
  double lengthscale_upper = 1e2;
  double amplitude_lower = 1e-4;
  double amplitude_upper = 1e4;
  double noise_lower = 1e-10;
  double noise_upper = 1.0;

  int restarts = 8;
  std::uint64_t seed = 0;
  int max_iterations = 200;
  bool standardize = true;
};

/// Maximum-likelihood hyperparameters over a deterministic multistart
/// (Sobol starts in log-parameter space), then conditioning.
GPPosterior fit_gp(const Dataset& data, KernelKind kind, const FitOptions& options = {});

}  // namespace plab
