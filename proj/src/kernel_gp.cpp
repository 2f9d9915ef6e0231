#include "plab/kernel_gp.hpp"

#include "plab/error.hpp"

#include <fmt/format.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_qrng.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

namespace plab {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kSqrt5 = 2.23606797749979;

void require_same_dim(const Point& a, const Point& b) {
  if (a.size() != b.size()) {
    throw InputError(fmt::format("dimension mismatch: {} vs {}", a.size(), b.size()));
  }
}

}  // namespace

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::SquaredExponential: return "se";
    case KernelKind::Exponential: return "exp";
    case KernelKind::PowerExponential: return "powexp";
    case KernelKind::Matern32: return "matern32";
    case KernelKind::Matern52: return "matern52";
  }
  return "?";
}

KernelKind parse_kernel_kind(std::string_view name) {
  for (KernelKind k : kAllKernels) {
    if (to_string(k) == name) return k;
  }
  throw InputError(fmt::format("unknown kernel '{}'", name));
}

void KernelSpec::validate() const {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw InputError(fmt::format("lengthscale must be positive, got {}", lengthscale));
  }
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw InputError(fmt::format("amplitude must be positive, got {}", amplitude));
  }
  if (!(power > 0.0 && power <= 2.0)) {
    throw InputError(fmt::format("power must lie in (0, 2], got {}", power));
  }
}

double correlation(const KernelSpec& spec, double r) {
  const double t = r / spec.lengthscale;
  switch (spec.kind) {
    case KernelKind::SquaredExponential: return std::exp(-0.5 * t * t);
    case KernelKind::Exponential: return std::exp(-t);
    case KernelKind::PowerExponential: return std::exp(-std::pow(t, spec.power));
    case KernelKind::Matern32: {
      const double a = kSqrt3 * t;
      return (1.0 + a) * std::exp(-a);
    }
    case KernelKind::Matern52: {
      const double a = kSqrt5 * t;
      return (1.0 + a + (5.0 / 3.0) * t * t) * std::exp(-a);
    }
  }
  return 0.0;
}

double kernel_eval(const KernelSpec& spec, const Point& a, const Point& b) {
  require_same_dim(a, b);
  return spec.amplitude * correlation(spec, (a - b).norm());
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const PointList& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = spec.amplitude;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = kernel_eval(spec, points[i], points[j]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXd cross_covariance(const KernelSpec& spec, const PointList& a, const PointList& b) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel_eval(spec, a[i], b[j]);
    }
  }
  return k;
}

bool Box::contains(const Point& x) const {
  if (x.size() != lower.size()) return false;
  return ((x.array() >= lower.array()) && (x.array() <= upper.array())).all();
}

void Box::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw InputError("box bounds must be nonempty and of equal dimension");
  }
  if (!(lower.array() < upper.array()).all()) {
    throw InputError("degenerate box: every lower bound must be below its upper bound");
  }
}

void Dataset::validate() const {
  if (x.empty()) throw InputError("dataset is empty");
  if (x.size() != y.size()) {
    throw InputError(fmt::format("dataset has {} points but {} outcomes", x.size(), y.size()));
  }
  const auto d = x.front().size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != d) throw InputError("dataset points differ in dimension");
    if (!x[i].allFinite() || !std::isfinite(y[i])) throw InputError("dataset contains non-finite values");
    if (domain && !domain->contains(x[i])) {
      throw InputError(fmt::format("dataset point {} lies outside the domain", i));
    }
  }
}

double factor_with_jitter(const Eigen::MatrixXd& matrix, double base, Eigen::LLT<Eigen::MatrixXd>& llt) {
  const auto n = matrix.rows();
  // Plain attempt first, then the ladder.
  for (double rel = 0.0; rel <= kJitterMax * 1.0000001; rel = rel == 0.0 ? kJitterStart : rel * 10.0) {
    const double jitter = rel * base;
    Eigen::MatrixXd a = matrix;
    a.diagonal().array() += jitter;
    llt.compute(a);
    if (llt.info() != Eigen::Success) continue;
    const auto diag = llt.matrixLLT().diagonal();
    if (n == 0 || ((diag.array() > 0.0).all() && diag.allFinite())) return jitter;
  }
  throw NumericalError(fmt::format(
      "covariance matrix ({}x{}) is not positive definite even with jitter {:g}", n, n, kJitterMax * base));
}

GPPosterior GPPosterior::condition(const KernelSpec& kernel, Dataset data, ConditionOptions options) {
  kernel.validate();
  data.validate();
  if (!(options.noise >= 0.0)) throw InputError("noise must be nonnegative");

  GPPosterior gp;
  gp.kernel_ = kernel;
  gp.noise_ = options.noise;
  gp.standardized_ = options.standardize;
  gp.dim_ = static_cast<int>(data.x.front().size());

  const auto n = static_cast<Eigen::Index>(data.size());
  const Eigen::Map<const Eigen::VectorXd> y(data.y.data(), n);
  if (options.standardize) {
    gp.y_mean_ = y.mean();
    const double var = (y.array() - gp.y_mean_).square().mean();
    const double sd = std::sqrt(var);
    gp.y_scale_ = (sd > 1e-12 * std::max(1.0, std::abs(gp.y_mean_))) ? sd : 1.0;
  }
  gp.targets_ = (y.array() - gp.y_mean_) / gp.y_scale_;

  Eigen::MatrixXd k = gram_matrix(kernel, data.x);
  k.diagonal().array() += options.noise;
  gp.jitter_ = factor_with_jitter(k, kernel.amplitude, gp.llt_);
  gp.alpha_ = gp.llt_.solve(gp.targets_);
  gp.log_det_ = 2.0 * gp.llt_.matrixLLT().diagonal().array().log().sum();
  gp.data_ = std::move(data);
  return gp;
}

GPPosterior GPPosterior::prior(const KernelSpec& kernel, int dim) {
  kernel.validate();
  GPPosterior gp;
  gp.kernel_ = kernel;
  gp.dim_ = dim;
  return gp;
}

Prediction GPPosterior::predict(const Point& x) const {
  if (x.size() != dim_) throw InputError(fmt::format("query has dimension {}, model has {}", x.size(), dim_));
  const double prior_var = kernel_.amplitude;
  if (data_.x.empty()) return {0.0, prior_var};
  const auto n = static_cast<Eigen::Index>(data_.size());
  Eigen::VectorXd kx(n);
  for (Eigen::Index i = 0; i < n; ++i) kx(i) = kernel_eval(kernel_, x, data_.x[static_cast<std::size_t>(i)]);
  const double mean = y_mean_ + y_scale_ * kx.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(kx);
  double latent = std::clamp(prior_var - v.squaredNorm(), 0.0, prior_var);
  if (latent <= kVarianceFloor * prior_var) latent = 0.0;
  return {mean, y_scale_ * y_scale_ * latent};
}

std::vector<Prediction> GPPosterior::predict(const PointList& xs) const {
  // Point by point so a location gets the same bits whether queried alone or in a grid.
  std::vector<Prediction> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(predict(x));
  return out;
}

double GPPosterior::latent_variance(const Point& x) const {
  if (data_.x.empty()) return kernel_.amplitude;
  const auto n = static_cast<Eigen::Index>(data_.size());
  Eigen::VectorXd kx(n);
  for (Eigen::Index i = 0; i < n; ++i) kx(i) = kernel_eval(kernel_, x, data_.x[static_cast<std::size_t>(i)]);
  return kernel_.amplitude - llt_.matrixL().solve(kx).squaredNorm();
}

double GPPosterior::mean(const Point& x) const { return predict(x).mean; }

double GPPosterior::variance(const Point& x) const { return predict(x).variance; }

double GPPosterior::log_marginal_likelihood() const {
  const auto n = static_cast<double>(targets_.size());
  const double value =
      -0.5 * targets_.dot(alpha_) - 0.5 * log_det_ - 0.5 * n * std::log(2.0 * std::numbers::pi);
  if (!std::isfinite(value)) throw NumericalError("log marginal likelihood is not finite");
  return value;
}

// ---------------------------------------------------------------------------
// Hyperparameter fitting

namespace {

enum class Param { LogLengthscale, LogAmplitude, LogNoise };

struct FreeParam {
  Param which;
  double lo;
  double hi;
};

struct LikelihoodProblem {
  KernelSpec base;
  Eigen::MatrixXd distances;
  Eigen::VectorXd targets;
  double noise = 0.0;
  std::vector<FreeParam> free;

  KernelSpec kernel_at(const double* theta, double* noise_out) const {
    KernelSpec k = base;
    double noise_value = noise;
    for (std::size_t i = 0; i < free.size(); ++i) {
      const double v = std::exp(std::clamp(theta[i], free[i].lo, free[i].hi));
      switch (free[i].which) {
        case Param::LogLengthscale: k.lengthscale = v; break;
        case Param::LogAmplitude: k.amplitude = v; break;
        case Param::LogNoise: noise_value = v; break;
      }
    }
    *noise_out = noise_value;
    return k;
  }

  // Negative log marginal likelihood plus a quadratic wall outside the box.
  double objective(const double* theta) const {
    double noise_value = 0.0;
    const KernelSpec k = kernel_at(theta, &noise_value);
    double excursion = 0.0;
    for (std::size_t i = 0; i < free.size(); ++i) {
      const double c = std::clamp(theta[i], free[i].lo, free[i].hi);
      excursion += (theta[i] - c) * (theta[i] - c);
    }
    const auto n = distances.rows();
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      cov(i, i) = k.amplitude + noise_value;
      for (Eigen::Index j = 0; j < i; ++j) {
        const double v = k.amplitude * correlation(k, distances(i, j));
        cov(i, j) = v;
        cov(j, i) = v;
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt;
    try {
      factor_with_jitter(cov, k.amplitude, llt);
    } catch (const NumericalError&) {
      return 1e100;
    }
    const Eigen::VectorXd alpha = llt.solve(targets);
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double nll = 0.5 * targets.dot(alpha) + 0.5 * log_det +
                       0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    if (!std::isfinite(nll)) return 1e100;
    return nll + 1e3 * excursion;
  }
};

double gsl_objective(const gsl_vector* v, void* params) {
  const auto* problem = static_cast<const LikelihoodProblem*>(params);
  return problem->objective(v->data);
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct QrngDeleter {
  void operator()(gsl_qrng* q) const { gsl_qrng_free(q); }
};

}  // namespace

GPPosterior fit_gp(const Dataset& data, KernelKind kind, const FitOptions& options) {
  data.validate();

  KernelSpec base{kind, options.lengthscale, options.amplitude, options.power};
  const ConditionOptions condition_options{options.noise, options.standardize};

  double diagonal = 0.0;
  if (data.domain) {
    diagonal = data.domain->diagonal();
  } else {
    Eigen::VectorXd lo = data.x.front(), hi = data.x.front();
    for (const auto& p : data.x) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    diagonal = (hi - lo).norm();
  }
  if (!(diagonal > 0.0)) diagonal = 1.0;

  LikelihoodProblem problem;
  problem.base = base;
  problem.noise = options.noise;
  if (options.fit_lengthscale) {
    problem.free.push_back({Param::LogLengthscale, std::log(options.lengthscale_lower * diagonal),
                            std::log(options.lengthscale_upper * diagonal)});
  }
  if (options.fit_amplitude) {
    problem.free.push_back(
        {Param::LogAmplitude, std::log(options.amplitude_lower), std::log(options.amplitude_upper)});
  }
  if (options.fit_noise) {
    problem.free.push_back({Param::LogNoise, std::log(options.noise_lower), std::log(options.noise_upper)});
  }

  if (problem.free.empty()) {
    try {
      return GPPosterior::condition(base, data, condition_options);
    } catch (const NumericalError& e) {
      throw FitError(e.what());
    }
  }

  // Standardized targets, identical to what condition() will use.
  const auto n = static_cast<Eigen::Index>(data.size());
  const Eigen::Map<const Eigen::VectorXd> y(data.y.data(), n);
  double y_mean = 0.0, y_scale = 1.0;
  if (options.standardize) {
    y_mean = y.mean();
    const double sd = std::sqrt((y.array() - y_mean).square().mean());
    y_scale = (sd > 1e-12 * std::max(1.0, std::abs(y_mean))) ? sd : 1.0;
  }
  problem.targets = (y.array() - y_mean) / y_scale;
  problem.distances.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    problem.distances(i, i) = 0.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double r = (data.x[static_cast<std::size_t>(i)] - data.x[static_cast<std::size_t>(j)]).norm();
      problem.distances(i, j) = r;
      problem.distances(j, i) = r;
    }
  }

  const auto dim = problem.free.size();
  std::unique_ptr<gsl_qrng, QrngDeleter> qrng(gsl_qrng_alloc(gsl_qrng_sobol, static_cast<unsigned>(dim)));
  std::vector<double> unit(dim);
  for (std::uint64_t s = 0; s < options.seed % 4096; ++s) gsl_qrng_get(qrng.get(), unit.data());

  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> minimizer(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim));
  std::unique_ptr<gsl_vector, VectorDeleter> start(gsl_vector_alloc(dim));
  std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(dim));
  gsl_multimin_function fn{&gsl_objective, dim, &problem};

  gsl_error_handler_t* previous_handler = gsl_set_error_handler_off();
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<double> best_theta(dim);
  for (int restart = 0; restart < std::max(1, options.restarts); ++restart) {
    gsl_qrng_get(qrng.get(), unit.data());
    for (std::size_t i = 0; i < dim; ++i) {
      const auto& p = problem.free[i];
      gsl_vector_set(start.get(), i, p.lo + unit[i] * (p.hi - p.lo));
      gsl_vector_set(step.get(), i, 0.15 * (p.hi - p.lo));
    }
    if (gsl_multimin_fminimizer_set(minimizer.get(), &fn, start.get(), step.get()) != GSL_SUCCESS) continue;
    for (int it = 0; it < options.max_iterations; ++it) {
      if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(minimizer.get()), 1e-5) == GSL_SUCCESS) break;
    }
    const double value = gsl_multimin_fminimizer_minimum(minimizer.get());
    if (value < 1e99 && value < best_value) {
      best_value = value;
      const gsl_vector* x = gsl_multimin_fminimizer_x(minimizer.get());
      for (std::size_t i = 0; i < dim; ++i) {
        best_theta[i] = std::clamp(gsl_vector_get(x, i), problem.free[i].lo, problem.free[i].hi);
      }
    }
  }
  gsl_set_error_handler(previous_handler);

  if (!std::isfinite(best_value)) {
    throw FitError(fmt::format("all {} restarts failed for kernel {} on {} points", options.restarts,
                               to_string(kind), data.size()));
  }
  double noise = options.noise;
  const KernelSpec fitted = problem.kernel_at(best_theta.data(), &noise);
  try {
    return GPPosterior::condition(fitted, data, {noise, options.standardize});
  } catch (const NumericalError& e) {
    throw FitError(e.what());
  }
}

}  // namespace plab
