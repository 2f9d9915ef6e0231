#include "plab/agents.hpp"

#include "plab/error.hpp"
#include "plab/pareto.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace plab {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double acq_pi(double mean, double sd, double incumbent, double xi) {
  const double delta = mean - incumbent - xi;
  if (!(sd > 0.0)) return delta > 0.0 ? 1.0 : 0.0;
  return normal_cdf(delta / sd);
}

double acq_ei(double mean, double sd, double incumbent, double xi) {
  const double delta = mean - incumbent - xi;
  if (!(sd > 0.0)) return std::max(delta, 0.0);
  const double z = delta / sd;
  return std::max(delta * normal_cdf(z) + sd * normal_pdf(z), 0.0);
}

double acq_ucb(double mean, double sd, double beta) { return mean + std::sqrt(beta) * sd; }

double acq_pi(const GPPosterior& gp, const Point& x, Incumbent incumbent, double xi) {
  const auto p = gp.predict(x);
  return acq_pi(p.mean, std::sqrt(p.variance), incumbent.best, xi);
}

double acq_ei(const GPPosterior& gp, const Point& x, Incumbent incumbent, double xi) {
  const auto p = gp.predict(x);
  return acq_ei(p.mean, std::sqrt(p.variance), incumbent.best, xi);
}

double acq_ucb(const GPPosterior& gp, const Point& x, double beta) {
  const auto p = gp.predict(x);
  return acq_ucb(p.mean, std::sqrt(p.variance), beta);
}

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::EIMax: return "ei";
    case PolicyKind::PIMax: return "pi";
    case PolicyKind::UCBMax: return "ucb";
    case PolicyKind::Thompson: return "thompson";
    case PolicyKind::GreedyMean: return "greedy";
    case PolicyKind::UniformRandom: return "random";
  }
  return "?";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (auto k : {PolicyKind::EIMax, PolicyKind::PIMax, PolicyKind::UCBMax, PolicyKind::Thompson,
                 PolicyKind::GreedyMean, PolicyKind::UniformRandom}) {
    if (to_string(k) == name) return k;
  }
  throw InputError(fmt::format("unknown policy '{}'", name));
}

void AgentPolicy::validate() const {
  if (!(beta >= 0.0)) throw InputError("beta must be nonnegative");
  if (!(xi >= 0.0)) throw InputError("xi must be nonnegative");
}

AgentPolicy parse_policy(std::string_view spec) {
  AgentPolicy policy;
  const auto colon = spec.find(':');
  policy.kind = parse_policy_kind(spec.substr(0, colon));
  if (colon != std::string_view::npos) {
    std::stringstream rest{std::string(spec.substr(colon + 1))};
    std::string item;
    while (std::getline(rest, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw InputError(fmt::format("policy option '{}' lacks '='", item));
      const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
      try {
        if (key == "beta") {
          policy.beta = std::stod(value);
        } else if (key == "xi") {
          policy.xi = std::stod(value);
        } else if (key == "kernel") {
          policy.kernel = parse_kernel_kind(value);
        } else {
          throw InputError(fmt::format("unknown policy option '{}'", key));
        }
      } catch (const std::logic_error& e) {
        if (dynamic_cast<const InputError*>(&e)) throw;
        throw InputError(fmt::format("bad value for policy option '{}': {}", key, value));
      }
    }
  }
  policy.validate();
  return policy;
}

std::string describe(const AgentPolicy& policy) {
  switch (policy.kind) {
    case PolicyKind::EIMax:
    case PolicyKind::PIMax:
      return fmt::format("{}:xi={:g},kernel={}", to_string(policy.kind), policy.xi, to_string(policy.kernel));
    case PolicyKind::UCBMax:
      return fmt::format("ucb:beta={:g},kernel={}", policy.beta, to_string(policy.kernel));
    case PolicyKind::Thompson:
    case PolicyKind::GreedyMean:
      return fmt::format("{}:kernel={}", to_string(policy.kind), to_string(policy.kernel));
    case PolicyKind::UniformRandom: return "random";
  }
  return "?";
}

std::size_t argmax_with_ties(std::span<const double> values, std::span<const Prediction> predictions) {
  if (values.empty() || values.size() != predictions.size()) {
    throw InputError("argmax needs one prediction per value");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) {
      best = i;
    } else if (values[i] == values[best]) {
      const auto& a = predictions[i];
      const auto& b = predictions[best];
      if (a.mean > b.mean || (a.mean == b.mean && a.variance > b.variance)) best = i;
    }
  }
  return best;
}

std::size_t thompson_index(const GPPosterior& gp, const PointList& grid, std::uint64_t seed) {
  if (grid.empty()) throw InputError("Thompson sampling over an empty grid");
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd mean(m);
  Eigen::MatrixXd cov = gram_matrix(gp.kernel(), grid);
  if (gp.size() > 0) {
    const Eigen::MatrixXd kxs = cross_covariance(gp.kernel(), gp.data().x, grid);
    const Eigen::MatrixXd v = gp.factor().matrixL().solve(kxs);
    cov.noalias() -= v.transpose() * v;
    mean = (kxs.transpose() * gp.weights()).array() * gp.y_scale() + gp.y_mean();
  } else {
    mean.setZero();
  }
  cov *= gp.y_scale() * gp.y_scale();
  Eigen::LLT<Eigen::MatrixXd> llt;
  factor_with_jitter(cov, gp.kernel().amplitude * gp.y_scale() * gp.y_scale(), llt);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) z(i) = normal(rng);
  const Eigen::VectorXd sample = mean + llt.matrixL() * z;
  Eigen::Index best = 0;
  sample.maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

Point thompson_next(const GPPosterior& gp, const PointList& grid, std::uint64_t seed) {
  return grid[thompson_index(gp, grid, seed)];
}

namespace {

std::string synthetic_timestamp(int step) {
  return fmt::format("2000-01-01T00:{:02d}:{:02d}.000Z", step / 60, step % 60);
}

}  // namespace

Trace run_agent(const TestProblem& problem, const AgentPolicy& policy, const AgentRunOptions& options,
                std::uint64_t seed) {
  policy.validate();
  if (options.n_init < 1) throw InputError("n_init must be at least 1");
  if (options.budget < options.n_init) throw InputError("budget must be at least n_init");

  Trace trace;
  trace.player_id = options.player_id.empty() ? describe(policy) : options.player_id;
  trace.session_id = options.session_id.empty() ? fmt::format("sim-{}", trace.player_id) : options.session_id;
  trace.problem_id = problem.id;
  trace.mode = 1;
  trace.budget = options.budget;

  std::mt19937_64 rng(seed);
  const Box& domain = problem.domain;
  auto uniform_point = [&] {
    Point p(domain.dim());
    for (int k = 0; k < domain.dim(); ++k) {
      p(k) = std::uniform_real_distribution<double>(domain.lower(k), domain.upper(k))(rng);
    }
    return p;
  };
  auto record = [&](Point x) {
    const double score = problem.score(x);
    trace.steps.push_back({std::move(x), score, synthetic_timestamp(static_cast<int>(trace.steps.size()))});
  };

  for (int i = 0; i < options.n_init; ++i) record(uniform_point());

  const PointList grid = build_grid(domain, options.grid);
  while (static_cast<int>(trace.steps.size()) < options.budget) {
    if (policy.kind == PolicyKind::UniformRandom) {
      record(uniform_point());
      continue;
    }
    const std::size_t n = trace.steps.size();
    Dataset data{trace.decisions(n), trace.outcomes(n), domain};
    GPPosterior gp = [&] {
      try {
        return fit_gp(data, policy.kernel, options.fit);
      } catch (const FitError& e) {
        throw FitError(fmt::format("agent {} on {} at step {}: {}", trace.player_id, problem.id, n + 1, e.what()));
      }
    }();
    if (policy.kind == PolicyKind::Thompson) {
      record(grid[thompson_index(gp, grid, rng())]);
      continue;
    }
    const double best = Incumbent::of(data.y).best;
    const auto pred = gp.predict(grid);
    std::vector<double> values(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double mu = pred[j].mean, sd = std::sqrt(pred[j].variance);
      switch (policy.kind) {
        case PolicyKind::EIMax: values[j] = acq_ei(mu, sd, best, policy.xi); break;
        case PolicyKind::PIMax: values[j] = acq_pi(mu, sd, best, policy.xi); break;
        case PolicyKind::UCBMax: values[j] = acq_ucb(mu, sd, policy.beta); break;
        default: values[j] = mu; break;
      }
    }
    record(grid[argmax_with_ties(values, pred)]);
  }
  return trace;
}

}  // namespace plab
