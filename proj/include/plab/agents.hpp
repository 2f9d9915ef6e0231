#pragma once

#include "plab/kernel_gp.hpp"
#include "plab/testbed.hpp"
#include "plab/trace.hpp"
#include "plab/uncertainty.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace plab {

double normal_cdf(double z);
double normal_pdf(double z);

// Acquisition functions on a posterior summary (mean, standard deviation).
// With sd == 0 they take their degenerate limits: PI is 1 when
// mean - incumbent - xi > 0 and 0 otherwise, EI is max(mean - incumbent - xi, 0).
double acq_pi(double mean, double sd, double incumbent, double xi = 0.0);
double acq_ei(double mean, double sd, double incumbent, double xi = 0.0);
double acq_ucb(double mean, double sd, double beta);

double acq_pi(const GPPosterior& gp, const Point& x, Incumbent incumbent, double xi = 0.0);
double acq_ei(const GPPosterior& gp, const Point& x, Incumbent incumbent, double xi = 0.0);
double acq_ucb(const GPPosterior& gp, const Point& x, double beta);

enum class PolicyKind { EIMax, PIMax, UCBMax, Thompson, GreedyMean, UniformRandom };

std::string_view to_string(PolicyKind kind);
/// Accepts "ei", "pi", "ucb", "thompson", "greedy", "random".
PolicyKind parse_policy_kind(std::string_view name);

struct AgentPolicy {
  PolicyKind kind = PolicyKind::EIMax;
  double beta = 3.0;  // UCB
  double xi = 0.0;    // PI / EI
  KernelKind kernel = KernelKind::Matern52;

  void validate() const;
};

/// "ucb", "ucb:beta=1", "ei:xi=0.01,kernel=se", ...
AgentPolicy parse_policy(std::string_view spec);
std::string describe(const AgentPolicy& policy);

/// Index of the largest value; ties go to larger mean, then larger sd, then
/// the lower index, so the pick is never strictly dominated in (mean, sd)
/// by another tied candidate.
std::size_t argmax_with_ties(std::span<const double> values, std::span<const Prediction> predictions);

/// Draws one joint posterior sample over the grid and returns the index of
/// its maximum. Deterministic in `seed`.
std::size_t thompson_index(const GPPosterior& gp, const PointList& grid, std::uint64_t seed);
Point thompson_next(const GPPosterior& gp, const PointList& grid, std::uint64_t seed);

struct AgentRunOptions {
  int budget = 20;
  int n_init = 3;
  std::vector<int> grid{30, 30};
  FitOptions fit;
  std::string player_id;  // defaults to the policy description
  std::string session_id;
};

/// n_init uniform-random decisions, then one decision per step chosen by the
/// policy over the evaluation grid with the GP refitted each step.
Trace run_agent(const TestProblem& problem, const AgentPolicy& policy, const AgentRunOptions& options,
                std::uint64_t seed);

}  // namespace plab
