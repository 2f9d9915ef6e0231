#pragma once

// Synthetic decision tables with known ACR statistics.

#include "plab/analysis.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace fixture {

struct AcrFixture {
  std::vector<plab::DecisionTableRow> rows;
  std::vector<plab::Trace> traces;
};

/// One two-step trace per value; the decision at step 2 has ACR equal to the
/// value and is labelled rational or not.
inline void add_decision(AcrFixture& f, const std::string& problem, double acr, bool rational) {
  const std::string player = "p" + std::to_string(f.traces.size());
  plab::Trace t;
  t.session_id = "s-" + player;
  t.player_id = player;
  t.problem_id = problem;
  t.steps.push_back({plab::make_point({0.0, 0.0}), acr, "2000-01-01T00:00:00.000Z"});
  t.steps.push_back({plab::make_point({0.0, 0.0}), 0.0, "2000-01-01T00:00:01.000Z"});
  f.traces.push_back(std::move(t));
  f.rows.push_back({player, problem, 2, plab::UQMeasureKind::Distance, rational ? 0.0 : 1.0, {}, true, {}});
}

/// Rational ACRs: 20 values with mean 157.231, sd 100.05, all below the
/// 20 non-rational ACRs with mean 319.434, sd 227.555.
inline AcrFixture stytang_acr() {
  AcrFixture f;
  const double n = 20.0;
  const double half = 100.05 * std::sqrt((n - 1.0) / n);
  for (int i = 0; i < 10; ++i) {
    add_decision(f, "stytang", 157.231 + half, true);
    add_decision(f, "stytang", 157.231 - half, true);
  }
  // 19 copies of a and one b: mean a + (b - a)/n, sd (b - a)/sqrt(n).
  const double gap = 227.555 * std::sqrt(n);
  const double a = 319.434 - gap / n;
  for (int i = 0; i < 19; ++i) add_decision(f, "stytang", a, false);
  add_decision(f, "stytang", a + gap, false);
  return f;
}

}  // namespace fixture
