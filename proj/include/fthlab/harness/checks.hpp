// Copyright 2026 The fthlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "fthlab/core/config.hpp"
#include "fthlab/core/errors.hpp"
#include "fthlab/harness/report.hpp"
#include "fthlab/lqr/counterexample.hpp"
#include "fthlab/lqr/riccati.hpp"
#include "fthlab/scalar/scalar.hpp"

namespace fthlab::harness {

struct DppResult {
  double running_cost = 0.0;  // cost of the reference pair on (s,T)
  double value_end = 0.0;     // value at (T, y(T))
  double value_start = 0.0;   // value at (s, z)
  double residual = 0.0;
};

/// Restricts the infinite-horizon optimal pair to (s,T) and measures
///   | J_(s,T) + V_T(y(T)) - V_s(z) |
/// with exact value functions (closed form for the scalar family, periodic
/// Riccati for the LQ family).
inline DppResult dpp_check(const ExperimentConfig& cfg, Family family, double s,
                           double T, double steps_per_unit = 4000.0) {
  if (!(T > s)) throw ContractViolation("dpp_check: need T > s");
  const TimeGrid grid = TimeGrid::with_density(s, T, steps_per_unit);
  DppResult r;
  switch (family) {
    case Family::kScalar: {
      const auto p = scalar::ScalarProblem::make(cfg.scalar.n, cfg.scalar.y0);
      const auto [y, u] = scalar::ith_closed_loop(p, grid);
      r.running_cost = scalar::scalar_cost(p, y, u).total;
      r.value_end = scalar::ith_value_at(p, y.terminal()(0));
      r.value_start = scalar::ith_value(p);
      break;
    }
    case Family::kPeriodicLqr: {
      lqr::PeriodicLQ lq;
      lq.chi = 0.0;
      lq.z = cfg.lqr.z;
      const int spp = static_cast<int>(std::lround(steps_per_unit * lq.period));
      const lqr::RiccatiPath pi =
          lqr::solve_periodic_riccati(lq, spp, cfg.tol.riccati_periodicity);
      const lqr::ClosedLoop cl = lqr::closed_loop(lq, pi, grid);
      r.running_cost = cl.cost.total;
      r.value_end = lqr::riccati_value(lq, pi, T, cl.state.terminal());
      r.value_start = lqr::riccati_value(lq, pi, s, lq.z);
      break;
    }
    default:
      throw UnsupportedFamilyError("dpp_check: no value function for family '" +
                                   family_name(family) + "'");
  }
  r.residual = std::abs(r.running_cost + r.value_end - r.value_start);
  return r;
}

struct TCircle {
  double t_circle = 0.0;   // latest time in the second half with penalty <= threshold
  double theta = 0.0;      // min of the penalty over the second half
  double threshold = 0.0;  // 4/(T-s) * cost
  bool bound_holds = false;
  double margin = 0.0;     // 2 cost - theta (T-s)/2
};

/// Intermediate-time selection on [(s+T)/2, T] from per-node penalties.
inline TCircle t_circle_selector(const TimeGrid& grid, const Eigen::VectorXd& penalty,
                                 double s, double T, double cost) {
  if (penalty.size() != grid.size()) {
    throw ContractViolation("t_circle_selector: penalty does not match grid");
  }
  if (!(T > s) || !grid.contains(s, 1e-9) || !grid.contains(T, 1e-9)) {
    throw DomainError("t_circle_selector: [s,T] not covered by the grid");
  }
  const double mid = 0.5 * (s + T);
  TCircle out;
  out.theta = INFINITY;
  out.threshold = 4.0 / (T - s) * cost;
  out.t_circle = NAN;
  const double slack = 1e-9 * grid.dt();
  for (int k = 0; k < grid.size(); ++k) {
    const double t = grid.node(k);
    if (t < mid - slack || t > T + slack) continue;
    out.theta = std::min(out.theta, penalty(k));
    if (penalty(k) <= out.threshold) out.t_circle = t;
  }
  out.margin = 2.0 * cost - out.theta * (T - s) / 2.0;
  out.bound_holds = out.margin >= 0.0;
  return out;
}

/// Costs of the uncoupled example across horizons: the finite-horizon
/// optimum grows like e^{2T} while the infinite-horizon cost is 0.
inline ExperimentReport counterexample_report(double y0,
                                              const std::vector<double>& horizons,
                                              double steps_per_unit = 1000.0) {
  ExperimentReport rep;
  rep.experiment_id = "counterexample";
  rep.horizons = horizons;
  rep.window = {0.0, horizons.empty() ? 1.0 : horizons.front()};
  rep.ith_reference_cost = 0.0;
  std::vector<double> sim, closed;
  double worst = 0.0;
  for (double T : horizons) {
    const lqr::CounterexampleCosts c = lqr::counterexample_costs(y0, T, steps_per_unit);
    CostBreakdown b;
    b.total = b.terminal_term = c.fth_cost;
    rep.costs.push_back(b);
    rep.completed.push_back(true);
    rep.failures.emplace_back();
    rep.terminal_norms.push_back(std::abs(y0) * std::exp(T));
    rep.window_errors.push_back({NAN, NAN});
    sim.push_back(c.fth_cost);
    closed.push_back(c.closed_form);
    worst = std::max(worst, std::abs(c.fth_cost - c.closed_form) /
                                std::max(1.0, std::abs(c.closed_form)));
  }
  rep.extra["closed_form_costs"] = closed;
  rep.extra["simulated_costs"] = sim;
  rep.verdicts.push_back({"simulated_matches_closed_form", worst <= 1e-8, 1e-8 - worst,
                          "worst relative gap " + report_detail::sci(worst)});
  if (y0 != 0.0) {
    bool up = true;
    for (std::size_t i = 1; i < sim.size(); ++i) up = up && sim[i] > sim[i - 1];
    const double gap = sim.empty() ? 0.0 : sim.back();
    rep.verdicts.push_back({"fth_cost_diverges_from_ith", up && gap > 0.0, gap,
                            "finite-horizon costs increase without bound, "
                            "infinite-horizon cost is 0"});
  }
  return rep;
}

}  // namespace fthlab::harness
