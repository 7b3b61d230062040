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

#include "fthlab/core/errors.hpp"
#include "fthlab/core/signals.hpp"
#include "fthlab/optim/rk4_system.hpp"
#include "fthlab/optim/solve.hpp"

namespace fthlab::lqr {

/// Uncoupled pair  y' = y,  w' = w + u  with cost
///   1/2 int w^2 + 1/2 int u^2 + 1/2 |(y, w)(T)|^2.
struct UncoupledModel {
  using State = Eigen::Vector2d;
  using Control = Eigen::Matrix<double, 1, 1>;

  State drift(double, const State& y) const { return y; }
  State drift_vjp(double, const State&, const State& v) const { return v; }
  Eigen::Vector2d input() const { return {0.0, 1.0}; }
  double state_penalty(const State& y) const { return y(1) * y(1); }
  State state_penalty_half_grad(const State& y) const { return {0.0, y(1)}; }
  double terminal_penalty(const State& y) const { return y.squaredNorm(); }
  State terminal_penalty_half_grad(const State& y) const { return y; }
  double blowup_threshold() const { return 1e12; }
};

struct CounterexampleCosts {
  double fth_cost = 0.0;      // optimized and simulated
  double closed_form = 0.0;   // 1/2 e^{2T} y0^2
  double ith_cost = 0.0;
  bool converged = false;
};

/// Optimizes the uncoupled problem on (0, T) from (y0, 0) and compares the
/// simulated optimal cost with its closed form.
inline CounterexampleCosts counterexample_costs(double y0, double horizon,
                                                double steps_per_unit = 1000.0) {
  if (!(horizon > 0.0) || !std::isfinite(y0)) {
    throw ContractViolation("counterexample_costs: need finite y0 and T > 0");
  }
  const TimeGrid grid = TimeGrid::with_density(0.0, horizon, steps_per_unit);
  const optim::OcpCallbacks cb = optim::make_rk4_callbacks(UncoupledModel{});
  const Eigen::VectorXd z = Eigen::Vector2d(y0, 0.0);
  const optim::SolveResult r =
      optim::solve_fth(cb, z, grid, std::nullopt, RowMatrix::Zero(grid.size(), 1),
                       optim::SolveOptions{});
  CounterexampleCosts out;
  out.fth_cost = r.cost.total;
  out.closed_form = 0.5 * std::exp(2.0 * horizon) * y0 * y0;
  out.ith_cost = 0.0;
  out.converged = r.converged;
  return out;
}

}  // namespace fthlab::lqr
