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
#include <utility>

#include "fthlab/core/errors.hpp"
#include "fthlab/core/signals.hpp"
#include "fthlab/optim/rk4_system.hpp"

// Scalar nonlinear system  y' = y^(2n-1) + u  with running cost
//   1/2 int  y^(4n-2)/(2n-1) + u^2  and no terminal penalty.
// Its infinite-horizon problem is solved in closed form by the feedback
// u = -w y^(2n-1), where w is the positive root of 0 = 2w - w^2 + 1/(2n-1).

namespace fthlab::scalar {

struct RiccatiRoot {
  double xi;  // sqrt(1 + 1/(2n-1))
  double w;   // 1 + xi
};

inline RiccatiRoot riccati_root(int n) {
  if (n < 1) throw ContractViolation("riccati_root: n must be >= 1");
  const double xi = std::sqrt(1.0 + 1.0 / (2.0 * n - 1.0));
  return {xi, 1.0 + xi};
}

/// Residual of the scalar Riccati equation at w.
inline double riccati_residual(int n, double w) {
  return 2.0 * w - w * w + 1.0 / (2.0 * n - 1.0);
}

inline double ipow(double x, int p) {
  double r = 1.0;
  double b = x;
  for (int e = p; e > 0; e >>= 1) {
    if (e & 1) r *= b;
    b *= b;
  }
  return r;
}

struct ScalarProblem {
  int n = 2;
  double y0 = 1.0;
  double xi = 0.0;
  double w = 0.0;

  static ScalarProblem make(int n, double y0) {
    const RiccatiRoot r = riccati_root(n);
    return {n, y0, r.xi, r.w};
  }
};

/// Infinite-horizon value (1 + xi) / (2n) * y0^(2n).
inline double ith_value(const ScalarProblem& p) {
  return p.w / (2.0 * p.n) * ipow(p.y0, 2 * p.n);
}

inline double ith_value_at(const ScalarProblem& p, double y) {
  return p.w / (2.0 * p.n) * ipow(y, 2 * p.n);
}

/// Closed-form solution of y' = -xi y^(2n-1), y(0) = y0.
///
/// For n > 1 the inner term is y0^(-2(n-1)); this is what separation of
/// variables gives and what the RK4 oracle in the tests confirms. A variant
/// with y0^(-2n) agrees only when |y0| = 1.
inline double analytic_state(const ScalarProblem& p, double t) {
  if (p.n == 1) return p.y0 * std::exp(-p.xi * t);
  if (p.y0 == 0.0) return 0.0;
  const double m = 2.0 * (p.n - 1);
  const double base = std::pow(std::abs(p.y0), -m) + m * p.xi * t;
  return std::copysign(std::pow(base, -1.0 / m), p.y0);
}

/// The feedback-controlled system and cost as an RK4 model.
struct ScalarModel {
  using State = Eigen::Matrix<double, 1, 1>;
  using Control = Eigen::Matrix<double, 1, 1>;

  int n = 2;
  double blowup = 1e8;

  State drift(double, const State& y) const {
    return State(ipow(y(0), 2 * n - 1));
  }
  State drift_vjp(double, const State& y, const State& v) const {
    return State((2.0 * n - 1.0) * ipow(y(0), 2 * n - 2) * v(0));
  }
  Eigen::Matrix<double, 1, 1> input() const {
    return Eigen::Matrix<double, 1, 1>::Ones();
  }
  double state_penalty(const State& y) const {
    return ipow(y(0), 4 * n - 2) / (2.0 * n - 1.0);
  }
  State state_penalty_half_grad(const State& y) const {
    return State(ipow(y(0), 4 * n - 3));
  }
  double terminal_penalty(const State&) const { return 0.0; }
  State terminal_penalty_half_grad(const State&) const { return State::Zero(); }
  double blowup_threshold() const { return blowup; }
};

inline optim::OcpCallbacks scalar_callbacks(const ScalarProblem& p) {
  return optim::make_rk4_callbacks(ScalarModel{p.n, 1e8});
}

/// RK4 integration of the infinite-horizon closed loop on the grid, with the
/// control channel filled by u = -w y^(2n-1).
inline std::pair<StatePath, ControlSignal> ith_closed_loop(
    const ScalarProblem& p, const TimeGrid& grid) {
  const int q = 2 * p.n - 1;
  auto f = [&](double y) { return -p.xi * ipow(y, q); };
  const double h = grid.dt();
  RowMatrix y(grid.size(), 1);
  RowMatrix u(grid.size(), 1);
  double cur = p.y0;
  y(0, 0) = cur;
  for (int k = 0; k < grid.n_steps(); ++k) {
    const double k1 = f(cur);
    const double k2 = f(cur + 0.5 * h * k1);
    const double k3 = f(cur + 0.5 * h * k2);
    const double k4 = f(cur + h * k3);
    cur += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    y(k + 1, 0) = cur;
  }
  for (int k = 0; k < grid.size(); ++k) u(k, 0) = -p.w * ipow(y(k, 0), q);
  return {StatePath(grid, std::move(y)), ControlSignal(grid, std::move(u))};
}

/// Cost of a scalar pair under the running cost of this family.
inline CostBreakdown scalar_cost(const ScalarProblem& p, const StatePath& y,
                                 const ControlSignal& u) {
  return optim::rk4_cost(ScalarModel{p.n, 1e8}, y.grid(), y.values(),
                         u.values());
}

}  // namespace fthlab::scalar
