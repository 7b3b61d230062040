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
#include <concepts>
#include <memory>

#include "fthlab/core/cost.hpp"
#include "fthlab/core/errors.hpp"
#include "fthlab/core/signals.hpp"
#include "fthlab/optim/ocp.hpp"

namespace fthlab::optim {

/// A control-affine ODE  y' = drift(t, y) + B u  with a quadratic-type cost
///   1/2 int |Q(y)|^2 + 1/2 int |u|^2 + 1/2 |P(y(T))|^2.
///
/// state_penalty returns |Q(y)|^2 and state_penalty_half_grad the gradient of
/// 1/2 |Q(y)|^2; the terminal pair is analogous. drift_vjp(t, y, v) returns
/// (d drift / dy)^T v.
template <class M>
concept ControlAffineModel = requires(const M& m, double t,
                                      const typename M::State& y) {
  typename M::State;
  typename M::Control;
  { m.drift(t, y) } -> std::convertible_to<typename M::State>;
  { m.drift_vjp(t, y, y) } -> std::convertible_to<typename M::State>;
  { m.input() };
  { m.state_penalty(y) } -> std::convertible_to<double>;
  { m.state_penalty_half_grad(y) } -> std::convertible_to<typename M::State>;
  { m.terminal_penalty(y) } -> std::convertible_to<double>;
  { m.terminal_penalty_half_grad(y) } -> std::convertible_to<typename M::State>;
  { m.blowup_threshold() } -> std::convertible_to<double>;
};

namespace rk4_detail {

template <ControlAffineModel M>
typename M::Control control_row(const RowMatrix& u, int k) {
  return u.row(k).transpose();
}

template <ControlAffineModel M>
struct Stages {
  typename M::State y2, y3, y4;
};

template <ControlAffineModel M>
Stages<M> stages(const M& m, double t0, double h, const typename M::State& y,
                 const typename M::Control& u0, const typename M::Control& u1) {
  const auto b = m.input();
  const typename M::Control um = 0.5 * (u0 + u1);
  const double tm = t0 + 0.5 * h;
  Stages<M> s;
  const typename M::State k1 = m.drift(t0, y) + b * u0;
  s.y2 = y + 0.5 * h * k1;
  const typename M::State k2 = m.drift(tm, s.y2) + b * um;
  s.y3 = y + 0.5 * h * k2;
  const typename M::State k3 = m.drift(tm, s.y3) + b * um;
  s.y4 = y + h * k3;
  return s;
}

}  // namespace rk4_detail

/// Classical RK4 with the control interpolated linearly between nodes.
/// Throws BlowUpError once |y| exceeds the model's threshold.
template <ControlAffineModel M>
RowMatrix rk4_forward(const M& m, const TimeGrid& grid,
                      const typename M::State& z, const RowMatrix& u) {
  using State = typename M::State;
  const int n = grid.n_steps();
  const double h = grid.dt();
  const auto b = m.input();
  RowMatrix y(grid.size(), z.size());
  State cur = z;
  y.row(0) = cur.transpose();
  for (int k = 0; k < n; ++k) {
    const double t0 = grid.node(k);
    const double t1 = grid.node(k + 1);
    const double tm = t0 + 0.5 * h;
    const typename M::Control u0 = rk4_detail::control_row<M>(u, k);
    const typename M::Control u1 = rk4_detail::control_row<M>(u, k + 1);
    const typename M::Control um = 0.5 * (u0 + u1);
    const State k1 = m.drift(t0, cur) + b * u0;
    const State k2 = m.drift(tm, cur + 0.5 * h * k1) + b * um;
    const State k3 = m.drift(tm, cur + 0.5 * h * k2) + b * um;
    const State k4 = m.drift(t1, cur + h * k3) + b * u1;
    cur += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!cur.allFinite() || cur.cwiseAbs().maxCoeff() > m.blowup_threshold()) {
      throw BlowUpError(t1, k + 1, "state exceeded the blow-up threshold");
    }
    y.row(k + 1) = cur.transpose();
  }
  return y;
}

/// Exact reverse-mode derivative of the RK4 discretization and trapezoid
/// cost. Returns the nodal adjoint p with  dJ/du_k = w_k (u_k + B^T p_k).
template <ControlAffineModel M>
RowMatrix rk4_adjoint(const M& m, const TimeGrid& grid, const RowMatrix& y,
                      const RowMatrix& u) {
  using State = typename M::State;
  const int n = grid.n_steps();
  const double h = grid.dt();
  const Eigen::Index dim = y.cols();
  RowMatrix rho = RowMatrix::Zero(grid.size(), dim);

  auto node = [&](int k) -> State { return y.row(k).transpose(); };
  State ybar = m.terminal_penalty_half_grad(node(n)) +
               grid.weight(n) * m.state_penalty_half_grad(node(n));
  for (int k = n - 1; k >= 0; --k) {
    const double t0 = grid.node(k);
    const double t1 = grid.node(k + 1);
    const double tm = t0 + 0.5 * h;
    const State yk = node(k);
    const auto s = rk4_detail::stages(m, t0, h, yk,
                                      rk4_detail::control_row<M>(u, k),
                                      rk4_detail::control_row<M>(u, k + 1));
    State kb1 = (h / 6.0) * ybar;
    State kb2 = (h / 3.0) * ybar;
    State kb3 = (h / 3.0) * ybar;
    const State kb4 = (h / 6.0) * ybar;
    State yk_bar = ybar;

    const State y4b = m.drift_vjp(t1, s.y4, kb4);
    rho.row(k + 1) += kb4.transpose();
    yk_bar += y4b;
    kb3 += h * y4b;

    const State y3b = m.drift_vjp(tm, s.y3, kb3);
    yk_bar += y3b;
    kb2 += 0.5 * h * y3b;

    const State y2b = m.drift_vjp(tm, s.y2, kb2);
    yk_bar += y2b;
    kb1 += 0.5 * h * y2b;

    yk_bar += m.drift_vjp(t0, yk, kb1);
    rho.row(k) += kb1.transpose();

    const State mid = 0.5 * (kb2 + kb3);
    rho.row(k) += mid.transpose();
    rho.row(k + 1) += mid.transpose();

    yk_bar += grid.weight(k) * m.state_penalty_half_grad(yk);
    ybar = yk_bar;
  }
  for (int k = 0; k <= n; ++k) rho.row(k) /= grid.weight(k);
  return rho;
}

template <ControlAffineModel M>
CostBreakdown rk4_cost(const M& m, const TimeGrid& grid, const RowMatrix& y,
                       const RowMatrix& u) {
  Eigen::VectorXd sp(grid.size());
  Eigen::VectorXd cp(grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    sp(k) = m.state_penalty(typename M::State(y.row(k).transpose()));
    cp(k) = u.row(k).squaredNorm();
  }
  const typename M::State yT = y.row(grid.n_steps()).transpose();
  return assemble_cost(sp, cp, m.terminal_penalty(yT), grid);
}

/// Binds a model to the generic solver interface.
template <ControlAffineModel M>
OcpCallbacks make_rk4_callbacks(M model) {
  auto m = std::make_shared<const M>(std::move(model));
  OcpCallbacks cb;
  cb.forward_solve = [m](const Eigen::VectorXd& z, const ControlSignal& u) {
    if (z.size() != typename M::State().size()) {
      throw ContractViolation("initial state has the wrong dimension");
    }
    const typename M::State z0 = z;
    return StatePath(u.grid(), rk4_forward(*m, u.grid(), z0, u.values()));
  };
  cb.adjoint_solve = [m](const StatePath& y, const ControlSignal& u) {
    return StatePath(y.grid(), rk4_adjoint(*m, y.grid(), y.values(), u.values()));
  };
  cb.gradient_assemble = [m](const StatePath&, const StatePath& p,
                             const ControlSignal& u) -> RowMatrix {
    const auto b = m->input();
    RowMatrix g = u.values();
    for (int k = 0; k < g.rows(); ++k) {
      g.row(k) += (b.transpose() * p.values().row(k).transpose()).transpose();
    }
    return g;
  };
  cb.cost_eval = [m](const StatePath& y, const ControlSignal& u) {
    return rk4_cost(*m, y.grid(), y.values(), u.values());
  };
  return cb;
}

}  // namespace fthlab::optim
