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
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fthlab/core/cost.hpp"
#include "fthlab/core/errors.hpp"
#include "fthlab/core/signals.hpp"
#include "fthlab/lqr/periodic_lq.hpp"

namespace fthlab::lqr {

/// Symmetric matrices Pi(t_k) on a grid. A periodic path covers one period
/// and is extended by t mod period.
struct RiccatiPath {
  TimeGrid grid;
  std::vector<Eigen::Matrix2d> matrices;
  bool periodic = false;

  const Eigen::Matrix2d& at(int k) const { return matrices.at(k); }
};

/// dPi/dt from  Pi' + A^T Pi + Pi A - Pi B B^T Pi + I = 0.
inline Eigen::Matrix2d riccati_rhs(const PeriodicLQ& lq, double t,
                                   const Eigen::Matrix2d& pi) {
  const Eigen::Matrix2d a = lq.a(t);
  const Eigen::Vector2d pb = pi * lq.b;
  return -(a.transpose() * pi + pi * a - pb * pb.transpose() +
           Eigen::Matrix2d::Identity());
}

namespace riccati_detail {

inline Eigen::Matrix2d symmetrize(const Eigen::Matrix2d& m) {
  return 0.5 * (m + m.transpose());
}

/// One backward RK4 step from t (value pi) to t - h.
inline Eigen::Matrix2d step_back(const PeriodicLQ& lq, double t, double h,
                                 const Eigen::Matrix2d& pi) {
  const double hb = -h;
  const Eigen::Matrix2d k1 = riccati_rhs(lq, t, pi);
  const Eigen::Matrix2d k2 = riccati_rhs(lq, t + 0.5 * hb, pi + 0.5 * hb * k1);
  const Eigen::Matrix2d k3 = riccati_rhs(lq, t + 0.5 * hb, pi + 0.5 * hb * k2);
  const Eigen::Matrix2d k4 = riccati_rhs(lq, t + hb, pi + hb * k3);
  return symmetrize(pi + (hb / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

inline std::vector<Eigen::Matrix2d> sweep(const PeriodicLQ& lq,
                                          const TimeGrid& grid,
                                          const Eigen::Matrix2d& terminal) {
  std::vector<Eigen::Matrix2d> out(grid.size());
  out.back() = symmetrize(terminal);
  for (int k = grid.n_steps(); k > 0; --k) {
    out[k - 1] = step_back(lq, grid.node(k), grid.dt(), out[k]);
    if (!out[k - 1].allFinite()) {
      throw BlowUpError(grid.node(k - 1), k - 1, "Riccati solution diverged");
    }
  }
  return out;
}

}  // namespace riccati_detail

/// Backward RK4 for the finite-horizon Riccati equation with Pi(T) = chi I.
inline RiccatiPath solve_differential_riccati(const PeriodicLQ& lq,
                                              const TimeGrid& grid) {
  return {grid,
          riccati_detail::sweep(lq, grid, lq.chi * Eigen::Matrix2d::Identity()),
          false};
}

/// Fixed-point iteration over periods, starting from Pi = 0, until two
/// consecutive one-period sweeps differ by at most tol (Frobenius, sup over
/// the grid).
inline RiccatiPath solve_periodic_riccati(const PeriodicLQ& lq,
                                          int steps_per_period,
                                          double tol = 1e-10,
                                          int max_periods = 200) {
  if (steps_per_period < 100) {
    throw ContractViolation("solve_periodic_riccati: need >= 100 steps");
  }
  const TimeGrid grid(0.0, lq.period, steps_per_period);
  std::vector<Eigen::Matrix2d> prev =
      riccati_detail::sweep(lq, grid, Eigen::Matrix2d::Zero());
  for (int m = 1; m < max_periods; ++m) {
    std::vector<Eigen::Matrix2d> next = riccati_detail::sweep(lq, grid, prev.front());
    double diff = 0.0;
    for (int k = 0; k < grid.size(); ++k) {
      diff = std::max(diff, (next[k] - prev[k]).norm());
    }
    prev = std::move(next);
    if (diff <= tol) return {grid, std::move(prev), true};
  }
  throw ConvergenceError("periodic Riccati iteration did not converge in " +
                         std::to_string(max_periods) + " periods");
}

/// Pi at time t: node values, cubic Hermite at step midpoints (slopes from
/// the Riccati right-hand side), linear elsewhere.
inline Eigen::Matrix2d riccati_at(const PeriodicLQ& lq, const RiccatiPath& path,
                                  double t) {
  const TimeGrid& g = path.grid;
  double tl = t;
  if (path.periodic) {
    tl = t - lq.period * std::floor((t - g.t_start()) / lq.period);
    if (tl > g.t_end()) tl = g.t_end();
  }
  if (!g.contains(tl, 1e-9)) throw DomainError("Riccati path does not cover t");
  const double pos = (tl - g.t_start()) / g.dt();
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < 1e-7) {
    return path.at(std::clamp(static_cast<int>(nearest), 0, g.n_steps()));
  }
  const int k = std::clamp(static_cast<int>(std::floor(pos)), 0, g.n_steps() - 1);
  const double theta = pos - k;
  const Eigen::Matrix2d& p0 = path.at(k);
  const Eigen::Matrix2d& p1 = path.at(k + 1);
  if (std::abs(theta - 0.5) < 1e-7) {
    const Eigen::Matrix2d d0 = riccati_rhs(lq, g.node(k), p0);
    const Eigen::Matrix2d d1 = riccati_rhs(lq, g.node(k + 1), p1);
    return 0.5 * (p0 + p1) + (g.dt() / 8.0) * (d0 - d1);
  }
  return (1.0 - theta) * p0 + theta * p1;
}

/// Max Frobenius residual of the Riccati ODE over interior nodes, with
/// Pi' from fourth-order central differences. Next to a kink of phi the
/// stencil becomes one-sided so it never straddles the kink.
inline double riccati_residual(const PeriodicLQ& lq, const RiccatiPath& path) {
  const TimeGrid& g = path.grid;
  const int n = g.n_steps();
  const double h = g.dt();
  const auto& p = path.matrices;
  double worst = 0.0;
  auto kink = [&](int j) { return PeriodicLQ::is_kink(g.node(j), 1e-6 * h); };
  // A stencil is smooth when no kink lies strictly inside its span.
  auto clear = [&](int a, int b) {
    for (int j = a; j <= b; ++j) {
      if (kink(j)) return false;
    }
    return true;
  };
  for (int k = 2; k <= n - 2; ++k) {
    Eigen::Matrix2d d;
    if (clear(k - 1, k + 1)) {
      d = (-p[k + 2] + 8.0 * p[k + 1] - 8.0 * p[k - 1] + p[k - 2]) / (12.0 * h);
    } else if (k + 4 <= n && clear(k + 1, k + 3)) {
      d = (-25.0 * p[k] + 48.0 * p[k + 1] - 36.0 * p[k + 2] +
           16.0 * p[k + 3] - 3.0 * p[k + 4]) / (12.0 * h);
    } else if (k - 4 >= 0 && clear(k - 3, k - 1)) {
      d = (25.0 * p[k] - 48.0 * p[k - 1] + 36.0 * p[k - 2] -
           16.0 * p[k - 3] + 3.0 * p[k - 4]) / (12.0 * h);
    } else {
      continue;  // no smooth four-step stencil available
    }
    worst = std::max(worst, (d - riccati_rhs(lq, g.node(k), p[k])).norm());
  }
  return worst;
}

/// Fundamental matrix of y' = (A - B B^T Pi) y over one period from 0.
inline Eigen::Matrix2d monodromy(const PeriodicLQ& lq, const RiccatiPath& pi) {
  const TimeGrid& g = pi.grid;
  const double h = g.dt();
  auto f = [&](double t, const Eigen::Matrix2d& phi_m) -> Eigen::Matrix2d {
    const Eigen::Matrix2d p = riccati_at(lq, pi, t);
    return (lq.a(t) - lq.b * (lq.b.transpose() * p)) * phi_m;
  };
  Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
  for (int k = 0; k < g.n_steps(); ++k) {
    const double t = g.node(k);
    const Eigen::Matrix2d k1 = f(t, m);
    const Eigen::Matrix2d k2 = f(t + 0.5 * h, m + 0.5 * h * k1);
    const Eigen::Matrix2d k3 = f(t + 0.5 * h, m + 0.5 * h * k2);
    const Eigen::Matrix2d k4 = f(g.node(k + 1), m + h * k3);
    m += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return m;
}

inline double spectral_radius(const Eigen::Matrix2d& m) {
  return Eigen::EigenSolver<Eigen::Matrix2d>(m).eigenvalues().cwiseAbs().maxCoeff();
}

/// 1/2 z^T Pi(t) z.
inline double riccati_value(const PeriodicLQ& lq, const RiccatiPath& path,
                            double t, const Eigen::Vector2d& z) {
  return 0.5 * z.dot(riccati_at(lq, path, t) * z);
}

struct ClosedLoop {
  StatePath state;
  ControlSignal control;
  CostBreakdown cost;
};

/// RK4 simulation of y' = (A - B B^T Pi) y from lq.z with u = -B^T Pi y,
/// and its cost including the chi-weighted terminal term.
inline ClosedLoop closed_loop(const PeriodicLQ& lq, const RiccatiPath& pi,
                              const TimeGrid& grid) {
  if (std::abs(grid.dt() - pi.grid.dt()) > 1e-12 * pi.grid.dt()) {
    throw ContractViolation("closed_loop: grid step differs from Riccati path");
  }
  if (!pi.periodic &&
      (!pi.grid.contains(grid.t_start()) || !pi.grid.contains(grid.t_end()))) {
    throw ContractViolation("closed_loop: Riccati path does not cover grid");
  }
  const double h = grid.dt();
  auto f = [&](double t, const Eigen::Vector2d& y) -> Eigen::Vector2d {
    const Eigen::Matrix2d p = riccati_at(lq, pi, t);
    return lq.a(t) * y - lq.b * lq.b.dot(p * y);
  };
  RowMatrix y(grid.size(), 2);
  RowMatrix u(grid.size(), 1);
  Eigen::Vector2d cur = lq.z;
  y.row(0) = cur.transpose();
  for (int k = 0; k < grid.n_steps(); ++k) {
    const double t = grid.node(k);
    const Eigen::Vector2d k1 = f(t, cur);
    const Eigen::Vector2d k2 = f(t + 0.5 * h, cur + 0.5 * h * k1);
    const Eigen::Vector2d k3 = f(t + 0.5 * h, cur + 0.5 * h * k2);
    const Eigen::Vector2d k4 = f(grid.node(k + 1), cur + h * k3);
    cur += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    y.row(k + 1) = cur.transpose();
  }
  Eigen::VectorXd sp(grid.size());
  Eigen::VectorXd cp(grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    const Eigen::Vector2d yk = y.row(k).transpose();
    u(k, 0) = -lq.b.dot(riccati_at(lq, pi, grid.node(k)) * yk);
    sp(k) = yk.squaredNorm();
    cp(k) = u(k, 0) * u(k, 0);
  }
  const Eigen::Vector2d yT = y.row(grid.n_steps()).transpose();
  CostBreakdown c = assemble_cost(sp, cp, lq.chi * yT.squaredNorm(), grid);
  return {StatePath(grid, std::move(y)), ControlSignal(grid, std::move(u)), c};
}

}  // namespace fthlab::lqr
