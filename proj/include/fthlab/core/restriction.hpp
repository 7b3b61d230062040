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
#include <functional>

#include "fthlab/core/cost.hpp"
#include "fthlab/core/errors.hpp"
#include "fthlab/core/signals.hpp"
#include "fthlab/core/time_grid.hpp"

namespace fthlab {

/// Sub-interval (s, r) on which horizon ladders are compared.
struct Window {
  double s = 0.0;
  double r = 1.0;
};

/// Squared spatial norm of one node's value row. Defaults to the Euclidean
/// sum over channels; the PDE passes the mass-matrix norm.
using RowSquaredNorm =
    std::function<double(const Eigen::Ref<const Eigen::RowVectorXd>&)>;

/// Piecewise-linear evaluation of node data at time t.
inline Eigen::RowVectorXd sample_linear(const TimeGrid& grid,
                                        const RowMatrix& values, double t) {
  if (!grid.contains(t, 1e-9 * std::max(1.0, std::abs(t)))) {
    throw DomainError("sample_linear: t outside grid");
  }
  const double pos = (t - grid.t_start()) / grid.dt();
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < 1e-9) {
    const int k = std::clamp(static_cast<int>(nearest), 0, grid.n_steps());
    return values.row(k);
  }
  int k = std::clamp(static_cast<int>(std::floor(pos)), 0, grid.n_steps() - 1);
  const double theta = pos - k;
  return (1.0 - theta) * values.row(k) + theta * values.row(k + 1);
}

/// Discrete L2((s,r)) norm of a - b. Both series are resampled linearly onto
/// the nodes of the finer grid inside the window.
inline double restriction_error(const TimeGrid& grid_a, const RowMatrix& a,
                                const TimeGrid& grid_b, const RowMatrix& b,
                                Window window,
                                const RowSquaredNorm& sq_norm = {}) {
  if (!(window.r > window.s)) {
    throw DomainError("restriction_error: empty window");
  }
  if (!grid_a.contains(window.s) || !grid_a.contains(window.r) ||
      !grid_b.contains(window.s) || !grid_b.contains(window.r)) {
    throw DomainError("restriction_error: window outside a grid");
  }
  if (a.cols() != b.cols()) {
    throw ContractViolation("restriction_error: channel count mismatch");
  }
  const TimeGrid& fine = grid_a.dt() <= grid_b.dt() ? grid_a : grid_b;
  const int i0 = fine.node_index(window.s);
  const int i1 = fine.node_index(window.r);
  if (i0 < 0 || i1 < 0 || i1 - i0 < 2) {
    throw ContractViolation(
        "restriction_error: window ends must be nodes of the finer grid");
  }
  const TimeGrid sub(fine.node(i0), fine.node(i1), i1 - i0);
  Eigen::VectorXd sq(sub.size());
  for (int k = 0; k < sub.size(); ++k) {
    const double t = fine.node(i0 + k);
    const Eigen::RowVectorXd d =
        sample_linear(grid_a, a, t) - sample_linear(grid_b, b, t);
    sq(k) = sq_norm ? sq_norm(d) : d.squaredNorm();
  }
  return std::sqrt(std::max(0.0, trapezoid_l2_sq(sq, sub)));
}

inline double restriction_error(const StatePath& a, const StatePath& b,
                                Window window,
                                const RowSquaredNorm& sq_norm = {}) {
  return restriction_error(a.grid(), a.values(), b.grid(), b.values(), window,
                           sq_norm);
}

inline double restriction_error(const ControlSignal& a, const ControlSignal& b,
                                Window window) {
  return restriction_error(a.grid(), a.values(), b.grid(), b.values(), window);
}

}  // namespace fthlab
