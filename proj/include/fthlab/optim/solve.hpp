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

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "fthlab/core/errors.hpp"
#include "fthlab/optim/bb.hpp"
#include "fthlab/optim/ocp.hpp"

namespace fthlab::optim {

struct SolveOptions {
  double tolerance = 1e-8;
  int max_iterations = 5000;
  double relative_cost_change = 1e-12;
  int memory = 10;
  int max_halvings = 20;
  double alpha_min = 1e-10;
  double alpha_max = 1e6;
  double initial_step = 1.0;
};

struct TraceRow {
  int iter;
  double cost;
  double grad_norm;
  double step;
};

struct SolveResult {
  ControlSignal control;
  StatePath state;
  CostBreakdown cost;
  int iterations = 0;
  double final_projected_gradient_norm = 0.0;
  bool converged = false;
  std::vector<TraceRow> trace;
};

namespace detail {

struct Iterate {
  ControlSignal u;
  StatePath y;
  CostBreakdown cost;
  RowMatrix gradient;
  double residual;
};

inline Iterate evaluate(const OcpCallbacks& cb, ControlSignal u, StatePath y,
                        CostBreakdown cost,
                        std::optional<double> box,
                        const Eigen::VectorXd& weights) {
  const StatePath p = cb.adjoint_solve(y, u);
  RowMatrix g = cb.gradient_assemble(y, p, u);
  if (g.rows() != u.values().rows() || g.cols() != u.values().cols()) {
    throw ContractViolation("gradient_assemble returned the wrong shape");
  }
  const double res =
      weighted_norm(u.values() - project_box(u.values() - g, box), weights);
  return {std::move(u), std::move(y), cost, std::move(g), res};
}

}  // namespace detail

/// Projected gradient descent with Barzilai-Borwein steps and a
/// non-monotone safeguard on the reduced cost u -> J(y(u), u).
///
/// Stops when the projected-gradient residual drops below the tolerance, when
/// the relative cost change between accepted iterates falls below
/// relative_cost_change, or at the iteration cap. Only the first case sets
/// converged. A blow-up of the forward solve under u0 is reported as
/// BlowUpError; later blow-ups during the line search only shrink the step.
inline SolveResult solve_fth(const OcpCallbacks& cb, const Eigen::VectorXd& z,
                             const TimeGrid& grid,
                             std::optional<double> box_bound,
                             const RowMatrix& u0,
                             const SolveOptions& opt = {}) {
  if (u0.rows() != grid.size()) {
    throw ContractViolation("solve_fth: initial guess does not match grid");
  }
  if (box_bound && u0.cwiseAbs().maxCoeff() > *box_bound) {
    throw ContractViolation("solve_fth: initial guess violates the box");
  }
  const Eigen::VectorXd weights = quadrature_weights(grid);

  auto forward = [&](const RowMatrix& values) {
    ControlSignal u(grid, values, box_bound);
    StatePath y = cb.forward_solve(z, u);
    CostBreakdown c = cb.cost_eval(y, u);
    return std::make_tuple(std::move(u), std::move(y), c);
  };

  std::optional<detail::Iterate> cur;
  try {
    auto [u, y, c] = forward(u0);
    cur = detail::evaluate(cb, std::move(u), std::move(y), c, box_bound,
                           weights);
  } catch (const BlowUpError& e) {
    throw BlowUpError(e.time(), e.node(),
                      "forward solve blew up under the initial control; "
                      "try a different initial guess");
  }

  std::vector<TraceRow> trace;
  trace.push_back({0, cur->cost.total, cur->residual, 0.0});

  BbState bb;
  bb.alpha_min = opt.alpha_min;
  bb.alpha_max = opt.alpha_max;
  bb.prev_control = cur->u.values();
  bb.prev_gradient = cur->gradient;
  double step = std::clamp(opt.initial_step, opt.alpha_min, opt.alpha_max);

  std::deque<double> memory{cur->cost.total};
  int iter = 0;
  while (iter < opt.max_iterations && cur->residual > opt.tolerance) {
    ++iter;
    const double reference = *std::max_element(memory.begin(), memory.end());
    double alpha = step;
    bool accepted = false;
    bool fallback = false;
    std::optional<std::tuple<ControlSignal, StatePath, CostBreakdown>> trial;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      const RowMatrix cand =
          project_box(cur->u.values() - alpha * cur->gradient, box_bound);
      try {
        auto t = forward(cand);
        if (std::isfinite(std::get<2>(t).total) &&
            std::get<2>(t).total <= reference) {
          trial = std::move(t);
          accepted = true;
          break;
        }
      } catch (const BlowUpError&) {
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      alpha = opt.alpha_min;
      fallback = true;
      trial = forward(
          project_box(cur->u.values() - alpha * cur->gradient, box_bound));
    }
    auto& [u, y, c] = *trial;
    const double previous = cur->cost.total;
    cur = detail::evaluate(cb, std::move(u), std::move(y), c, box_bound,
                           weights);
    trace.push_back({iter, cur->cost.total, cur->residual, alpha});

    auto upd = bb_step(bb, cur->u.values(), cur->gradient, weights);
    bb = std::move(upd.state);
    step = upd.step;

    memory.push_back(cur->cost.total);
    while (static_cast<int>(memory.size()) > opt.memory) memory.pop_front();

    const double change =
        std::abs(cur->cost.total - previous) /
        std::max(std::abs(previous), std::numeric_limits<double>::min());
    if (!fallback && change < opt.relative_cost_change) break;
  }

  SolveResult r{cur->u, cur->y, cur->cost, iter, cur->residual,
                cur->residual <= opt.tolerance, std::move(trace)};
  return r;
}

/// Central-difference reduced gradient for selected (node, channel) entries,
/// divided by the node's quadrature weight so it is comparable with the
/// adjoint gradient. Box bounds are ignored.
inline std::vector<double> finite_difference_gradient(
    const OcpCallbacks& cb, const Eigen::VectorXd& z, const ControlSignal& u,
    double h, const std::vector<std::pair<int, int>>& entries) {
  if (!(h > 0.0)) throw ContractViolation("finite_difference_gradient: h <= 0");
  const TimeGrid& grid = u.grid();
  auto cost_at = [&](const RowMatrix& v) {
    const ControlSignal uc(grid, v);
    return cb.cost_eval(cb.forward_solve(z, uc), uc).total;
  };
  std::vector<double> out;
  out.reserve(entries.size());
  RowMatrix v = u.values();
  for (const auto& [k, j] : entries) {
    const double base = v(k, j);
    v(k, j) = base + h;
    const double plus = cost_at(v);
    v(k, j) = base - h;
    const double minus = cost_at(v);
    v(k, j) = base;
    out.push_back((plus - minus) / (2.0 * h * grid.weight(k)));
  }
  return out;
}

/// Full central-difference gradient, every entry.
inline RowMatrix finite_difference_gradient(const OcpCallbacks& cb,
                                            const Eigen::VectorXd& z,
                                            const ControlSignal& u, double h) {
  std::vector<std::pair<int, int>> entries;
  for (int k = 0; k < u.grid().size(); ++k) {
    for (int j = 0; j < u.channels(); ++j) entries.emplace_back(k, j);
  }
  const auto flat = finite_difference_gradient(cb, z, u, h, entries);
  RowMatrix g(u.grid().size(), u.channels());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    g(entries[i].first, entries[i].second) = flat[i];
  }
  return g;
}

}  // namespace fthlab::optim
