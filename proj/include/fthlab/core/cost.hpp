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
#include <string>

#include "fthlab/core/errors.hpp"
#include "fthlab/core/time_grid.hpp"

namespace fthlab {

/// Split of the finite-horizon cost into its three quadratic pieces.
struct CostBreakdown {
  double state_term = 0.0;     // 1/2 int |Q(y)|^2
  double control_term = 0.0;   // 1/2 int |N(u)|^2
  double terminal_term = 0.0;  // 1/2 |P(y(T))|^2
  double total = 0.0;
};

/// Trapezoidal approximation of the integral of node values over the grid.
inline double trapezoid_l2_sq(const Eigen::Ref<const Eigen::VectorXd>& values,
                              const TimeGrid& grid) {
  if (values.size() != grid.size()) {
    throw ContractViolation("trapezoid_l2_sq: expected " +
                            std::to_string(grid.size()) + " values, got " +
                            std::to_string(values.size()));
  }
  const Eigen::Index n = values.size() - 1;
  const double interior = values.segment(1, n - 1).sum();
  return grid.dt() * (interior + 0.5 * (values(0) + values(n)));
}

inline CostBreakdown assemble_cost(
    const Eigen::Ref<const Eigen::VectorXd>& state_pen,
    const Eigen::Ref<const Eigen::VectorXd>& ctrl_pen, double terminal,
    const TimeGrid& grid) {
  CostBreakdown c;
  c.state_term = 0.5 * trapezoid_l2_sq(state_pen, grid);
  c.control_term = 0.5 * trapezoid_l2_sq(ctrl_pen, grid);
  c.terminal_term = 0.5 * terminal;
  c.total = c.state_term + c.control_term + c.terminal_term;
  return c;
}

/// Trapezoid weights of every node, as a vector.
inline Eigen::VectorXd quadrature_weights(const TimeGrid& grid) {
  Eigen::VectorXd w(grid.size());
  for (int k = 0; k < grid.size(); ++k) w(k) = grid.weight(k);
  return w;
}

}  // namespace fthlab
