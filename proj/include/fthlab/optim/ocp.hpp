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
#include <functional>
#include <optional>
#include <vector>

#include "fthlab/core/cost.hpp"
#include "fthlab/core/signals.hpp"

namespace fthlab::optim {

/// The four problem-specific pieces a reduced-gradient solver needs.
///
/// adjoint_solve returns the nodal adjoint p on the state grid, normalized so
/// that gradient_assemble(y, p, u) is the Riesz representative of the reduced
/// gradient in the trapezoid-weighted L2 inner product on the control grid.
struct OcpCallbacks {
  std::function<StatePath(const Eigen::VectorXd& z, const ControlSignal& u)>
      forward_solve;
  std::function<StatePath(const StatePath& y, const ControlSignal& u)>
      adjoint_solve;
  std::function<RowMatrix(const StatePath& y, const StatePath& p,
                          const ControlSignal& u)>
      gradient_assemble;
  std::function<CostBreakdown(const StatePath& y, const ControlSignal& u)>
      cost_eval;
};

/// sum_k w_k <a_k, b_k>
inline double weighted_dot(const RowMatrix& a, const RowMatrix& b,
                           const Eigen::VectorXd& weights) {
  return (a.cwiseProduct(b).rowwise().sum().array() * weights.array()).sum();
}

inline double weighted_norm(const RowMatrix& a, const Eigen::VectorXd& weights) {
  return std::sqrt(std::max(0.0, weighted_dot(a, a, weights)));
}

/// Pointwise projection onto [-bound, bound].
inline RowMatrix project_box(const RowMatrix& values, double bound) {
  return values.cwiseMax(-bound).cwiseMin(bound);
}

inline RowMatrix project_box(const RowMatrix& values,
                             std::optional<double> bound) {
  return bound ? project_box(values, *bound) : values;
}

}  // namespace fthlab::optim
