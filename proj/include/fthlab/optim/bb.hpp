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

#include "fthlab/optim/ocp.hpp"

namespace fthlab::optim {

/// Barzilai-Borwein memory: the last accepted iterate and its gradient.
struct BbState {
  int iter = 0;
  RowMatrix prev_control;
  RowMatrix prev_gradient;
  double step = 1.0;
  double alpha_min = 1e-10;
  double alpha_max = 1e6;
  bool use_bb1 = true;  // alternates every call
};

struct BbUpdate {
  BbState state;
  double step;
};

/// Next step length from the differences to the stored iterate. Long (BB1)
/// and short (BB2) quotients alternate; non-positive curvature falls back to
/// alpha_min.
inline BbUpdate bb_step(const BbState& state, const RowMatrix& new_control,
                        const RowMatrix& new_gradient,
                        const Eigen::VectorXd& weights) {
  if (new_control.rows() != state.prev_control.rows() ||
      new_control.cols() != state.prev_control.cols() ||
      new_gradient.rows() != state.prev_gradient.rows() ||
      new_gradient.cols() != state.prev_gradient.cols()) {
    throw ContractViolation("bb_step: shape mismatch");
  }
  const RowMatrix du = new_control - state.prev_control;
  const RowMatrix dg = new_gradient - state.prev_gradient;
  const double sug = weighted_dot(du, dg, weights);

  double step = state.alpha_min;
  if (sug > 0.0 && std::isfinite(sug)) {
    const double raw = state.use_bb1 ? weighted_dot(du, du, weights) / sug
                                     : sug / weighted_dot(dg, dg, weights);
    if (std::isfinite(raw) && raw > 0.0) {
      step = std::clamp(raw, state.alpha_min, state.alpha_max);
    }
  }

  BbState next = state;
  next.iter = state.iter + 1;
  next.prev_control = new_control;
  next.prev_gradient = new_gradient;
  next.step = step;
  next.use_bb1 = !state.use_bb1;
  return {std::move(next), step};
}

}  // namespace fthlab::optim
