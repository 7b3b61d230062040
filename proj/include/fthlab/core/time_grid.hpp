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

#include <cmath>
#include <string>

#include "fthlab/core/errors.hpp"

namespace fthlab {

/// Uniform partition of [t_start, t_end] into n_steps intervals.
class TimeGrid {
 public:
  TimeGrid(double t_start, double t_end, int n_steps)
      : t_start_(t_start), t_end_(t_end), n_steps_(n_steps) {
    if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_end > t_start)) {
      throw ContractViolation("TimeGrid requires finite t_end > t_start");
    }
    if (n_steps < 2) {
      throw ContractViolation("TimeGrid requires n_steps >= 2, got " +
                              std::to_string(n_steps));
    }
    dt_ = (t_end_ - t_start_) / n_steps_;
  }

  /// Grid on [t_start, t_end] with round((t_end - t_start) * density) steps.
  static TimeGrid with_density(double t_start, double t_end,
                               double steps_per_unit) {
    const long n = std::lround((t_end - t_start) * steps_per_unit);
    return TimeGrid(t_start, t_end, static_cast<int>(n));
  }

  double t_start() const noexcept { return t_start_; }
  double t_end() const noexcept { return t_end_; }
  int n_steps() const noexcept { return n_steps_; }
  int size() const noexcept { return n_steps_ + 1; }
  double dt() const noexcept { return dt_; }
  double length() const noexcept { return t_end_ - t_start_; }

  double node(int k) const noexcept {
    return k == n_steps_ ? t_end_ : t_start_ + k * dt_;
  }

  /// Trapezoid quadrature weight of node k.
  double weight(int k) const noexcept {
    return (k == 0 || k == n_steps_) ? 0.5 * dt_ : dt_;
  }

  bool contains(double t, double slack = 1e-12) const noexcept {
    return t >= t_start_ - slack && t <= t_end_ + slack;
  }

  /// Index of the node nearest t, or -1 if t is not a node to within tol*dt.
  int node_index(double t, double tol = 1e-6) const noexcept {
    const double k = (t - t_start_) / dt_;
    const double r = std::round(k);
    if (std::abs(k - r) > tol || r < 0 || r > n_steps_) return -1;
    return static_cast<int>(r);
  }

 private:
  double t_start_;
  double t_end_;
  int n_steps_;
  double dt_;
};

}  // namespace fthlab
