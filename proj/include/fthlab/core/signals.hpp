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
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "fthlab/core/errors.hpp"
#include "fthlab/core/time_grid.hpp"

namespace fthlab {

/// Node-major storage: row k holds the values at grid node k.
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Returns the first row holding a non-finite entry, or -1.
inline int first_non_finite_row(const RowMatrix& values) {
  for (Eigen::Index k = 0; k < values.rows(); ++k) {
    if (!values.row(k).allFinite()) return static_cast<int>(k);
  }
  return -1;
}

/// M-channel control values on a grid, optionally confined to the box
/// [-box_bound, box_bound]^M.
class ControlSignal {
 public:
  ControlSignal(TimeGrid grid, RowMatrix values,
                std::optional<double> box_bound = std::nullopt)
      : grid_(std::move(grid)), values_(std::move(values)), box_(box_bound) {
    if (values_.rows() != grid_.size()) {
      throw ContractViolation("ControlSignal: row count " +
                              std::to_string(values_.rows()) +
                              " does not match node count " +
                              std::to_string(grid_.size()));
    }
    if (values_.cols() < 1) {
      throw ContractViolation("ControlSignal needs at least one channel");
    }
    if (box_) {
      if (!(*box_ >= 0.0)) {
        throw ContractViolation("ControlSignal: box bound must be >= 0");
      }
      if (values_.cwiseAbs().maxCoeff() > *box_) {
        throw ContractViolation("ControlSignal: value outside the box");
      }
    }
  }

  static ControlSignal zeros(const TimeGrid& grid, int channels,
                             std::optional<double> box_bound = std::nullopt) {
    return ControlSignal(grid, RowMatrix::Zero(grid.size(), channels),
                         box_bound);
  }

  const TimeGrid& grid() const noexcept { return grid_; }
  const RowMatrix& values() const noexcept { return values_; }
  int channels() const noexcept { return static_cast<int>(values_.cols()); }
  std::optional<double> box_bound() const noexcept { return box_; }

 private:
  TimeGrid grid_;
  RowMatrix values_;
  std::optional<double> box_;
};

/// State (or adjoint) trajectory sampled at the grid nodes.
class StatePath {
 public:
  StatePath(TimeGrid grid, RowMatrix values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.rows() != grid_.size()) {
      throw ContractViolation("StatePath: row count does not match grid");
    }
    if (values_.cols() < 1) {
      throw ContractViolation("StatePath needs dim >= 1");
    }
    const int bad = first_non_finite_row(values_);
    if (bad >= 0) {
      throw BlowUpError(grid_.node(bad), bad, "non-finite state value");
    }
  }

  const TimeGrid& grid() const noexcept { return grid_; }
  const RowMatrix& values() const noexcept { return values_; }
  int dim() const noexcept { return static_cast<int>(values_.cols()); }

  Eigen::VectorXd at(int k) const { return values_.row(k).transpose(); }
  Eigen::VectorXd terminal() const { return at(grid_.n_steps()); }

 private:
  TimeGrid grid_;
  RowMatrix values_;
};

}  // namespace fthlab
