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
#include <numbers>
#include <utility>

#include "fthlab/optim/rk4_system.hpp"

namespace fthlab::lqr {

/// y' = phi(t) A0 y + B u,  phi(t) = 1 + |cos(pi t)|,  with cost
///   1/2 int |y|^2 + 1/2 int u^2 + 1/2 chi |y(T)|^2.
struct PeriodicLQ {
  Eigen::Matrix2d a_base = (Eigen::Matrix2d() << 1.0, 1.0, 1.0, -3.0).finished();
  Eigen::Vector2d b{0.0, 1.0};
  double period = 1.0;
  double chi = 0.0;
  Eigen::Vector2d z{1.0, 0.0};

  static double phi(double t) {
    return 1.0 + std::abs(std::cos(std::numbers::pi * t));
  }
  Eigen::Matrix2d a(double t) const { return phi(t) * a_base; }

  /// phi loses smoothness where cos(pi t) changes sign.
  static bool is_kink(double t, double tol = 1e-9) {
    const double s = t - 0.5;
    return std::abs(s - std::round(s)) < tol;
  }
};

/// Time-independent eigenvectors of A(t) with eigenvalues alpha(t).
struct ModalDecomposition {
  Eigen::Vector2d e_plus;
  Eigen::Vector2d e_minus;
  double base_plus;   // -1 + sqrt 5
  double base_minus;  // -1 - sqrt 5

  std::pair<double, double> alpha(double t) const {
    const double f = PeriodicLQ::phi(t);
    return {f * base_plus, f * base_minus};
  }

  /// Coefficients (z+, z-) with z = z+ e+ + z- e-.
  std::pair<double, double> coordinates(const Eigen::Vector2d& z) const {
    Eigen::Matrix2d e;
    e.col(0) = e_plus;
    e.col(1) = e_minus;
    const Eigen::Vector2d c = e.partialPivLu().solve(z);
    return {c(0), c(1)};
  }
};

inline ModalDecomposition modal_decomposition(const PeriodicLQ&) {
  const double s5 = std::sqrt(5.0);
  return {Eigen::Vector2d(1.0, -2.0 + s5), Eigen::Vector2d(1.0, -2.0 - s5),
          -1.0 + s5, -1.0 - s5};
}

/// Kalman-type rank test of [B, -A(t) B].
inline bool kalman_rank(const PeriodicLQ& lq, double t) {
  Eigen::Matrix2d k;
  k.col(0) = lq.b;
  k.col(1) = -lq.a(t) * lq.b;
  return std::abs(k.determinant()) > 1e-12;
}

/// d/dt |y|^2 = 2 y^T (A(t) y + B u).
inline double norm_rate(const PeriodicLQ& lq, double t,
                        const Eigen::Vector2d& y, double u) {
  return 2.0 * y.dot(lq.a(t) * y + lq.b * u);
}

/// RK4 model of the open-loop problem, for the adjoint-gradient route.
struct PeriodicLqModel {
  using State = Eigen::Vector2d;
  using Control = Eigen::Matrix<double, 1, 1>;

  PeriodicLQ lq;
  double blowup = 1e12;

  State drift(double t, const State& y) const { return lq.a(t) * y; }
  State drift_vjp(double t, const State&, const State& v) const {
    return lq.a(t).transpose() * v;
  }
  Eigen::Matrix<double, 2, 1> input() const { return lq.b; }
  double state_penalty(const State& y) const { return y.squaredNorm(); }
  State state_penalty_half_grad(const State& y) const { return y; }
  double terminal_penalty(const State& y) const { return lq.chi * y.squaredNorm(); }
  State terminal_penalty_half_grad(const State& y) const { return lq.chi * y; }
  double blowup_threshold() const { return blowup; }
};

inline optim::OcpCallbacks lqr_callbacks(const PeriodicLQ& lq) {
  return optim::make_rk4_callbacks(PeriodicLqModel{lq, 1e12});
}

}  // namespace fthlab::lqr
