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
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "fthlab/core/errors.hpp"

namespace fthlab::pde {

/// Square tridiagonal matrix; lower(i) sits at (i+1, i), upper(i) at (i, i+1).
struct Tridiagonal {
  Eigen::VectorXd lower;
  Eigen::VectorXd diag;
  Eigen::VectorXd upper;

  int size() const { return static_cast<int>(diag.size()); }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    const int n = size();
    if (v.size() != n) throw ContractViolation("Tridiagonal::apply: size mismatch");
    Eigen::VectorXd out = diag.cwiseProduct(v);
    out.head(n - 1) += upper.cwiseProduct(v.tail(n - 1));
    out.tail(n - 1) += lower.cwiseProduct(v.head(n - 1));
    return out;
  }

  Eigen::MatrixXd dense() const {
    const int n = size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = diag(i);
    for (int i = 0; i + 1 < n; ++i) {
      m(i + 1, i) = lower(i);
      m(i, i + 1) = upper(i);
    }
    return m;
  }

  /// a * this + b * other
  Tridiagonal combine(double a, const Tridiagonal& other, double b) const {
    return {a * lower + b * other.lower, a * diag + b * other.diag,
            a * upper + b * other.upper};
  }
};

/// Thomas-algorithm factorization, computed once and reused.
class TridiagonalLu {
 public:
  explicit TridiagonalLu(const Tridiagonal& t)
      : lower_(t.lower), pivot_(t.size()), upper_(t.upper) {
    const int n = t.size();
    pivot_(0) = t.diag(0);
    for (int i = 1; i < n; ++i) {
      if (pivot_(i - 1) == 0.0) throw ContractViolation("TridiagonalLu: zero pivot");
      pivot_(i) = t.diag(i) - lower_(i - 1) * upper_(i - 1) / pivot_(i - 1);
    }
    if (pivot_(n - 1) == 0.0) throw ContractViolation("TridiagonalLu: zero pivot");
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    const int n = static_cast<int>(pivot_.size());
    if (rhs.size() != n) throw ContractViolation("TridiagonalLu::solve: size mismatch");
    Eigen::VectorXd x = rhs;
    for (int i = 1; i < n; ++i) x(i) -= lower_(i - 1) / pivot_(i - 1) * x(i - 1);
    x(n - 1) /= pivot_(n - 1);
    for (int i = n - 2; i >= 0; --i) x(i) = (x(i) - upper_(i) * x(i + 1)) / pivot_(i);
    return x;
  }

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd pivot_;
  Eigen::VectorXd upper_;
};

/// Reaction-diffusion problem on (0,1) with Neumann ends:
///   y_t = nu y_xx - (y - z1)(y - z2)(y - z3) + sum_j u_j 1_{omega_j},
/// cost 1/2 gamma int |P_N y|^2 + 1/2 int |u|^2, box |u_j| <= box.
struct SchloglProblem {
  double nu = 0.1;
  std::array<double, 3> zeta{-1.0, 0.0, 2.0};
  double gamma = 50.0;
  double box = 30.0;
  int n_modes = 20;
  int n_actuators = 12;
  double rho = 0.1;

  double reaction(double y) const {
    return -(y - zeta[0]) * (y - zeta[1]) * (y - zeta[2]);
  }
  double reaction_derivative(double y) const {
    const double a = y - zeta[0];
    const double b = y - zeta[1];
    const double c = y - zeta[2];
    return -(b * c + a * c + a * b);
  }

  double actuator_center(int j) const {
    return (2.0 * j + 1.0) / (2.0 * n_actuators);
  }
  double actuator_width() const { return rho / n_actuators; }
  std::pair<double, double> actuator_support(int j) const {
    const double c = actuator_center(j);
    const double half = 0.5 * actuator_width();
    return {c - half, c + half};
  }
};

inline double initial_profile(double x) {
  return std::cos(2.0 * std::numbers::pi * x * x);
}

/// P1 elements on a uniform mesh of (0,1).
struct FemMesh {
  int n_elements = 0;
  double h = 0.0;
  Eigen::VectorXd nodes;
  Tridiagonal mass;
  Tridiagonal stiffness;
  Eigen::VectorXd lumped_mass;
  Eigen::MatrixXd actuator_loads;  // nodes x actuators
  Eigen::MatrixXd modes;           // nodes x modes, mass-orthonormal

  int n_nodes() const { return n_elements + 1; }

  Eigen::VectorXd sample(double (*f)(double)) const {
    return nodes.unaryExpr(f);
  }
};

inline double h_inner(const FemMesh& mesh, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b) {
  return a.dot(mesh.mass.apply(b));
}

inline double h_norm_sq(const FemMesh& mesh, const Eigen::VectorXd& v) {
  return h_inner(mesh, v, v);
}

inline FemMesh build_mesh(const SchloglProblem& p, int n_elements) {
  if (n_elements < 64) {
    throw ConfigError("build_mesh: need at least 64 elements, got " +
                      std::to_string(n_elements));
  }
  const double h = 1.0 / n_elements;
  if (h > p.actuator_width()) {
    throw ConfigError("build_mesh: element width exceeds the actuator width");
  }
  FemMesh m;
  m.n_elements = n_elements;
  m.h = h;
  const int n = n_elements + 1;
  m.nodes = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);

  m.mass.diag = Eigen::VectorXd::Constant(n, 2.0 * h / 3.0);
  m.mass.diag(0) = m.mass.diag(n - 1) = h / 3.0;
  m.mass.lower = m.mass.upper = Eigen::VectorXd::Constant(n - 1, h / 6.0);

  m.stiffness.diag = Eigen::VectorXd::Constant(n, 2.0 / h);
  m.stiffness.diag(0) = m.stiffness.diag(n - 1) = 1.0 / h;
  m.stiffness.lower = m.stiffness.upper = Eigen::VectorXd::Constant(n - 1, -1.0 / h);

  m.lumped_mass = Eigen::VectorXd::Constant(n, h);
  m.lumped_mass(0) = m.lumped_mass(n - 1) = 0.5 * h;

  // Exact integrals of the indicator against each hat function.
  m.actuator_loads = Eigen::MatrixXd::Zero(n, p.n_actuators);
  for (int j = 0; j < p.n_actuators; ++j) {
    const auto [a, b] = p.actuator_support(j);
    for (int e = 0; e < n_elements; ++e) {
      const double xl = m.nodes(e);
      const double xr = m.nodes(e + 1);
      const double lo = std::max(a, xl);
      const double hi = std::min(b, xr);
      if (!(hi > lo)) continue;
      m.actuator_loads(e, j) +=
          ((xr - lo) * (xr - lo) - (xr - hi) * (xr - hi)) / (2.0 * h);
      m.actuator_loads(e + 1, j) +=
          ((hi - xl) * (hi - xl) - (lo - xl) * (lo - xl)) / (2.0 * h);
    }
  }

  // Neumann cosines, then Gram-Schmidt (twice) in the mass inner product.
  m.modes.resize(n, p.n_modes);
  for (int k = 0; k < p.n_modes; ++k) {
    for (int i = 0; i < n; ++i) {
      m.modes(i, k) = k == 0 ? 1.0
                             : std::sqrt(2.0) * std::cos(k * std::numbers::pi * m.nodes(i));
    }
  }
  for (int k = 0; k < p.n_modes; ++k) {
    Eigen::VectorXd v = m.modes.col(k);
    for (int pass = 0; pass < 2; ++pass) {
      for (int l = 0; l < k; ++l) v -= h_inner(m, m.modes.col(l), v) * m.modes.col(l);
    }
    m.modes.col(k) = v / std::sqrt(h_norm_sq(m, v));
  }
  return m;
}

struct ModalProjection {
  Eigen::VectorXd coefficients;
  double penalty = 0.0;  // |P_N y|_H^2
};

inline ModalProjection project_modes(const FemMesh& mesh, const Eigen::VectorXd& y) {
  if (y.size() != mesh.n_nodes()) {
    throw ContractViolation("project_modes: vector length does not match mesh");
  }
  ModalProjection out;
  out.coefficients = mesh.modes.transpose() * mesh.mass.apply(y);
  out.penalty = out.coefficients.squaredNorm();
  return out;
}

/// Nodal vector of sum_k c_k mode_k.
inline Eigen::VectorXd reconstruct(const FemMesh& mesh, const Eigen::VectorXd& c) {
  return mesh.modes * c;
}

}  // namespace fthlab::pde
