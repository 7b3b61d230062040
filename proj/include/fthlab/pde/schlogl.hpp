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
#include <memory>
#include <numbers>

#include "fthlab/core/cost.hpp"
#include "fthlab/core/errors.hpp"
#include "fthlab/core/signals.hpp"
#include "fthlab/optim/ocp.hpp"
#include "fthlab/pde/fem.hpp"

namespace fthlab::pde {

/// The constant operators of one CNAB time step:
///   S y_{k+1} = R y_k + 3/2 F_k - 1/2 F_{k-1},   F = M_l g(y) + L u,
/// with S = M/dt + nu K/2, R = M/dt - nu K/2. The first step uses F_0 alone.
struct CnabOperators {
  Tridiagonal implicit_part;
  Tridiagonal explicit_part;
  std::shared_ptr<const TridiagonalLu> lu;

  CnabOperators(const SchloglProblem& p, const FemMesh& mesh, double dt)
      : implicit_part(mesh.mass.combine(1.0 / dt, mesh.stiffness, 0.5 * p.nu)),
        explicit_part(mesh.mass.combine(1.0 / dt, mesh.stiffness, -0.5 * p.nu)),
        lu(std::make_shared<const TridiagonalLu>(implicit_part)) {}
};

namespace cnab_detail {

inline Eigen::VectorXd forcing(const SchloglProblem& p, const FemMesh& mesh,
                               const Eigen::VectorXd& y,
                               const Eigen::VectorXd& u) {
  Eigen::VectorXd g = y.unaryExpr([&](double v) { return p.reaction(v); });
  return mesh.lumped_mass.cwiseProduct(g) + mesh.actuator_loads * u;
}

inline double explicit_weight(int k) { return k == 0 ? 1.0 : 1.5; }
constexpr double kLagWeight = -0.5;

}  // namespace cnab_detail

inline RowMatrix cnab_forward_values(const SchloglProblem& p, const FemMesh& mesh,
                                     const CnabOperators& ops, const TimeGrid& grid,
                                     const ControlSignal& u,
                                     const Eigen::VectorXd& z) {
  if (u.channels() != p.n_actuators) {
    throw ContractViolation("cnab_forward: control needs one channel per actuator");
  }
  if (z.size() != mesh.n_nodes()) {
    throw ContractViolation("cnab_forward: initial state does not match mesh");
  }
  const int n = grid.n_steps();
  RowMatrix y(grid.size(), mesh.n_nodes());
  y.row(0) = z.transpose();
  Eigen::VectorXd prev_f;
  Eigen::VectorXd cur = z;
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd f = cnab_detail::forcing(p, mesh, cur, u.values().row(k).transpose());
    Eigen::VectorXd rhs = ops.explicit_part.apply(cur) + cnab_detail::explicit_weight(k) * f;
    if (k > 0) rhs += cnab_detail::kLagWeight * prev_f;
    cur = ops.lu->solve(rhs);
    if (!cur.allFinite()) {
      throw BlowUpError(grid.node(k + 1), k + 1, "state is not finite");
    }
    y.row(k + 1) = cur.transpose();
    prev_f = std::move(f);
  }
  return y;
}

inline StatePath cnab_forward(const SchloglProblem& p, const FemMesh& mesh,
                              const TimeGrid& grid, const ControlSignal& u,
                              const Eigen::VectorXd& z) {
  const CnabOperators ops(p, mesh, grid.dt());
  return StatePath(grid, cnab_forward_values(p, mesh, ops, grid, u, z));
}

inline CostBreakdown schlogl_cost(const SchloglProblem& p, const FemMesh& mesh,
                                  const StatePath& y, const ControlSignal& u) {
  const TimeGrid& g = y.grid();
  Eigen::VectorXd sp(g.size());
  Eigen::VectorXd cp(g.size());
  for (int k = 0; k < g.size(); ++k) {
    sp(k) = p.gamma * project_modes(mesh, y.at(k)).penalty;
    cp(k) = u.values().row(k).squaredNorm();
  }
  return assemble_cost(sp, cp, 0.0, g);
}

/// Forward, exact discrete adjoint of the CNAB scheme, gradient and cost.
/// The adjoint path holds p_k = (c_k lambda_{k+1} - 1/2 lambda_{k+2}) / w_k,
/// so the gradient at node k is u_k + L^T p_k.
inline optim::OcpCallbacks schlogl_callbacks(const SchloglProblem& p,
                                             const FemMesh& mesh,
                                             const TimeGrid& grid) {
  auto prob = std::make_shared<const SchloglProblem>(p);
  auto msh = std::make_shared<const FemMesh>(mesh);
  auto ops = std::make_shared<const CnabOperators>(p, mesh, grid.dt());
  optim::OcpCallbacks cb;
  cb.forward_solve = [prob, msh, ops](const Eigen::VectorXd& z, const ControlSignal& u) {
    return StatePath(u.grid(), cnab_forward_values(*prob, *msh, *ops, u.grid(), u, z));
  };
  cb.adjoint_solve = [prob, msh, ops](const StatePath& y, const ControlSignal&) {
    const TimeGrid& g = y.grid();
    const int n = g.n_steps();
    const int nn = msh->n_nodes();
    RowMatrix out = RowMatrix::Zero(g.size(), nn);
    Eigen::VectorXd lam1 = Eigen::VectorXd::Zero(nn);  // lambda_{k+1}
    Eigen::VectorXd lam2 = Eigen::VectorXd::Zero(nn);  // lambda_{k+2}
    for (int k = n; k >= 0; --k) {
      const Eigen::VectorXd comb =
          (k < n ? cnab_detail::explicit_weight(k) : 0.0) * lam1 +
          (k + 1 < n ? cnab_detail::kLagWeight : 0.0) * lam2;
      out.row(k) = (comb / g.weight(k)).transpose();
      if (k == 0) break;
      const Eigen::VectorXd yk = y.at(k);
      const ModalProjection proj = project_modes(*msh, yk);
      const Eigen::VectorXd dj =
          g.weight(k) * prob->gamma * msh->mass.apply(reconstruct(*msh, proj.coefficients));
      const Eigen::VectorXd dg = yk.unaryExpr(
          [&](double v) { return prob->reaction_derivative(v); });
      const Eigen::VectorXd rhs = dj + ops->explicit_part.apply(lam1) +
                                  msh->lumped_mass.cwiseProduct(dg).cwiseProduct(comb);
      lam2 = lam1;
      lam1 = ops->lu->solve(rhs);
    }
    return StatePath(g, std::move(out));
  };
  cb.gradient_assemble = [msh](const StatePath&, const StatePath& adj,
                               const ControlSignal& u) -> RowMatrix {
    return u.values() + adj.values() * msh->actuator_loads;
  };
  cb.cost_eval = [prob, msh](const StatePath& y, const ControlSignal& u) {
    return schlogl_cost(*prob, *msh, y, u);
  };
  return cb;
}

struct EnergyReport {
  double c1 = 0.0;     // max of -(w - z1)(w - z3)
  double alpha = 0.0;  // nu N^2 pi^2 + 1
  double kappa = 0.0;  // alpha - 2 c1
  double t_circle = 0.0;
  double min_norm_sq = 0.0;  // |y(t_circle)|_H^2
};

/// Constants of the energy estimate, and the time in [(s+T)/2, T] where
/// |y(t)|_H^2 is smallest.
inline EnergyReport energy_diagnostics(const SchloglProblem& p, const FemMesh& mesh,
                                       const StatePath& path, const ControlSignal&) {
  EnergyReport r;
  const double half_gap = 0.5 * (p.zeta[2] - p.zeta[0]);
  r.c1 = half_gap * half_gap;
  r.alpha = p.nu * p.n_modes * p.n_modes * std::numbers::pi * std::numbers::pi + 1.0;
  r.kappa = r.alpha - 2.0 * r.c1;
  const TimeGrid& g = path.grid();
  const double mid = 0.5 * (g.t_start() + g.t_end());
  r.min_norm_sq = INFINITY;
  for (int k = 0; k < g.size(); ++k) {
    if (g.node(k) < mid - 1e-12) continue;
    const double v = h_norm_sq(mesh, path.at(k));
    if (v < r.min_norm_sq) {
      r.min_norm_sq = v;
      r.t_circle = g.node(k);
    }
  }
  return r;
}

}  // namespace fthlab::pde
