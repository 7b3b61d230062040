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

#include <gtest/gtest.h>

#include <cmath>

#include "fthlab/lqr/counterexample.hpp"
#include "fthlab/lqr/periodic_lq.hpp"
#include "fthlab/lqr/riccati.hpp"
#include "fthlab/optim/solve.hpp"
#include "generators.hpp"

namespace fthlab::lqr {
namespace {

using testing::Gen;

bool symmetric_psd(const Eigen::Matrix2d& p) {
  if ((p - p.transpose()).norm() > 1e-12) return false;
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(p).eigenvalues().minCoeff() >= -1e-10;
}

TEST(PeriodicLq, PhiProperties) {
  Gen gen(41);
  for (int trial = 0; trial < 200; ++trial) {
    const double t = gen.uniform(-5, 5);
    ASSERT_GE(PeriodicLQ::phi(t), 1.0);
    ASSERT_LE(PeriodicLQ::phi(t), 2.0);
    ASSERT_NEAR(PeriodicLQ::phi(t + 1.0), PeriodicLQ::phi(t), 1e-14);
  }
  EXPECT_EQ(PeriodicLQ::phi(0.0), 2.0);
  EXPECT_NEAR(PeriodicLQ::phi(0.5), 1.0, 1e-15);
  EXPECT_TRUE(PeriodicLQ::is_kink(0.5));
  EXPECT_TRUE(PeriodicLQ::is_kink(2.5));
  EXPECT_FALSE(PeriodicLQ::is_kink(1.0));
  const PeriodicLQ lq;
  EXPECT_EQ(lq.a(0.3), lq.a(0.3).transpose());
}

TEST(ModalDecomposition, Eigenpairs) {
  const PeriodicLQ lq;
  const ModalDecomposition md = modal_decomposition(lq);
  const double s5 = std::sqrt(5.0);
  const Eigen::Vector2d img = lq.a_base * md.e_plus;
  EXPECT_NEAR(img(0), -1 + s5, 1e-14);
  EXPECT_NEAR(img(1), 7 - 3 * s5, 1e-14);
  Gen gen(42);
  for (int trial = 0; trial < 50; ++trial) {
    const double t = gen.uniform(0, 3);
    const auto [ap, am] = md.alpha(t);
    ASSERT_LT((lq.a(t) * md.e_plus - ap * md.e_plus).norm(), 1e-12);
    ASSERT_LT((lq.a(t) * md.e_minus - am * md.e_minus).norm(), 1e-12);
  }
  const auto [zp, zm] = md.coordinates(Eigen::Vector2d(1, 0));
  EXPECT_GT(std::abs(zp), 0.1);
  EXPECT_LT((zp * md.e_plus + zm * md.e_minus - Eigen::Vector2d(1, 0)).norm(), 1e-14);
}

TEST(ModalDecomposition, FreeDynamicsGrowAtLeastExponentially) {
  const PeriodicLQ lq;
  const auto [zp, zm] = modal_decomposition(lq).coordinates(lq.z);
  const TimeGrid g = TimeGrid::with_density(0.0, 4.0, 1000);
  const StatePath y = lqr_callbacks(lq).forward_solve(lq.z, ControlSignal::zeros(g, 1));
  const double e_plus_norm = modal_decomposition(lq).e_plus.norm();
  for (int k = 0; k < g.size(); k += 100) {
    ASSERT_GE(y.values().row(k).norm(), std::exp(g.node(k)) * std::abs(zp) * e_plus_norm * (1 - 1e-9));
  }
}

TEST(KalmanRank, Examples) {
  PeriodicLQ lq;
  EXPECT_TRUE(kalman_rank(lq, 0.0));
  EXPECT_TRUE(kalman_rank(lq, 0.5));
  Gen gen(43);
  for (int trial = 0; trial < 50; ++trial) ASSERT_TRUE(kalman_rank(lq, gen.uniform(0, 10)));
  lq.b = Eigen::Vector2d::Zero();
  EXPECT_FALSE(kalman_rank(lq, 0.0));
}

TEST(NormRate, DerivativeAtZeroIsFour) {
  const PeriodicLQ lq;
  Gen gen(44);
  for (int trial = 0; trial < 20; ++trial) {
    ASSERT_NEAR(norm_rate(lq, 0.0, Eigen::Vector2d(1, 0), gen.uniform(-100, 100)), 4.0, 1e-12);
  }
}

TEST(DifferentialRiccati, TerminalDataAndShortHorizon) {
  PeriodicLQ lq;
  lq.chi = 1.0;
  const RiccatiPath p1 = solve_differential_riccati(lq, TimeGrid(0.0, 1.0, 2000));
  EXPECT_EQ(p1.matrices.back(), Eigen::Matrix2d::Identity());
  lq.chi = 0.0;
  const RiccatiPath p0 = solve_differential_riccati(lq, TimeGrid(0.0, 1e-3, 10));
  // Pi(0) = T I + O(T^2)
  EXPECT_LT((p0.at(0) - 1e-3 * Eigen::Matrix2d::Identity()).norm(), 1e-5);
  for (const auto& m : p1.matrices) ASSERT_TRUE(symmetric_psd(m));
}

TEST(DifferentialRiccati, ResidualSmall) {
  for (double chi : {0.0, 1.0}) {
    PeriodicLQ lq;
    lq.chi = chi;
    const RiccatiPath p = solve_differential_riccati(lq, TimeGrid(0.0, 3.0, 6000));
    EXPECT_LE(riccati_residual(lq, p), 1e-4) << "chi = " << chi;
  }
}

// Independent oracle: explicit midpoint rule at a much finer step.
TEST(DifferentialRiccati, MatchesFineMidpointOracle) {
  PeriodicLQ lq;
  lq.chi = 1.0;
  const RiccatiPath p = solve_differential_riccati(lq, TimeGrid(0.0, 1.0, 2000));
  auto rhs = [&](double t, const Eigen::Matrix2d& m) -> Eigen::Matrix2d {
    const Eigen::Matrix2d a = (1.0 + std::abs(std::cos(M_PI * t))) * lq.a_base;
    const Eigen::Matrix2d bb = lq.b * lq.b.transpose();
    return -(a.transpose() * m + m * a - m * bb * m + Eigen::Matrix2d::Identity());
  };
  const int n = 200000;
  const double h = 1.0 / n;
  Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
  for (int k = n; k > 0; --k) {
    const double t = k * h;
    const Eigen::Matrix2d half = m - 0.5 * h * rhs(t, m);
    m -= h * rhs(t - 0.5 * h, half);
  }
  EXPECT_LT((p.at(0) - m).norm() / m.norm(), 1e-8);
}

TEST(PeriodicRiccati, PeriodicAndStabilizing) {
  const PeriodicLQ lq;
  const RiccatiPath p = solve_periodic_riccati(lq, 2000);
  EXPECT_TRUE(p.periodic);
  EXPECT_LE((p.at(0) - p.matrices.back()).norm(), 1e-8);
  EXPECT_LE(riccati_residual(lq, p), 1e-4);
  for (const auto& m : p.matrices) ASSERT_TRUE(symmetric_psd(m));
  const double rho = spectral_radius(monodromy(lq, p));
  EXPECT_LT(rho, 1.0);
  EXPECT_GT(rho, 0.0);
  // Periodic extension.
  EXPECT_LT((riccati_at(lq, p, 3.25) - riccati_at(lq, p, 0.25)).norm(), 1e-12);
  EXPECT_THROW(solve_periodic_riccati(lq, 50), ContractViolation);
}

TEST(PeriodicRiccati, MonodromyMatchesClosedLoopColumns) {
  PeriodicLQ lq;
  const RiccatiPath p = solve_periodic_riccati(lq, 2000);
  const Eigen::Matrix2d m = monodromy(lq, p);
  for (int j = 0; j < 2; ++j) {
    lq.z = Eigen::Vector2d::Unit(j);
    const ClosedLoop cl = closed_loop(lq, p, TimeGrid(0.0, 1.0, 2000));
    EXPECT_LT((cl.state.values().row(2000).transpose() - m.col(j)).norm(), 1e-12);
  }
}

TEST(PeriodicRiccati, FiniteHorizonConvergesGeometrically) {
  const PeriodicLQ lq;
  const RiccatiPath inf = solve_periodic_riccati(lq, 1000);
  std::vector<double> errs;
  for (int T = 1; T <= 8; ++T) {
    const RiccatiPath pt = solve_differential_riccati(lq, TimeGrid(0.0, T, 1000 * T));
    errs.push_back((pt.at(0) - inf.at(0)).norm());
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    if (errs[i - 1] < 1e-9) break;
    ASSERT_LT(errs[i], 0.5 * errs[i - 1]) << "T = " << i + 1;
  }
  EXPECT_LT(errs.back(), 1e-6);
}

TEST(PeriodicRiccati, FailsWithoutStabilizability) {
  PeriodicLQ lq;
  lq.b = Eigen::Vector2d::Zero();
  EXPECT_THROW(solve_periodic_riccati(lq, 200, 1e-10, 20), std::runtime_error);
}

TEST(ClosedLoop, ValueIdentity) {
  for (double chi : {0.0, 1.0}) {
    PeriodicLQ lq;
    lq.chi = chi;
    const TimeGrid g(0.0, 1.0, 2000);
    const RiccatiPath p = solve_differential_riccati(lq, g);
    const ClosedLoop cl = closed_loop(lq, p, g);
    const double v = riccati_value(lq, p, 0.0, lq.z);
    EXPECT_LT(std::abs(cl.cost.total - v) / v, 1e-6) << "chi = " << chi;
  }
}

TEST(ClosedLoop, ZeroDataAndContracts) {
  PeriodicLQ lq;
  lq.z = Eigen::Vector2d::Zero();
  const TimeGrid g(0.0, 1.0, 1000);
  const RiccatiPath p = solve_differential_riccati(lq, g);
  const ClosedLoop cl = closed_loop(lq, p, g);
  EXPECT_EQ(cl.cost.total, 0.0);
  EXPECT_EQ(cl.control.values().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(closed_loop(lq, p, TimeGrid(0.0, 1.0, 500)), ContractViolation);
  EXPECT_THROW(closed_loop(lq, p, TimeGrid(0.0, 2.0, 2000)), ContractViolation);
}

TEST(TwoRoutes, OptimizerMatchesRiccati) {
  for (double chi : {0.0, 1.0}) {
    PeriodicLQ lq;
    lq.chi = chi;
    const TimeGrid g(0.0, 1.0, 1000);
    const auto r = optim::solve_fth(lqr_callbacks(lq), lq.z, g, std::nullopt,
                                    RowMatrix::Zero(g.size(), 1));
    const double v = riccati_value(lq, solve_differential_riccati(lq, g), 0.0, lq.z);
    EXPECT_LT(std::abs(r.cost.total - v) / v, 1e-4) << "chi = " << chi;
  }
}

TEST(Counterexample, Examples) {
  const CounterexampleCosts zero = counterexample_costs(0.0, 1.0, 200);
  EXPECT_EQ(zero.fth_cost, 0.0);
  EXPECT_EQ(zero.closed_form, 0.0);
  EXPECT_EQ(zero.ith_cost, 0.0);
  const CounterexampleCosts one = counterexample_costs(1.0, 1.0);
  EXPECT_NEAR(one.closed_form, 0.5 * std::exp(2.0), 1e-15);
  EXPECT_NEAR(one.closed_form, 3.6945, 1e-4);
  EXPECT_EQ(one.ith_cost, 0.0);
  EXPECT_THROW(counterexample_costs(1.0, 0.0), ContractViolation);
}

TEST(Counterexample, SimulatedMatchesClosedForm) {
  Gen gen(45);
  for (double T : {1.0, 2.0, 3.0}) {
    const double y0 = gen.uniform(-2, 2);
    const CounterexampleCosts c = counterexample_costs(y0, T);
    EXPECT_LT(std::abs(c.fth_cost - c.closed_form) / c.closed_form, 1e-8) << "T = " << T;
  }
}

}  // namespace
}  // namespace fthlab::lqr
