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

#include "fthlab/harness/checks.hpp"
#include "fthlab/harness/ladder.hpp"
#include "fthlab/harness/report.hpp"
#include "fthlab/harness/svg.hpp"
#include "generators.hpp"

namespace fthlab::harness {
namespace {

using testing::Gen;

TEST(Verdicts, ErrorToReference) {
  const Verdict ok = verdict_error_to_reference("v", {0.5, 0.8, 0.95}, 1.0, 0.1);
  EXPECT_TRUE(ok.pass);
  EXPECT_NEAR(ok.margin, 0.05, 1e-15);
  EXPECT_FALSE(verdict_error_to_reference("v", {0.5, 0.8, 0.8}, 1.0, 0.3).pass);
  EXPECT_FALSE(verdict_error_to_reference("v", {0.5, 0.8}, 1.0, 0.1).pass);
  EXPECT_FALSE(verdict_error_to_reference("v", {}, 1.0, 0.1).pass);
  // Overshooting the reference counts by absolute error.
  EXPECT_TRUE(verdict_error_to_reference("v", {0.5, 1.2, 0.99}, 1.0, 0.05).pass);
}

TEST(Verdicts, Monotonicity) {
  EXPECT_TRUE(verdict_non_increasing("v", {{3, 2, 2, 1}, {5, 4}}, 0.0).pass);
  EXPECT_FALSE(verdict_non_increasing("v", {{3, 2, 2.5}}, 0.0).pass);
  EXPECT_TRUE(verdict_non_increasing("v", {{3, 2, 2 + 1e-11}}, 1e-10).pass);
  EXPECT_TRUE(verdict_non_decreasing("v", {1, 2, 2, 3}, 0.0).pass);
  EXPECT_FALSE(verdict_non_decreasing("v", {1, 0.5}, 0.0).pass);
  EXPECT_TRUE(verdict_non_increasing("v", {{}}, 0.0).pass);
}

TEST(Verdicts, MonotoneSequencesPassOnRandomData) {
  Gen gen(61);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(gen.integer(1, 10));
    double cur = gen.uniform(0, 10);
    for (double& v : s) {
      v = cur;
      cur -= gen.uniform(0, 1);
    }
    const Verdict v = verdict_non_increasing("v", {s}, 0.0);
    ASSERT_TRUE(v.pass);
    ASSERT_GE(v.margin, 0.0);
  }
}

TEST(Verdicts, BoundedBy) {
  EXPECT_TRUE(verdict_bounded_by("v", {0.9, 1.0}, 1.0, 0.0).pass);
  EXPECT_FALSE(verdict_bounded_by("v", {0.9, 1.01}, 1.0, 0.0).pass);
  EXPECT_TRUE(verdict_bounded_by("v", {0.9, 1.01}, 1.0, 0.02).pass);
}

TEST(Verdicts, AllCompleted) {
  ExperimentReport r;
  r.horizons = {1, 2};
  r.completed = {true, false};
  r.failures = {"", "blew up"};
  const Verdict v = verdict_all_completed(r);
  EXPECT_FALSE(v.pass);
  EXPECT_NE(v.detail.find("blew up"), std::string::npos);
}

TEST(TCircle, Examples) {
  const TimeGrid g(0.0, 2.0, 20);
  const TCircle zero = t_circle_selector(g, Eigen::VectorXd::Zero(g.size()), 0.0, 2.0, 0.0);
  EXPECT_EQ(zero.theta, 0.0);
  EXPECT_EQ(zero.t_circle, 2.0);
  EXPECT_TRUE(zero.bound_holds);

  Eigen::VectorXd dec(g.size());
  for (int k = 0; k < g.size(); ++k) dec(k) = 5.0 - g.node(k);
  const TCircle d = t_circle_selector(g, dec, 0.0, 2.0, 10.0);
  EXPECT_EQ(d.theta, dec(g.n_steps()));
  EXPECT_EQ(d.t_circle, 2.0);
  EXPECT_NEAR(d.threshold, 20.0, 1e-15);

  EXPECT_THROW(t_circle_selector(g, Eigen::VectorXd::Zero(3), 0.0, 2.0, 1.0), ContractViolation);
  EXPECT_THROW(t_circle_selector(g, dec, 0.0, 3.0, 1.0), DomainError);
}

TEST(TCircle, BoundHoldsForTrapezoidCosts) {
  // The cost of any path dominates half its penalty integral, which gives the bound.
  Gen gen(62);
  for (int trial = 0; trial < 100; ++trial) {
    const TimeGrid g(0.0, gen.uniform(0.5, 5.0), gen.integer(10, 200));
    const Eigen::VectorXd pen = gen.vector(g.size(), 0.0, 3.0);
    const double cost = 0.5 * trapezoid_l2_sq(pen.cwiseSqrt(), g);
    const TCircle tc = t_circle_selector(g, pen, 0.0, g.t_end(), cost);
    ASSERT_TRUE(tc.bound_holds) << "margin " << tc.margin;
    ASSERT_GE(tc.t_circle, 0.5 * g.t_end() - 1e-12);
  }
}

TEST(TCircle, ScalarOptimalPath) {
  const auto p = scalar::ScalarProblem::make(2, 1.0);
  const TimeGrid g = TimeGrid::with_density(0.0, 4.0, 400);
  const auto [y0, u0] = scalar::ith_closed_loop(p, g);
  const auto r = optim::solve_fth(scalar::scalar_callbacks(p), Eigen::VectorXd::Ones(1), g,
                                  std::nullopt, u0.values());
  Eigen::VectorXd pen(g.size());
  for (int k = 0; k < g.size(); ++k) pen(k) = std::pow(r.state.values()(k, 0), 6) / 3.0;
  const TCircle tc = t_circle_selector(g, pen, 0.0, 4.0, r.cost.total);
  EXPECT_TRUE(tc.bound_holds);
  EXPECT_LE(tc.theta, 4.0 / 4.0 * r.cost.total);
  EXPECT_GT(tc.margin, 0.0);
}

TEST(Dpp, ResidualsWithinBounds) {
  const ExperimentConfig cs = default_config(Family::kScalar);
  const ExperimentConfig cl = default_config(Family::kPeriodicLqr);
  for (double T : {1.0, 2.0}) {
    EXPECT_LT(dpp_check(cs, Family::kScalar, 0.0, T).residual, 1e-6) << "T = " << T;
    EXPECT_LT(dpp_check(cl, Family::kPeriodicLqr, 0.0, T).residual, 1e-5) << "T = " << T;
  }
  EXPECT_THROW(dpp_check(cs, Family::kSchlogl, 0.0, 1.0), UnsupportedFamilyError);
  EXPECT_THROW(dpp_check(cs, Family::kScalar, 1.0, 1.0), ContractViolation);
}

TEST(Dpp, ShortIntervalLimit) {
  const ExperimentConfig cs = default_config(Family::kScalar);
  const DppResult r = dpp_check(cs, Family::kScalar, 0.0, 1e-3, 4000);
  EXPECT_LT(r.residual, 1e-8);
  EXPECT_LT(r.running_cost, 3e-3);
  EXPECT_LT(r.residual / r.running_cost, 1e-6);
}

TEST(Dpp, SecondOrderUnderRefinement) {
  const ExperimentConfig cs = default_config(Family::kScalar);
  const ExperimentConfig cl = default_config(Family::kPeriodicLqr);
  for (Family f : {Family::kScalar, Family::kPeriodicLqr}) {
    const ExperimentConfig& c = f == Family::kScalar ? cs : cl;
    const double coarse = dpp_check(c, f, 0.0, 1.0, 500).residual;
    const double fine = dpp_check(c, f, 0.0, 1.0, 1000).residual;
    EXPECT_NEAR(coarse / fine, 4.0, 0.5) << family_name(f);
  }
}

TEST(Counterexample, Report) {
  const ExperimentReport r = counterexample_report(1.0, {1, 2, 3});
  ASSERT_EQ(r.costs.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    const double T = i + 1.0;
    EXPECT_NEAR(r.costs[i].total / (0.5 * std::exp(2 * T)) - 1.0, 0.0, 1e-8);
  }
  EXPECT_LT(r.costs[0].total, r.costs[1].total);
  EXPECT_LT(r.costs[1].total, r.costs[2].total);
  EXPECT_EQ(r.ith_reference_cost, 0.0);
  EXPECT_TRUE(r.all_pass());
  ASSERT_NE(r.find("fth_cost_diverges_from_ith"), nullptr);

  const ExperimentReport z = counterexample_report(0.0, {1, 2, 3});
  for (const auto& c : z.costs) EXPECT_EQ(c.total, 0.0);
  EXPECT_TRUE(z.all_pass());
}

TEST(Report, JsonSchemaAndNonFinite) {
  ExperimentReport r;
  r.experiment_id = "demo";
  r.horizons = {1, 2};
  r.window = {0, 1};
  r.costs = {{1, 0.5, 0.5, 0}, {NAN, NAN, NAN, NAN}};
  r.window_errors = {{0.1, 0.2}, {NAN, NAN}};
  r.terminal_norms = {0.3, INFINITY};
  r.completed = {true, false};
  r.failures = {"", "boom"};
  r.verdicts = {{"a", true, 0.5, "fine"}, {"b", false, -1, "bad"}};
  const nlohmann::json j = to_json(r);
  for (const char* key : {"experiment_id", "horizons", "window", "costs", "ith_reference_cost",
                          "restriction_errors", "terminal_norms", "completed", "failures",
                          "verdicts", "all_pass", "extra"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_FALSE(j["all_pass"].get<bool>());
  EXPECT_TRUE(j["verdicts"]["a"]["pass"].get<bool>());
  EXPECT_TRUE(j["ith_reference_cost"].is_null());
  EXPECT_TRUE(j["terminal_norms"][1].is_string());
  // Round trip through text stays valid JSON.
  EXPECT_EQ(nlohmann::json::parse(j.dump(2)), j);
}

TEST(Svg, DeterministicAndWellFormed) {
  Panel p{"costs", "T", "J", true, {{"fth", {1, 2, 3}, {0.1, 0.01, 0.001}}, {"ref", {1, 3}, {1, 1}}}};
  const std::string a = render_svg({p, p});
  EXPECT_EQ(a, render_svg({p, p}));
  EXPECT_EQ(a.rfind("<svg", 0), 0u);
  EXPECT_NE(a.find("</svg>"), std::string::npos);
  EXPECT_EQ(a.find("nan"), std::string::npos);
  Panel q{"<&>", "x", "y", false, {{"s", {0, 1}, {NAN, 1}}}};
  const std::string b = render_svg({q});
  EXPECT_NE(b.find("&lt;&amp;&gt;"), std::string::npos);
}

TEST(Ladder, ScalarVerdicts) {
  const LadderOutcome o = run_scalar_ladder(default_config(Family::kScalar));
  const ExperimentReport& r = o.report;
  ASSERT_EQ(r.costs.size(), 4u);
  for (const char* name : {"all_horizons_completed", "cost_non_decreasing",
                           "window_errors_non_increasing", "fth_cost_below_reference"}) {
    ASSERT_NE(r.find(name), nullptr) << name;
    EXPECT_TRUE(r.find(name)->pass) << name << ": " << r.find(name)->detail;
  }
  EXPECT_NEAR(*r.ith_reference_cost, 0.5386751, 1e-7);
  // Final horizon within 1% of the infinite-horizon value.
  ASSERT_NE(r.find("cost_converges_to_reference"), nullptr);
  EXPECT_TRUE(r.find("cost_converges_to_reference")->pass)
      << r.find("cost_converges_to_reference")->detail;
}

TEST(Ladder, LqrVerdicts) {
  ExperimentConfig cfg = default_config(Family::kPeriodicLqr);
  const LadderOutcome o0 = run_lqr_ladder(cfg, 0.0);
  const LadderOutcome o1 = run_lqr_ladder(cfg, 1.0);
  for (const auto* o : {&o0, &o1}) {
    for (const auto& v : o->report.verdicts) EXPECT_TRUE(v.pass) << v.name << ": " << v.detail;
  }
  EXPECT_TRUE(terminal_penalty_effect(o0.report, o1.report).pass);
  const auto& values = o0.report.extra["riccati_values"];
  EXPECT_LT(std::abs(values.back().get<double>() - *o0.report.ith_reference_cost) /
                *o0.report.ith_reference_cost,
            0.005);
  EXPECT_LT(o0.report.extra["monodromy_spectral_radius"].get<double>(), 1.0);
}

TEST(Ladder, FailedHorizonIsRecordedAndOthersContinue) {
  ExperimentConfig cfg = default_config(Family::kScalar);
  cfg.horizons = {1, 2, 3};
  const auto p = scalar::ScalarProblem::make(2, 1.0);
  const optim::OcpCallbacks cb = scalar::scalar_callbacks(p);
  auto make = [&](double T) {
    const TimeGrid grid = TimeGrid::with_density(0.0, T, 100);
    // Zero control blows up on horizons past 1/2.
    RowMatrix guess = T == 2.0 ? RowMatrix::Zero(grid.size(), 1)
                               : scalar::ith_closed_loop(p, grid).second.values();
    return std::make_tuple(cb, Eigen::VectorXd::Ones(1).eval(), grid, guess);
  };
  const auto runs = ladder_detail::solve_horizons(cfg, make, std::nullopt,
                                                  solve_options(cfg.tol, 1e-8));
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_TRUE(runs[0].state.has_value());
  EXPECT_FALSE(runs[1].state.has_value());
  EXPECT_NE(runs[1].error.find("blow-up"), std::string::npos);
  EXPECT_TRUE(runs[2].state.has_value());
  ExperimentReport rep;
  ladder_detail::fill_common(rep, cfg, runs);
  EXPECT_EQ(rep.completed, (std::vector<bool>{true, false, true}));
  EXPECT_FALSE(verdict_all_completed(rep).pass);
}

TEST(Ladder, SchloglWindowErrorsMonotone) {
  ExperimentConfig cfg = default_config(Family::kSchlogl);
  cfg.schlogl.n_elements = 128;
  const SchloglOutcome so = run_schlogl_ladder(cfg);
  const ExperimentReport& r = so.ladder.report;
  for (const char* name : {"window_errors_non_increasing", "fth_cost_below_reference",
                           "controls_within_box"}) {
    ASSERT_NE(r.find(name), nullptr) << name;
    EXPECT_TRUE(r.find(name)->pass) << name << ": " << r.find(name)->detail;
  }
  EXPECT_FALSE(so.free_state.has_value());
}

TEST(Ladder, ParallelMatchesSequential) {
  ExperimentConfig cfg = default_config(Family::kScalar);
  cfg.horizons = {1, 2};
  const std::string a = to_json(run_scalar_ladder(cfg).report).dump();
  cfg.jobs = 2;
  const std::string b = to_json(run_scalar_ladder(cfg).report).dump();
  EXPECT_EQ(a, b);
  cfg.jobs = 1;
  EXPECT_EQ(a, to_json(run_scalar_ladder(cfg).report).dump());
}

TEST(Ladder, WarmStartExtendsByZero) {
  const TimeGrid g1(0.0, 1.0, 10);
  const TimeGrid g2(0.0, 2.0, 20);
  const ControlSignal prev(g1, RowMatrix::Constant(g1.size(), 1, 40.0));
  const RowMatrix ext = extend_by_zero(prev, g2, 30.0);
  EXPECT_EQ(ext(10, 0), 30.0);
  EXPECT_EQ(ext(11, 0), 0.0);
  EXPECT_EQ(ext(0, 0), 30.0);
}

}  // namespace
}  // namespace fthlab::harness
