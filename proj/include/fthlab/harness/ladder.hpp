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
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fthlab/core/config.hpp"
#include "fthlab/core/restriction.hpp"
#include "fthlab/harness/report.hpp"
#include "fthlab/lqr/riccati.hpp"
#include "fthlab/optim/solve.hpp"
#include "fthlab/pde/schlogl.hpp"
#include "fthlab/scalar/scalar.hpp"

namespace fthlab::harness {

/// One solved horizon, kept for artifact output.
struct HorizonRun {
  double horizon = 0.0;
  std::optional<StatePath> state;
  std::optional<ControlSignal> control;
  std::vector<optim::TraceRow> trace;
  int iterations = 0;
  bool converged = false;
  std::string error;
};

struct LadderOutcome {
  ExperimentReport report;
  std::vector<HorizonRun> runs;
  std::optional<StatePath> reference_state;
  std::optional<ControlSignal> reference_control;
};

/// Calls task(i) for i in [0, count) on up to jobs threads. Results must be
/// written by index so the outcome does not depend on scheduling.
template <class Task>
void run_indexed(int count, int jobs, Task task) {
  const int workers = std::clamp(jobs, 1, std::max(1, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline optim::SolveOptions solve_options(const Tolerances& tol, double gradient_tol) {
  optim::SolveOptions o;
  o.tolerance = gradient_tol;
  o.max_iterations = tol.max_iterations;
  o.relative_cost_change = tol.relative_cost_change;
  return o;
}

/// Previous horizon's control on the new grid, zero past its end.
inline RowMatrix extend_by_zero(const ControlSignal& prev, const TimeGrid& grid,
                                std::optional<double> box) {
  RowMatrix out = RowMatrix::Zero(grid.size(), prev.channels());
  for (int k = 0; k < grid.size(); ++k) {
    const double t = grid.node(k);
    if (prev.grid().contains(t, 1e-12)) {
      out.row(k) = sample_linear(prev.grid(), prev.values(), t);
    }
  }
  return optim::project_box(out, box);
}

namespace ladder_detail {

/// Solves every horizon with the optimizer, in parallel unless warm starts
/// chain the horizons. make(T) returns (callbacks, z, grid, initial guess).
template <class MakeProblem>
std::vector<HorizonRun> solve_horizons(const ExperimentConfig& cfg,
                                       MakeProblem make, std::optional<double> box,
                                       const optim::SolveOptions& opt) {
  const int n = static_cast<int>(cfg.horizons.size());
  std::vector<HorizonRun> runs(n);
  auto one = [&](int i, const RowMatrix* warm) {
    HorizonRun& run = runs[i];
    run.horizon = cfg.horizons[i];
    try {
      const auto [cb, z, grid, guess] = make(cfg.horizons[i]);
      const RowMatrix u0 = warm ? *warm : guess;
      optim::SolveResult r = optim::solve_fth(cb, z, grid, box, u0, opt);
      run.state = std::move(r.state);
      run.control = std::move(r.control);
      run.trace = std::move(r.trace);
      run.iterations = r.iterations;
      run.converged = r.converged;
    } catch (const std::exception& e) {
      run.error = e.what();
    }
  };
  if (cfg.warm_start) {
    std::optional<ControlSignal> prev;
    for (int i = 0; i < n; ++i) {
      std::optional<RowMatrix> warm;
      if (prev) {
        const auto [cb, z, grid, guess] = make(cfg.horizons[i]);
        warm = extend_by_zero(*prev, grid, box);
      }
      one(i, warm ? &*warm : nullptr);
      if (runs[i].control) prev = runs[i].control;
    }
  } else {
    run_indexed(n, cfg.jobs, [&](int i) { one(i, nullptr); });
  }
  return runs;
}

inline void fill_common(ExperimentReport& rep, const ExperimentConfig& cfg,
                        const std::vector<HorizonRun>& runs) {
  rep.horizons = cfg.horizons;
  rep.window = cfg.window;
  for (const auto& r : runs) {
    rep.completed.push_back(r.error.empty());
    rep.failures.push_back(r.error);
  }
}

}  // namespace ladder_detail

/// Horizon ladder for y' = y^(2n-1) + u against the analytic
/// infinite-horizon value and closed loop.
inline LadderOutcome run_scalar_ladder(const ExperimentConfig& cfg) {
  cfg.validate();
  const scalar::ScalarProblem p = scalar::ScalarProblem::make(cfg.scalar.n, cfg.scalar.y0);
  const optim::OcpCallbacks cb = scalar::scalar_callbacks(p);
  const double spu = cfg.scalar.steps_per_unit;
  Eigen::VectorXd z(1);
  z << p.y0;

  LadderOutcome out;
  out.runs = ladder_detail::solve_horizons(
      cfg,
      [&](double T) {
        // Zero control blows up for y0 != 0, so start from the
        // infinite-horizon feedback control.
        const TimeGrid grid = TimeGrid::with_density(0.0, T, spu);
        return std::make_tuple(cb, z, grid, scalar::ith_closed_loop(p, grid).second.values());
      },
      std::nullopt, solve_options(cfg.tol, cfg.tol.gradient_ode));

  ExperimentReport& rep = out.report;
  rep.experiment_id = "scalar";
  ladder_detail::fill_common(rep, cfg, out.runs);
  const double ref = scalar::ith_value(p);
  rep.ith_reference_cost = ref;
  auto [ys, us] = scalar::ith_closed_loop(
      p, TimeGrid::with_density(0.0, cfg.horizons.back(), spu));

  std::vector<double> totals, err_state, err_ctrl;
  nlohmann::json iters = nlohmann::json::array();
  for (const auto& r : out.runs) {
    if (!r.state) {
      rep.costs.push_back({NAN, NAN, NAN, NAN});
      rep.window_errors.push_back({NAN, NAN});
      rep.terminal_norms.push_back(NAN);
      iters.push_back(nullptr);
      continue;
    }
    const CostBreakdown c = scalar::scalar_cost(p, *r.state, *r.control);
    rep.costs.push_back(c);
    const WindowError e{restriction_error(*r.state, ys, cfg.window),
                        restriction_error(*r.control, us, cfg.window)};
    rep.window_errors.push_back(e);
    rep.terminal_norms.push_back(r.state->terminal().norm());
    totals.push_back(c.total);
    err_state.push_back(e.state);
    err_ctrl.push_back(e.control);
    iters.push_back({{"iterations", r.iterations}, {"converged", r.converged}});
  }
  rep.extra["optimizer"] = iters;
  rep.extra["value_formula"] = "(1+xi)/(2n) y0^(2n)";

  rep.verdicts.push_back(verdict_all_completed(rep));
  rep.verdicts.push_back(verdict_non_decreasing("cost_non_decreasing", totals, 0.0));
  rep.verdicts.push_back(verdict_error_to_reference("cost_converges_to_reference",
                                                    totals, ref, cfg.tol.scalar_final_rel));
  rep.verdicts.push_back(verdict_non_increasing("window_errors_non_increasing",
                                                {err_state, err_ctrl},
                                                cfg.tol.monotone_slack));
  rep.verdicts.push_back(
      verdict_bounded_by("fth_cost_below_reference", totals, ref, cfg.tol.ith_bound_rel));
  out.reference_state = std::move(ys);
  out.reference_control = std::move(us);
  return out;
}

/// Horizon ladder for the periodic LQ problem along the Riccati route, with
/// the periodic Riccati feedback as reference. Costs in the verdicts are
/// the Riccati values 1/2 z^T Pi_T(0) z; quadrature costs of the simulated
/// closed loops are reported alongside.
inline LadderOutcome run_lqr_ladder(const ExperimentConfig& cfg, double chi) {
  cfg.validate();
  lqr::PeriodicLQ lq;
  lq.chi = chi;
  lq.z = cfg.lqr.z;
  const int spp = cfg.lqr.steps_per_period;
  const lqr::RiccatiPath periodic =
      lqr::solve_periodic_riccati(lq, spp, cfg.tol.riccati_periodicity);
  const double ref = lqr::riccati_value(lq, periodic, 0.0, lq.z);

  const int n = static_cast<int>(cfg.horizons.size());
  LadderOutcome out;
  out.runs.resize(n);
  std::vector<double> values(n, NAN);
  std::vector<double> residuals(n, NAN);
  std::vector<CostBreakdown> quad(n, CostBreakdown{NAN, NAN, NAN, NAN});
  run_indexed(n, cfg.jobs, [&](int i) {
    HorizonRun& run = out.runs[i];
    run.horizon = cfg.horizons[i];
    try {
      const TimeGrid grid = TimeGrid::with_density(0.0, run.horizon, spp);
      const lqr::RiccatiPath pi = lqr::solve_differential_riccati(lq, grid);
      lqr::ClosedLoop cl = lqr::closed_loop(lq, pi, grid);
      values[i] = lqr::riccati_value(lq, pi, 0.0, lq.z);
      residuals[i] = lqr::riccati_residual(lq, pi);
      quad[i] = cl.cost;
      run.state = std::move(cl.state);
      run.control = std::move(cl.control);
      run.converged = true;
    } catch (const std::exception& e) {
      run.error = e.what();
    }
  });

  const TimeGrid ref_grid = TimeGrid::with_density(0.0, cfg.horizons.back(), spp);
  lqr::ClosedLoop ref_cl = lqr::closed_loop(lq, periodic, ref_grid);

  ExperimentReport& rep = out.report;
  rep.experiment_id = chi == 0.0 ? "periodic-lqr-chi0" : "periodic-lqr-chi1";
  ladder_detail::fill_common(rep, cfg, out.runs);
  rep.ith_reference_cost = ref;
  std::vector<double> done_values, err_state, err_ctrl;
  double worst_identity = 0.0;
  for (int i = 0; i < n; ++i) {
    const HorizonRun& r = out.runs[i];
    rep.costs.push_back(quad[i]);
    if (!r.state) {
      rep.window_errors.push_back({NAN, NAN});
      rep.terminal_norms.push_back(NAN);
      continue;
    }
    const WindowError e{restriction_error(*r.state, ref_cl.state, cfg.window),
                        restriction_error(*r.control, ref_cl.control, cfg.window)};
    rep.window_errors.push_back(e);
    rep.terminal_norms.push_back(r.state->terminal().norm());
    done_values.push_back(values[i]);
    err_state.push_back(e.state);
    err_ctrl.push_back(e.control);
    if (values[i] > 0.0) {
      worst_identity = std::max(worst_identity,
                                std::abs(quad[i].total - values[i]) / values[i]);
    }
  }
  nlohmann::json jv = nlohmann::json::array();
  for (double v : values) jv.push_back(report_detail::number(v));
  rep.extra["riccati_values"] = jv;
  nlohmann::json jr = nlohmann::json::array();
  for (double v : residuals) jr.push_back(report_detail::number(v));
  rep.extra["riccati_residuals"] = jr;
  rep.extra["chi"] = chi;
  const Eigen::Matrix2d pi0 = periodic.at(0);
  rep.extra["periodic_pi0"] = {pi0(0, 0), pi0(0, 1), pi0(1, 1)};
  rep.extra["monodromy_spectral_radius"] =
      lqr::spectral_radius(lqr::monodromy(lq, periodic));

  rep.verdicts.push_back(verdict_all_completed(rep));
  rep.verdicts.push_back(verdict_error_to_reference(
      "cost_converges_to_reference", done_values, ref, cfg.tol.lqr_final_rel));
  rep.verdicts.push_back(verdict_non_increasing("window_errors_non_increasing",
                                                {err_state, err_ctrl},
                                                cfg.tol.monotone_slack));
  if (chi == 0.0) {
    rep.verdicts.push_back(
        verdict_non_decreasing("cost_non_decreasing", done_values, 0.0));
    rep.verdicts.push_back(verdict_bounded_by("fth_cost_below_reference", done_values,
                                              ref, cfg.tol.ith_bound_rel));
  }
  Verdict ident{"riccati_value_matches_quadrature", worst_identity <= 1e-6,
                1e-6 - worst_identity,
                "worst relative gap " + report_detail::sci(worst_identity)};
  rep.verdicts.push_back(ident);
  out.reference_state = std::move(ref_cl.state);
  out.reference_control = std::move(ref_cl.control);
  return out;
}

/// |y_T(T)| with terminal weight 1 is at most the unweighted one, per horizon.
inline Verdict terminal_penalty_effect(const ExperimentReport& chi0,
                                       const ExperimentReport& chi1) {
  Verdict v{"terminal_norm_reduced_by_penalty", true, INFINITY, {}};
  for (std::size_t i = 0; i < chi0.horizons.size(); ++i) {
    for (std::size_t j = 0; j < chi1.horizons.size(); ++j) {
      if (chi0.horizons[i] != chi1.horizons[j]) continue;
      const double room = chi0.terminal_norms[i] - chi1.terminal_norms[j];
      v.margin = std::min(v.margin, room);
      if (!(room >= 0.0)) {
        v.pass = false;
        v.detail = "T=" + report_detail::sci(chi0.horizons[i]);
      }
    }
  }
  if (!std::isfinite(v.margin)) v.margin = 0.0;
  return v;
}

struct SchloglOutcome {
  LadderOutcome ladder;
  pde::FemMesh mesh;
  std::optional<StatePath> free_state;  // uncontrolled run, when requested
};

/// Horizon ladder for the Schloegl model; the longest horizon is the
/// reference.
inline SchloglOutcome run_schlogl_ladder(const ExperimentConfig& cfg) {
  cfg.validate();
  const pde::SchloglProblem p;
  SchloglOutcome so{{}, pde::build_mesh(p, cfg.schlogl.n_elements), std::nullopt};
  const pde::FemMesh& mesh = so.mesh;
  const Eigen::VectorXd z = mesh.sample(pde::initial_profile);
  const double spu = 1.0 / cfg.schlogl.dt;
  LadderOutcome& out = so.ladder;
  out.runs = ladder_detail::solve_horizons(
      cfg,
      [&](double T) {
        const TimeGrid grid = TimeGrid::with_density(0.0, T, spu);
        return std::make_tuple(pde::schlogl_callbacks(p, mesh, grid), z, grid,
                               RowMatrix(RowMatrix::Zero(grid.size(), p.n_actuators)));
      },
      p.box, solve_options(cfg.tol, cfg.tol.gradient_pde));

  ExperimentReport& rep = out.report;
  rep.experiment_id = "schlogl";
  ladder_detail::fill_common(rep, cfg, out.runs);
  const HorizonRun& ref = out.runs.back();
  const RowSquaredNorm h_norm = [&](const Eigen::Ref<const Eigen::RowVectorXd>& d) {
    return pde::h_norm_sq(mesh, d.transpose());
  };

  std::vector<double> totals, err_state, err_ctrl;
  double max_abs_u = 0.0;
  nlohmann::json iters = nlohmann::json::array();
  for (const auto& r : out.runs) {
    if (!r.state) {
      rep.costs.push_back({NAN, NAN, NAN, NAN});
      rep.window_errors.push_back({NAN, NAN});
      rep.terminal_norms.push_back(NAN);
      iters.push_back(nullptr);
      continue;
    }
    const CostBreakdown c = pde::schlogl_cost(p, mesh, *r.state, *r.control);
    rep.costs.push_back(c);
    totals.push_back(c.total);
    rep.terminal_norms.push_back(std::sqrt(pde::h_norm_sq(mesh, r.state->terminal())));
    max_abs_u = std::max(max_abs_u, r.control->values().cwiseAbs().maxCoeff());
    iters.push_back({{"iterations", r.iterations}, {"converged", r.converged}});
    if (ref.state) {
      const WindowError e{restriction_error(*r.state, *ref.state, cfg.window, h_norm),
                          restriction_error(*r.control, *ref.control, cfg.window)};
      rep.window_errors.push_back(e);
      if (&r != &ref) {
        err_state.push_back(e.state);
        err_ctrl.push_back(e.control);
      }
    } else {
      rep.window_errors.push_back({NAN, NAN});
    }
  }
  rep.extra["optimizer"] = iters;
  rep.extra["max_abs_control"] = max_abs_u;

  rep.verdicts.push_back(verdict_all_completed(rep));
  rep.verdicts.push_back(verdict_non_increasing("window_errors_non_increasing",
                                                {err_state, err_ctrl},
                                                cfg.tol.monotone_slack));
  if (ref.state) {
    const double ref_cost = rep.costs.back().total;
    rep.ith_reference_cost = ref_cost;
    rep.verdicts.push_back(verdict_bounded_by("fth_cost_below_reference", totals,
                                              ref_cost, cfg.tol.ith_bound_rel));
    const double sat = ref.control->values().cwiseAbs().maxCoeff();
    rep.verdicts.push_back({"controls_within_box", max_abs_u <= p.box, p.box - max_abs_u,
                            "max |u| " + report_detail::sci(max_abs_u)});
    rep.verdicts.push_back({"reference_control_saturates", sat == p.box, sat - p.box,
                            "max |u| at the reference horizon " + report_detail::sci(sat)});
    const double start = std::sqrt(pde::project_modes(mesh, ref.state->at(0)).penalty);
    const double end = std::sqrt(pde::project_modes(mesh, ref.state->terminal()).penalty);
    rep.extra["projected_norm_start"] = start;
    rep.extra["projected_norm_end"] = end;
    rep.verdicts.push_back({"projected_state_decays", end * cfg.tol.decay_factor <= start,
                            start / cfg.tol.decay_factor - end,
                            "|P y(T)|/|P y(0)| = " + report_detail::sci(end / start)});
    const pde::EnergyReport en = pde::energy_diagnostics(p, mesh, *ref.state, *ref.control);
    rep.extra["energy"] = {{"c1", en.c1}, {"alpha", en.alpha}, {"kappa", en.kappa},
                           {"t_circle", en.t_circle}, {"min_norm_sq", en.min_norm_sq}};
  }

  if (cfg.schlogl.free_dynamics) {
    const TimeGrid fg = TimeGrid::with_density(0.0, cfg.schlogl.free_horizon, spu);
    StatePath free = pde::cnab_forward(p, mesh, fg, ControlSignal::zeros(fg, p.n_actuators), z);
    const Eigen::VectorXd two = Eigen::VectorXd::Constant(mesh.n_nodes(), p.zeta[2]);
    nlohmann::json dist = nlohmann::json::array();
    std::vector<double> d;
    for (int k = 0; k < fg.size(); k += static_cast<int>(std::lround(spu / 10.0))) {
      const double v = std::sqrt(pde::h_norm_sq(mesh, free.at(k) - two));
      d.push_back(v);
      dist.push_back({fg.node(k), v});
    }
    const double final_dist = std::sqrt(pde::h_norm_sq(mesh, free.terminal() - two));
    rep.extra["free_distance_to_equilibrium"] = dist;
    rep.verdicts.push_back(verdict_non_increasing("free_distance_non_increasing", {d}, 0.0));
    rep.verdicts.push_back({"free_dynamics_reach_equilibrium",
                            final_dist < cfg.tol.free_equilibrium_dist,
                            cfg.tol.free_equilibrium_dist - final_dist,
                            "|y(T)-2|_H = " + report_detail::sci(final_dist)});
    so.free_state = std::move(free);
  }
  out.reference_state = ref.state;
  out.reference_control = ref.control;
  return so;
}

}  // namespace fthlab::harness
