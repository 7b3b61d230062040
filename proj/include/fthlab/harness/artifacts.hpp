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

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fthlab/core/io.hpp"
#include "fthlab/harness/ladder.hpp"
#include "fthlab/harness/report.hpp"
#include "fthlab/harness/svg.hpp"

namespace fthlab::harness {

namespace fs = std::filesystem;

/// "T1", "T0.3", ... for file names.
inline std::string horizon_tag(double T) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "T%g", T);
  return buf;
}

inline void write_json(const fs::path& file, const nlohmann::json& j) {
  write_text(file, j.dump(2) + "\n");
}

inline void write_trace_csv(const fs::path& file, const std::vector<optim::TraceRow>& trace) {
  RowMatrix rows(trace.size(), 4);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    rows.row(i) << trace[i].iter, trace[i].cost, trace[i].grad_norm, trace[i].step;
  }
  write_csv(file, {"iter", "cost", "grad_norm", "step"}, rows);
}

/// T, cost terms, window errors and terminal norm per horizon.
inline void write_convergence_csv(const fs::path& file, const ExperimentReport& r) {
  RowMatrix rows(r.horizons.size(), 8);
  for (std::size_t i = 0; i < r.horizons.size(); ++i) {
    const CostBreakdown& c = r.costs[i];
    rows.row(i) << r.horizons[i], c.state_term, c.control_term, c.terminal_term, c.total,
        r.window_errors[i].state, r.window_errors[i].control, r.terminal_norms[i];
  }
  write_csv(file, {"T", "state_term", "control_term", "terminal_term", "total",
                   "window_state_error", "window_control_error", "terminal_norm"},
            rows);
}

/// Error-versus-horizon panels on log scale.
inline Panel convergence_panel(const ExperimentReport& r, const std::string& title,
                               const std::vector<double>* costs = nullptr) {
  Panel p{title, "T", "error", true, {}};
  Series s{"window state error", {}, {}};
  Series c{"window control error", {}, {}};
  Series j{"|cost - reference|", {}, {}};
  for (std::size_t i = 0; i < r.horizons.size(); ++i) {
    s.x.push_back(r.horizons[i]);
    s.y.push_back(r.window_errors[i].state);
    c.x.push_back(r.horizons[i]);
    c.y.push_back(r.window_errors[i].control);
    if (r.ith_reference_cost) {
      const double v = costs ? (*costs)[i] : r.costs[i].total;
      j.x.push_back(r.horizons[i]);
      j.y.push_back(std::abs(v - *r.ith_reference_cost));
    }
  }
  p.series = {s, c};
  if (r.ith_reference_cost) p.series.push_back(j);
  return p;
}

/// Panels of one state/control column over time for every horizon, plus
/// the reference when present.
inline std::vector<Panel> trajectory_panels(const LadderOutcome& o,
                                            const std::vector<std::string>& state_names,
                                            const std::vector<std::string>& control_names) {
  std::vector<Panel> panels;
  auto add = [&](const std::string& name, int col, bool is_state) {
    Panel p{name + "(t)", "t", name, false, {}};
    auto series_of = [&](const std::string& label, const TimeGrid& g, const RowMatrix& v) {
      Series s{label, {}, {}};
      const int stride = std::max(1, g.n_steps() / 400);
      for (int k = 0; k < g.size(); k += stride) {
        s.x.push_back(g.node(k));
        s.y.push_back(v(k, col));
      }
      return s;
    };
    for (const auto& r : o.runs) {
      if (!r.state) continue;
      const RowMatrix& v = is_state ? r.state->values() : r.control->values();
      p.series.push_back(series_of(horizon_tag(r.horizon), r.state->grid(), v));
    }
    if (o.reference_state && o.reference_control) {
      const RowMatrix& v = is_state ? o.reference_state->values() : o.reference_control->values();
      p.series.push_back(series_of("reference", o.reference_state->grid(), v));
    }
    panels.push_back(std::move(p));
  };
  for (std::size_t i = 0; i < state_names.size(); ++i) add(state_names[i], static_cast<int>(i), true);
  for (std::size_t i = 0; i < control_names.size(); ++i) add(control_names[i], static_cast<int>(i), false);
  return panels;
}

inline void write_scalar_artifacts(const fs::path& dir, const LadderOutcome& o) {
  for (const auto& r : o.runs) {
    if (!r.state) continue;
    const std::string tag = horizon_tag(r.horizon);
    write_trajectory_csv(dir / ("trajectory_" + tag + ".csv"), *r.state, *r.control, {"y"}, {"u"});
    write_trace_csv(dir / ("trace_" + tag + ".csv"), r.trace);
  }
  write_trajectory_csv(dir / "reference_ith.csv", *o.reference_state, *o.reference_control,
                       {"y"}, {"u"});
  write_convergence_csv(dir / "convergence.csv", o.report);
  write_text(dir / "convergence.svg", render_svg({convergence_panel(o.report, "scalar ladder")}));
  write_text(dir / "trajectories.svg", render_svg(trajectory_panels(o, {"y"}, {"u"})));
  write_json(dir / "report.json", to_json(o.report));
}

inline void write_lqr_artifacts(const fs::path& dir, const LadderOutcome& o,
                                const lqr::PeriodicLQ& lq, const lqr::RiccatiPath& periodic) {
  for (const auto& r : o.runs) {
    if (!r.state) continue;
    const std::string tag = horizon_tag(r.horizon);
    write_trajectory_csv(dir / ("trajectory_" + tag + ".csv"), *r.state, *r.control,
                         {"y1", "y2"}, {"u"});
    const lqr::RiccatiPath pi = lqr::solve_differential_riccati(lq, r.state->grid());
    RowMatrix rows(pi.grid.size(), 4);
    for (int k = 0; k < pi.grid.size(); ++k) {
      rows.row(k) << pi.grid.node(k), pi.at(k)(0, 0), pi.at(k)(0, 1), pi.at(k)(1, 1);
    }
    write_csv(dir / ("riccati_" + tag + ".csv"), {"t", "pi11", "pi12", "pi22"}, rows);
  }
  RowMatrix rows(periodic.grid.size(), 4);
  for (int k = 0; k < periodic.grid.size(); ++k) {
    rows.row(k) << periodic.grid.node(k), periodic.at(k)(0, 0), periodic.at(k)(0, 1),
        periodic.at(k)(1, 1);
  }
  write_csv(dir / "periodic_riccati.csv", {"t", "pi11", "pi12", "pi22"}, rows);
  write_trajectory_csv(dir / "reference_ith.csv", *o.reference_state, *o.reference_control,
                       {"y1", "y2"}, {"u"});
  std::vector<double> values;
  for (const auto& v : o.report.extra["riccati_values"]) {
    values.push_back(v.is_number() ? v.get<double>() : NAN);
  }
  write_convergence_csv(dir / "convergence.csv", o.report);
  write_text(dir / "convergence.svg",
             render_svg({convergence_panel(o.report, o.report.experiment_id, &values)}));
  write_text(dir / "trajectories.svg", render_svg(trajectory_panels(o, {"y1", "y2"}, {"u"})));
  write_json(dir / "report.json", to_json(o.report));
}

inline void write_schlogl_artifacts(const fs::path& dir, const SchloglOutcome& so,
                                    const std::vector<double>& snapshot_times) {
  const LadderOutcome& o = so.ladder;
  const pde::FemMesh& mesh = so.mesh;
  auto snapshots = [&](const fs::path& file, const StatePath& y) {
    std::vector<std::string> header{"x"};
    std::vector<double> times;
    for (double t : snapshot_times) {
      if (!y.grid().contains(t, 1e-12)) continue;
      times.push_back(t);
      char buf[32];
      std::snprintf(buf, sizeof buf, "t=%g", t);
      header.emplace_back(buf);
    }
    times.push_back(y.grid().t_end());
    char buf[32];
    std::snprintf(buf, sizeof buf, "t=%g", y.grid().t_end());
    header.emplace_back(buf);
    RowMatrix rows(mesh.n_nodes(), header.size());
    rows.col(0) = mesh.nodes;
    for (std::size_t j = 0; j < times.size(); ++j) {
      rows.col(j + 1) = sample_linear(y.grid(), y.values(), times[j]).transpose();
    }
    write_csv(file, header, rows);
  };
  for (const auto& r : o.runs) {
    if (!r.state) continue;
    const std::string tag = horizon_tag(r.horizon);
    snapshots(dir / ("snapshots_" + tag + ".csv"), *r.state);
    const TimeGrid& g = r.control->grid();
    RowMatrix rows(g.size(), 1 + r.control->channels());
    for (int k = 0; k < g.size(); ++k) {
      rows(k, 0) = g.node(k);
      rows.block(k, 1, 1, r.control->channels()) = r.control->values().row(k);
    }
    std::vector<std::string> header{"t"};
    const auto names = numbered("u", r.control->channels());
    header.insert(header.end(), names.begin(), names.end());
    write_csv(dir / ("controls_" + tag + ".csv"), header, rows);
    write_trace_csv(dir / ("trace_" + tag + ".csv"), r.trace);
  }
  if (so.free_state) snapshots(dir / "free_snapshots.csv", *so.free_state);
  write_convergence_csv(dir / "convergence.csv", o.report);
  write_text(dir / "convergence.svg", render_svg({convergence_panel(o.report, "schlogl ladder")}));
  std::vector<Panel> ctrl;
  for (const auto& r : o.runs) {
    if (!r.control || (r.horizon != o.runs.front().horizon && r.horizon != o.runs.back().horizon)) continue;
    Panel p{"controls " + horizon_tag(r.horizon), "t", "u_j", false, {}};
    const TimeGrid& g = r.control->grid();
    for (int j = 0; j < r.control->channels(); ++j) {
      Series s{"u" + std::to_string(j + 1), {}, {}};
      for (int k = 0; k < g.size(); ++k) {
        s.x.push_back(g.node(k));
        s.y.push_back(r.control->values()(k, j));
      }
      p.series.push_back(std::move(s));
    }
    ctrl.push_back(std::move(p));
  }
  write_text(dir / "controls.svg", render_svg(ctrl));
  write_json(dir / "report.json", to_json(o.report));
}

inline void write_counterexample_artifacts(const fs::path& dir, const ExperimentReport& r) {
  RowMatrix rows(r.horizons.size(), 4);
  for (std::size_t i = 0; i < r.horizons.size(); ++i) {
    rows.row(i) << r.horizons[i], r.extra["simulated_costs"][i].get<double>(),
        r.extra["closed_form_costs"][i].get<double>(), 0.0;
  }
  write_csv(dir / "costs.csv", {"T", "fth_simulated", "fth_closed_form", "ith"}, rows);
  Panel p{"uncoupled example", "T", "cost", true, {}};
  Series s{"finite horizon", r.horizons, {}};
  for (std::size_t i = 0; i < r.horizons.size(); ++i) s.y.push_back(rows(i, 1));
  p.series.push_back(s);
  write_text(dir / "costs.svg", render_svg({p}));
  write_json(dir / "report.json", to_json(r));
}

}  // namespace fthlab::harness
