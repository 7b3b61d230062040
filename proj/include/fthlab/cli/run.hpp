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
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fthlab/core/config.hpp"
#include "fthlab/core/errors.hpp"
#include "fthlab/harness/artifacts.hpp"
#include "fthlab/harness/checks.hpp"
#include "fthlab/harness/ladder.hpp"

namespace fthlab::cli {

enum ExitCode : int {
  kPass = 0,
  kVerdictFailure = 1,
  kConfigError = 2,
  kNumericalFailure = 3,
};

/// Raw flag text; every flag maps onto a configuration key.
struct Flags {
  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> overrides;
  bool free_dynamics = false;
  bool warm_start = false;
  double dpp_steps = 4000.0;
};

namespace detail {

inline void add_flags(CLI::App* sub, Flags& f, std::map<std::string, std::string>& raw) {
  auto opt = [&](const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&raw, key](const std::string& v) { raw[key] = v; }, help);
  };
  opt("--horizons", "experiment.horizons", "comma-separated horizon list, e.g. 1,2,3,4");
  opt("--window", "experiment.window", "restriction window s,r");
  opt("--jobs", "experiment.jobs", "worker threads for the horizon ladder");
  opt("--output,-o", "experiment.output", "output directory");
  opt("--n", "scalar.n", "exponent parameter of the scalar system");
  opt("--y0", "scalar.y0", "initial state of the scalar system and the counterexample");
  opt("--chi", "lqr.chi", "terminal weight(s) for the periodic LQ problem, e.g. 0 or 0,1");
  opt("--z", "lqr.z", "initial state of the periodic LQ problem, z1,z2");
  opt("--steps-per-unit", "scalar.steps_per_unit", "time steps per unit for the scalar system");
  opt("--steps-per-period", "lqr.steps_per_period", "time steps per period for the LQ problem");
  opt("--n-elements", "schlogl.n_elements", "finite elements for the Schloegl model");
  opt("--dt", "schlogl.dt", "time step for the Schloegl model");
  opt("--max-iterations", "tolerances.max_iterations", "optimizer iteration cap");
  sub->add_option("--config,-c", f.config_path, "key=value configuration file");
  sub->add_option("--set", f.sets, "override section.key=value (repeatable)");
  sub->add_flag("--free-dynamics", f.free_dynamics, "also simulate the uncontrolled Schloegl model");
  sub->add_flag("--warm-start", f.warm_start,
                "start each horizon from the previous control extended by zero");
}

inline ExperimentConfig build_config(Family family, std::vector<double> horizons,
                                     const Flags& f,
                                     const std::map<std::string, std::string>& raw,
                                     bool check = true) {
  ExperimentConfig c = default_config(family);
  if (!horizons.empty()) c.horizons = std::move(horizons);
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw ConfigError("cannot read config file '" + f.config_path + "'");
    apply_settings(c, family, parse_key_value_config(in));
  }
  std::map<std::string, std::string> sets;
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + s + "'");
    sets[s.substr(0, eq)] = s.substr(eq + 1);
  }
  apply_settings(c, family, sets);
  apply_settings(c, family, raw);
  if (f.free_dynamics) c.schlogl.free_dynamics = true;
  if (f.warm_start) c.warm_start = true;
  if (check) c.validate();
  return c;
}

inline void print_verdicts(std::ostream& out, const std::string& prefix,
                           const harness::ExperimentReport& r) {
  for (const auto& v : r.verdicts) {
    out << (v.pass ? "[PASS] " : "[FAIL] ") << prefix << "." << v.name << "  margin="
        << harness::report_detail::sci(v.margin);
    if (!v.detail.empty()) out << "  (" << v.detail << ")";
    out << "\n";
  }
}

inline int code_for(const harness::ExperimentReport& r) {
  for (bool done : r.completed) {
    if (!done) return kNumericalFailure;
  }
  return r.all_pass() ? kPass : kVerdictFailure;
}

inline std::string label(const std::string& prefix, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%g", prefix.c_str(), v);
  return buf;
}

inline int worst(int a, int b) { return std::max(a, b); }

namespace fs = std::filesystem;

inline int run_scalar(const ExperimentConfig& c, const fs::path& dir, std::ostream& out) {
  const harness::LadderOutcome o = harness::run_scalar_ladder(c);
  harness::write_scalar_artifacts(dir, o);
  print_verdicts(out, "scalar", o.report);
  return code_for(o.report);
}

inline int run_lqr(const ExperimentConfig& c, const fs::path& dir, std::ostream& out) {
  int code = kPass;
  nlohmann::json top;
  top["runs"] = nlohmann::json::object();
  std::map<double, harness::ExperimentReport> by_chi;
  for (double chi : c.lqr.chis) {
    const harness::LadderOutcome o = harness::run_lqr_ladder(c, chi);
    lqr::PeriodicLQ lq;
    lq.chi = chi;
    lq.z = c.lqr.z;
    const lqr::RiccatiPath periodic =
        lqr::solve_periodic_riccati(lq, c.lqr.steps_per_period, c.tol.riccati_periodicity);
    const std::string tag = label("chi", chi);
    harness::write_lqr_artifacts(dir / tag, o, lq, periodic);
    print_verdicts(out, "periodic-lqr." + tag, o.report);
    code = worst(code, code_for(o.report));
    top["runs"][tag] = harness::to_json(o.report);
    by_chi[chi] = o.report;
  }
  nlohmann::json verdicts = nlohmann::json::object();
  if (by_chi.count(0.0) && by_chi.count(1.0)) {
    harness::ExperimentReport cross;
    cross.verdicts.push_back(harness::terminal_penalty_effect(by_chi[0.0], by_chi[1.0]));
    print_verdicts(out, "periodic-lqr", cross);
    if (!cross.all_pass()) code = worst(code, kVerdictFailure);
    for (const auto& v : cross.verdicts) {
      verdicts[v.name] = {{"pass", v.pass}, {"margin", v.margin}, {"detail", v.detail}};
    }
  }
  top["verdicts"] = verdicts;
  harness::write_json(dir / "report.json", top);
  return code;
}

inline int run_schlogl(const ExperimentConfig& c, const fs::path& dir, std::ostream& out) {
  const harness::SchloglOutcome so = harness::run_schlogl_ladder(c);
  harness::write_schlogl_artifacts(dir, so, c.schlogl.snapshot_times);
  print_verdicts(out, "schlogl", so.ladder.report);
  return code_for(so.ladder.report);
}

inline int run_counterexample(const ExperimentConfig& c, const fs::path& dir,
                              std::ostream& out) {
  const harness::ExperimentReport r = harness::counterexample_report(c.scalar.y0, c.horizons);
  harness::write_counterexample_artifacts(dir, r);
  print_verdicts(out, "counterexample", r);
  return code_for(r);
}

inline int run_dpp(const ExperimentConfig& c, double steps, const fs::path& dir,
                   std::ostream& out) {
  harness::ExperimentReport r;
  r.experiment_id = "dpp-check";
  r.horizons = c.horizons;
  r.window = {0.0, c.horizons.front()};
  nlohmann::json res = nlohmann::json::object();
  const std::vector<std::pair<Family, double>> fams{
      {Family::kScalar, c.tol.dpp_scalar}, {Family::kPeriodicLqr, c.tol.dpp_lqr}};
  for (const auto& [fam, bound] : fams) {
    const std::string name = family_name(fam);
    double worst_res = 0.0;
    nlohmann::json per_t = nlohmann::json::array();
    bool second_order = true;
    double worst_ratio_gap = INFINITY;
    for (double T : c.horizons) {
      std::vector<double> ladder;
      for (double d : {steps / 4.0, steps / 2.0, steps}) {
        ladder.push_back(harness::dpp_check(c, fam, 0.0, T, d).residual);
      }
      worst_res = std::max(worst_res, ladder.back());
      for (int i = 1; i < 3; ++i) {
        const double ratio = ladder[i - 1] / ladder[i];
        worst_ratio_gap = std::min(worst_ratio_gap, 1.0 - std::abs(ratio - 4.0));
        if (!(ratio > 3.0 && ratio < 5.0)) second_order = false;
      }
      per_t.push_back({{"T", T}, {"residuals_by_refinement", ladder}});
    }
    res[name] = per_t;
    r.verdicts.push_back({name + "_residual_bound", worst_res < bound, bound - worst_res,
                          "max residual " + harness::report_detail::sci(worst_res) +
                              " vs " + harness::report_detail::sci(bound)});
    r.verdicts.push_back({name + "_second_order_refinement", second_order, worst_ratio_gap,
                          "residual ratio under halving within (3,5)"});
  }
  r.extra["steps_per_unit"] = {steps / 4.0, steps / 2.0, steps};
  r.extra["residuals"] = res;
  r.completed.assign(c.horizons.size(), true);
  r.failures.assign(c.horizons.size(), "");
  harness::write_json(dir / "report.json", harness::to_json(r));
  print_verdicts(out, "dpp-check", r);
  return code_for(r);
}

}  // namespace detail

/// Parses the command line, runs the selected experiment(s) and writes the
/// artifacts. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite- vs infinite-horizon optimal control experiments", "fthlab"};
  app.require_subcommand(1);
  Flags f;
  std::map<std::string, std::string> raw;
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"scalar", "horizon ladder for y' = y^(2n-1) + u"},
      {"periodic-lqr", "horizon ladder for the time-periodic LQ problem"},
      {"schlogl", "horizon ladder for the Schloegl reaction-diffusion model"},
      {"counterexample", "uncoupled example where the horizon limit fails"},
      {"dpp-check", "dynamic programming identity on the infinite-horizon pairs"},
      {"all", "run every experiment into subdirectories of --output"},
  };
  std::map<std::string, CLI::App*> apps;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    detail::add_flags(sub, f, raw);
    if (std::string(s.name) == "dpp-check" || std::string(s.name) == "all") {
      sub->add_option("--dpp-steps", f.dpp_steps, "finest steps per unit for the DPP check");
    }
    apps[s.name] = sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kConfigError;
  }

  try {
    auto output = [&](const ExperimentConfig& c) { return std::filesystem::path(c.output_dir); };
    auto counter_config = [&] {
      ExperimentConfig c = detail::build_config(Family::kScalar, {1, 2, 3}, f, raw, false);
      c.window = {0.0, c.horizons.front()};
      c.validate();
      return c;
    };
    auto dpp_config = [&] {
      ExperimentConfig c = detail::build_config(Family::kScalar, {1, 2}, f, raw, false);
      c.window = {0.0, c.horizons.front()};
      c.validate();
      return c;
    };
    if (apps["scalar"]->parsed()) {
      const auto c = detail::build_config(Family::kScalar, {}, f, raw);
      return detail::run_scalar(c, output(c), out);
    }
    if (apps["periodic-lqr"]->parsed()) {
      const auto c = detail::build_config(Family::kPeriodicLqr, {}, f, raw);
      return detail::run_lqr(c, output(c), out);
    }
    if (apps["schlogl"]->parsed()) {
      const auto c = detail::build_config(Family::kSchlogl, {}, f, raw);
      return detail::run_schlogl(c, output(c), out);
    }
    if (apps["counterexample"]->parsed()) {
      const auto c = counter_config();
      return detail::run_counterexample(c, output(c), out);
    }
    if (apps["dpp-check"]->parsed()) {
      const auto c = dpp_config();
      return detail::run_dpp(c, f.dpp_steps, output(c), out);
    }
    // all: family defaults, one subdirectory each.
    if (raw.count("experiment.horizons") || raw.count("experiment.window")) {
      throw ConfigError("'all' uses per-family horizons; set them in a config file section");
    }
    int code = kPass;
    const auto sc = detail::build_config(Family::kScalar, {}, f, raw);
    const std::filesystem::path root = output(sc);
    code = detail::worst(code, detail::run_scalar(sc, root / "scalar", out));
    const auto lc = detail::build_config(Family::kPeriodicLqr, {}, f, raw);
    code = detail::worst(code, detail::run_lqr(lc, root / "periodic-lqr", out));
    const auto pc = detail::build_config(Family::kSchlogl, {}, f, raw);
    code = detail::worst(code, detail::run_schlogl(pc, root / "schlogl", out));
    const auto cc = counter_config();
    code = detail::worst(code, detail::run_counterexample(cc, root / "counterexample", out));
    const auto dc = dpp_config();
    code = detail::worst(code, detail::run_dpp(dc, f.dpp_steps, root / "dpp-check", out));
    return code;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "output error: " << e.what() << "\n";
    return kConfigError;
  } catch (const BlowUpError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

}  // namespace fthlab::cli
