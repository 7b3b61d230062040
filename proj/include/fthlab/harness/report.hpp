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
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fthlab/core/config.hpp"
#include "fthlab/core/cost.hpp"
#include "fthlab/core/restriction.hpp"

namespace fthlab::harness {

struct Verdict {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // >= 0 when passing
  std::string detail;
};

struct WindowError {
  double state = 0.0;
  double control = 0.0;
};

struct ExperimentReport {
  std::string experiment_id;
  std::vector<double> horizons;
  std::vector<CostBreakdown> costs;
  std::optional<double> ith_reference_cost;
  Window window;
  std::vector<WindowError> window_errors;
  std::vector<double> terminal_norms;
  std::vector<bool> completed;
  std::vector<std::string> failures;  // empty string when completed
  std::vector<Verdict> verdicts;
  nlohmann::json extra = nlohmann::json::object();

  bool all_pass() const {
    for (const auto& v : verdicts) {
      if (!v.pass) return false;
    }
    return true;
  }

  const Verdict* find(const std::string& name) const {
    for (const auto& v : verdicts) {
      if (v.name == name) return &v;
    }
    return nullptr;
  }
};

namespace report_detail {

/// JSON has no inf or nan; store them as strings.
inline nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

/// Short scientific form for verdict details.
inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace report_detail

inline nlohmann::json to_json(const CostBreakdown& c) {
  using report_detail::number;
  return {{"state_term", number(c.state_term)},
          {"control_term", number(c.control_term)},
          {"terminal_term", number(c.terminal_term)},
          {"total", number(c.total)}};
}

inline nlohmann::json to_json(const ExperimentReport& r) {
  using report_detail::number;
  nlohmann::json j;
  j["experiment_id"] = r.experiment_id;
  j["horizons"] = r.horizons;
  j["window"] = {r.window.s, r.window.r};
  nlohmann::json costs = nlohmann::json::array();
  for (const auto& c : r.costs) costs.push_back(to_json(c));
  j["costs"] = costs;
  j["ith_reference_cost"] =
      r.ith_reference_cost ? number(*r.ith_reference_cost) : nlohmann::json();
  nlohmann::json errs = nlohmann::json::array();
  for (const auto& e : r.window_errors) {
    errs.push_back({{"state", number(e.state)}, {"control", number(e.control)}});
  }
  j["restriction_errors"] = errs;
  nlohmann::json norms = nlohmann::json::array();
  for (double v : r.terminal_norms) norms.push_back(number(v));
  j["terminal_norms"] = norms;
  j["completed"] = r.completed;
  j["failures"] = r.failures;
  nlohmann::json verdicts = nlohmann::json::object();
  for (const auto& v : r.verdicts) {
    verdicts[v.name] = {{"pass", v.pass}, {"margin", number(v.margin)},
                        {"detail", v.detail}};
  }
  j["verdicts"] = verdicts;
  j["all_pass"] = r.all_pass();
  j["extra"] = r.extra;
  return j;
}

// Verdict rules. Each takes values aligned with the completed horizons.

/// |values[i] - ref| strictly decreasing, and the last one within final_rel
/// of |ref|.
inline Verdict verdict_error_to_reference(const std::string& name,
                                          const std::vector<double>& values,
                                          double ref, double final_rel) {
  Verdict v{name, false, 0.0, {}};
  if (values.empty()) {
    v.detail = "no completed horizons";
    return v;
  }
  double worst_drop = INFINITY;
  bool strict = true;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double drop = std::abs(values[i - 1] - ref) - std::abs(values[i] - ref);
    worst_drop = std::min(worst_drop, drop);
    if (!(drop > 0.0)) strict = false;
  }
  const double scale = std::abs(ref) > 0.0 ? std::abs(ref) : 1.0;
  const double final_err = std::abs(values.back() - ref) / scale;
  v.pass = strict && final_err < final_rel;
  v.margin = final_rel - final_err;
  v.detail = "final relative error " + report_detail::sci(final_err) + " vs " +
             report_detail::sci(final_rel) + (strict ? "" : "; error not strictly decreasing");
  return v;
}

/// Each sequence non-increasing up to slack.
inline Verdict verdict_non_increasing(const std::string& name,
                                      const std::vector<std::vector<double>>& seqs,
                                      double slack) {
  Verdict v{name, true, INFINITY, {}};
  for (const auto& s : seqs) {
    for (std::size_t i = 1; i < s.size(); ++i) {
      const double room = s[i - 1] + slack - s[i];
      v.margin = std::min(v.margin, room);
      if (room < 0.0) {
        v.pass = false;
        v.detail = "monotonicity broken at index " + std::to_string(i);
      }
    }
  }
  if (!std::isfinite(v.margin)) v.margin = 0.0;
  return v;
}

/// values non-decreasing up to slack.
inline Verdict verdict_non_decreasing(const std::string& name,
                                      const std::vector<double>& values,
                                      double slack) {
  std::vector<double> neg(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) neg[i] = -values[i];
  return verdict_non_increasing(name, {neg}, slack);
}

/// Every value <= ref + rel * |ref|.
inline Verdict verdict_bounded_by(const std::string& name,
                                  const std::vector<double>& values, double ref,
                                  double rel) {
  Verdict v{name, true, INFINITY, {}};
  const double cap = ref + rel * std::abs(ref);
  for (std::size_t i = 0; i < values.size(); ++i) {
    v.margin = std::min(v.margin, cap - values[i]);
    if (values[i] > cap) {
      v.pass = false;
      v.detail = "value " + std::to_string(i) + " exceeds the reference";
    }
  }
  if (!std::isfinite(v.margin)) v.margin = 0.0;
  return v;
}

inline Verdict verdict_all_completed(const ExperimentReport& r) {
  Verdict v{"all_horizons_completed", true, 0.0, {}};
  for (std::size_t i = 0; i < r.completed.size(); ++i) {
    if (!r.completed[i]) {
      v.pass = false;
      v.margin -= 1.0;
      v.detail += "T=" + report_detail::sci(r.horizons[i]) + ": " + r.failures[i] + "; ";
    }
  }
  return v;
}

}  // namespace fthlab::harness
