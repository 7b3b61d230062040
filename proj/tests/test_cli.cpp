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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fthlab/cli/run.hpp"

namespace fthlab::cli {
namespace {

namespace fs = std::filesystem;

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fthlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fthlab_cli_" + name);
  fs::remove_all(p);
  return p;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

TEST(Cli, HelpExitsZero) {
  const Invocation r = invoke({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("scalar"), std::string::npos);
  EXPECT_EQ(invoke({"scalar", "--help"}).code, 0);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"bogus"}).code, 2);
  EXPECT_EQ(invoke({"scalar", "--n", "two"}).code, 2);
  EXPECT_EQ(invoke({"scalar", "--unknown-flag"}).code, 2);
  EXPECT_EQ(invoke({"scalar", "--horizons", "2,1", "-o", scratch("bad1").string()}).code, 2);
  EXPECT_EQ(invoke({"scalar", "--window", "0,5", "-o", scratch("bad2").string()}).code, 2);
  EXPECT_EQ(invoke({"scalar", "--set", "scalar.nope=1", "-o", scratch("bad3").string()}).code, 2);
  EXPECT_EQ(invoke({"scalar", "--config", "/nonexistent/file.cfg"}).code, 2);
  EXPECT_EQ(invoke({"all", "--horizons", "1,2"}).code, 2);
  EXPECT_EQ(invoke({"schlogl", "--n-elements", "16", "-o", scratch("bad4").string()}).code, 2);
}

TEST(Cli, ScalarDefaultsWriteArtifacts) {
  const fs::path dir = scratch("scalar");
  const Invocation r = invoke({"scalar", "-o", dir.string()});
  for (const char* t : {"T1", "T2", "T3", "T4"}) {
    EXPECT_TRUE(fs::exists(dir / ("trajectory_" + std::string(t) + ".csv"))) << t;
    EXPECT_TRUE(fs::exists(dir / ("trace_" + std::string(t) + ".csv"))) << t;
  }
  for (const char* f : {"report.json", "convergence.csv", "convergence.svg", "trajectories.svg",
                        "reference_ith.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const nlohmann::json j = read_json(dir / "report.json");
  EXPECT_EQ(j["experiment_id"], "scalar");
  EXPECT_EQ(j["horizons"].size(), 4u);
  EXPECT_EQ(r.code, j["all_pass"].get<bool>() ? 0 : 1);
  std::ifstream traj(dir / "trajectory_T1.csv");
  std::string header;
  std::getline(traj, header);
  EXPECT_EQ(header.rfind("t,", 0), 0u);
}

TEST(Cli, ScalarDefaultsPassAllVerdicts) {
  EXPECT_EQ(invoke({"scalar", "-o", scratch("scalar_pass").string()}).code, 0);
}

TEST(Cli, CounterexampleExitsZero) {
  const fs::path dir = scratch("counter");
  const Invocation r = invoke({"counterexample", "--y0", "1", "-o", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const nlohmann::json j = read_json(dir / "report.json");
  EXPECT_TRUE(j["all_pass"].get<bool>());
  const auto& costs = j["extra"]["simulated_costs"];
  ASSERT_EQ(costs.size(), 3u);
  EXPECT_LT(costs[0].get<double>(), costs[2].get<double>());
  EXPECT_TRUE(fs::exists(dir / "costs.csv"));
}

TEST(Cli, FlagsOverrideConfigFileAndSet) {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  const fs::path cfg = dir / "run.cfg";
  {
    std::ofstream o(cfg);
    o << "horizons = 1, 2\n[scalar]\nn = 3\ny0 = 0.5\nsteps_per_unit = 200\n";
  }
  const fs::path out = dir / "out";
  const Invocation r = invoke({"scalar", "--config", cfg.string(), "--set", "scalar.y0=0.7",
                               "--y0", "0.6", "-o", out.string()});
  ASSERT_NE(r.code, 2) << r.err;
  const nlohmann::json j = read_json(out / "report.json");
  EXPECT_EQ(j["horizons"], nlohmann::json({1.0, 2.0}));
  // (1 + xi)/(2n) y0^(2n), n = 3, y0 = 0.6 from the flag
  const double xi = std::sqrt(1.0 + 1.0 / 5.0);
  EXPECT_NEAR(j["ith_reference_cost"].get<double>(), (1 + xi) / 6.0 * std::pow(0.6, 6), 1e-15);
  EXPECT_TRUE(fs::exists(out / "trajectory_T2.csv"));
  EXPECT_FALSE(fs::exists(out / "trajectory_T3.csv"));
}

TEST(Cli, PeriodicLqrWritesBothTerminalWeights) {
  const fs::path dir = scratch("lqr");
  const Invocation r = invoke({"periodic-lqr", "--horizons", "1,2,3", "-o", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "chi0" / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "chi1" / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  const Invocation one = invoke({"periodic-lqr", "--chi", "1", "--horizons", "1,2,3",
                                 "-o", scratch("lqr1").string()});
  EXPECT_EQ(one.code, 0) << one.err;
}

TEST(Cli, DppCheckPasses) {
  const fs::path dir = scratch("dpp");
  const Invocation r = invoke({"dpp-check", "-o", dir.string()});
  EXPECT_EQ(r.code, 0) << r.err << r.out;
  EXPECT_TRUE(fs::exists(dir / "report.json"));
}

TEST(Cli, OutputIsDeterministic) {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  invoke({"scalar", "--horizons", "1,2", "-o", a.string()});
  invoke({"scalar", "--horizons", "1,2", "--jobs", "2", "-o", b.string()});
  int compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    std::ifstream fa(e.path(), std::ios::binary), fb(b / e.path().filename(), std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    EXPECT_EQ(sa.str(), sb.str()) << e.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 5);
}

}  // namespace
}  // namespace fthlab::cli
