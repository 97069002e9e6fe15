/*
 Copyright 2026 The adptrack Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include "support.hpp"

#include "adptrack/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace adptrack;
using namespace adptrack::testing;
namespace fs = std::filesystem;

namespace {

struct Invocation {
    int code = -1;
    std::string out;
    std::string err;
};

Invocation run(std::vector<std::string> args)
{
    args.insert(args.begin(), "adptrack");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    Invocation r;
    r.code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path()
               / ("adptrack_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text) const
    {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

    static std::string slurp(const fs::path& p)
    {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path dir_;
};

std::string config_path(const std::string& file) { return std::string(ADPTRACK_SOURCE_DIR) + "/configs/" + file; }

} // namespace

TEST_F(CliTest, SimulateWritesOutputs)
{
    const auto cfg = write("s.json", R"({"scenario": "scalar_lq", "sim": {"T": 0.5}})");
    const auto r = run({"simulate", "--config", cfg, "--out", (dir_ / "out").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"trace.csv", "metrics.json", "effective_config.json", "stack.csv"}) {
        EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
    }
    const std::string csv = slurp(dir_ / "out" / "trace.csv");
    const std::string header = csv.substr(0, csv.find('\n'));
    EXPECT_EQ(header, "t,e_1,x_1,x_d_1,u_1,mu_hat_1,W_c_1,W_a_1,theta_hat_1_1,delta_t,"
                      "mean_abs_delta_i,excitation_level,cbar,gamma_norm,V0,e_norm");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 501);
    const auto metrics = nlohmann::json::parse(slurp(dir_ / "out" / "metrics.json"));
    EXPECT_EQ(metrics["rows"].get<int>(), 501);
    EXPECT_FALSE(metrics["diverged"].get<bool>());
    EXPECT_TRUE(metrics.contains("tail_rms_e"));
    const auto eff = nlohmann::json::parse(slurp(dir_ / "out" / "effective_config.json"));
    EXPECT_EQ(eff["sim"]["dt"].get<double>(), 0.001);
}

TEST_F(CliTest, TraceValuesUseSeventeenDigits)
{
    const auto cfg = write("s.json", R"({"scenario": "scalar_lq", "sim": {"T": 0.01}})");
    ASSERT_EQ(run({"simulate", "--config", cfg, "--out", (dir_ / "o").string()}).code, 0);
    std::istringstream csv(slurp(dir_ / "o" / "trace.csv"));
    std::string line;
    std::getline(csv, line);
    std::getline(csv, line);
    std::getline(csv, line);
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    const double e = std::stod(cell);
    EXPECT_EQ(io::fmt(e), cell);
}

TEST_F(CliTest, SameSeedGivesByteIdenticalTrace)
{
    const auto cfg = write("nl.json", R"({"scenario": "twostate_nl", "sim": {"T": 0.3}})");
    ASSERT_EQ(run({"simulate", "--config", cfg, "--out", (dir_ / "a").string()}).code, 0);
    ASSERT_EQ(run({"simulate", "--config", cfg, "--out", (dir_ / "b").string()}).code, 0);
    EXPECT_EQ(slurp(dir_ / "a" / "trace.csv"), slurp(dir_ / "b" / "trace.csv"));
    EXPECT_EQ(slurp(dir_ / "a" / "stack.csv"), slurp(dir_ / "b" / "stack.csv"));
}

TEST_F(CliTest, SweepRunsConcurrentlyIntoSubdirectories)
{
    const auto a = write("one.json", R"({"scenario": "scalar_lq", "sim": {"T": 0.2}})");
    const auto b = write("two.json", R"({"scenario": "twostate_lq", "sim": {"T": 0.2}})");
    const auto r = run({"simulate", "--config", a, "--config", b, "--out", (dir_ / "sw").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir_ / "sw" / "one" / "trace.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "sw" / "two" / "trace.csv"));

    const auto solo = run({"simulate", "--config", a, "--out", (dir_ / "solo").string()});
    ASSERT_EQ(solo.code, 0);
    EXPECT_EQ(slurp(dir_ / "sw" / "one" / "trace.csv"), slurp(dir_ / "solo" / "trace.csv"));
}

TEST_F(CliTest, ConfigErrorExitsOne)
{
    const auto cfg = write("bad.json", R"({"scenario": "scalar_lq", "adp": {"gains": {"eta_c1": -1}}})");
    const auto r = run({"simulate", "--config", cfg, "--out", (dir_ / "x").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("adp.gains.eta_c1"), std::string::npos) << r.err;
    EXPECT_EQ(run({"simulate"}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"check-gains", "--config", (dir_ / "missing.json").string()}).code, 1);
}

TEST_F(CliTest, DivergenceExitsTwo)
{
    const auto cfg = write("div.json", R"({"scenario": "scalar_lq",
        "plant": {"a": 30.0},
        "identifier": {"k_theta": 1e-9, "Gamma_theta": 1e-9},
        "adp": {"gains": {"eta_c1": 1e-9, "eta_c2": 1e-9, "eta_a1": 1e-9, "eta_a2": 1e-9},
                "weights0": 1e-9},
        "sim": {"T": 3.0}})");
    const auto r = run({"simulate", "--config", cfg, "--out", (dir_ / "d").string()});
    EXPECT_EQ(r.code, 2) << r.out << r.err;
    const auto metrics = nlohmann::json::parse(slurp(dir_ / "d" / "metrics.json"));
    EXPECT_TRUE(metrics["diverged"].get<bool>());
}

TEST_F(CliTest, CounterexampleFailsCriticConditionExitThree)
{
    const auto r = run({"check-gains", "--config", config_path("scalar_lq_counterexample.json")});
    EXPECT_EQ(r.code, 3) << r.err;
    EXPECT_NE(r.out.find("critic_gain"), std::string::npos);
    EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, OraclePrintsRiccatiSolution)
{
    const auto r = run({"oracle", "--config", config_path("scalar_lq.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("P"), std::string::npos);
    EXPECT_NE(r.out.find("K"), std::string::npos);
    EXPECT_NE(r.out.find("W"), std::string::npos);
    EXPECT_NE(r.out.find("0.41421356237"), std::string::npos) << r.out;
}

TEST_F(CliTest, OracleRejectsNonlinearScenario)
{
    EXPECT_EQ(run({"oracle", "--config", config_path("twostate_nl.json")}).code, 1);
}

TEST_F(CliTest, SelftestPasses)
{
    const auto r = run({"selftest"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
}

TEST_F(CliTest, HelpExitsZero)
{
    EXPECT_EQ(run({"--help"}).code, 0);
}
