#include "magnon/cli.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace magnon;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string value_of(const std::string& summary, const std::string& key) {
    std::istringstream in(summary);
    std::string line;
    while (std::getline(in, line)) {
        if (line.starts_with(key + " = ")) return line.substr(key.size() + 3);
    }
    return {};
}

std::filesystem::path temp_file(const std::string& name, const std::string& content = {}) {
    const auto p = std::filesystem::temp_directory_path() / ("magnon_test_" + name);
    if (!content.empty()) std::ofstream(p) << content;
    return p;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, RunLindbladTwoMagnon) {
    const auto r = cli({"run", "--n", "2", "--engine", "lindblad"});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    EXPECT_EQ(value_of(r.out, "protocol"), "two-magnon-bell");
    EXPECT_NEAR(std::stod(value_of(r.out, "fidelity")), 0.929, 0.02);
    EXPECT_NE(r.out.find("population[m1=1,m2=0,a1=0,a2=0,q=g] = "), std::string::npos);
}

TEST(Cli, RunIdealThree) {
    const auto r = cli({"run", "--n", "3", "--engine", "ideal-effective"});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    EXPECT_EQ(value_of(r.out, "engine"), "ideal-effective");
    EXPECT_EQ(value_of(r.out, "segments"), "3");
    EXPECT_GT(std::stod(value_of(r.out, "phase_insensitive_fidelity")), 0.9);
}

TEST(Cli, TraceFiveMagnons) {
    const auto r = cli({"trace", "--n", "5", "--samples", "1001"});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t_ns,P1,P2,P3,P4,P5");
    double min_p1 = 1.0;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        const auto a = line.find(',');
        const auto b = line.find(',', a + 1);
        min_p1 = std::min(min_p1, std::stod(line.substr(a + 1, b - a - 1)));
    }
    EXPECT_EQ(rows, 1001u);
    EXPECT_NEAR(min_p1, 9.0 / 25.0, 1e-10);
}

TEST(Cli, Schedule) {
    const auto r = cli({"schedule", "--n", "3"});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    EXPECT_TRUE(r.out.starts_with("protocol=n-magnon n=3\n"));
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
}

TEST(Cli, Validate) {
    const auto r = cli({"validate"});
    EXPECT_EQ(r.code, exit_ok) << r.out << r.err;
    EXPECT_NE(r.out.find("validate: all checks passed"), std::string::npos);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, Sweep) {
    const auto r = cli({"sweep", "--param", "gamma_q", "--from", "0", "--to", "2", "--points", "3", "--engine",
                        "full-unitary"});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    EXPECT_TRUE(r.out.starts_with("gamma_q_per_ns,fidelity\n0,"));
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
    EXPECT_NE(r.err.find("# durations = recomputed"), std::string::npos);
}

TEST(Cli, ConfigFileAndOutput) {
    const auto cfg = temp_file("cfg.txt", "n = 4\nengine = ideal-effective\n");
    const auto out = temp_file("schedule_out.txt");
    std::filesystem::remove(out);
    const auto r = cli({"schedule", "--config", cfg.string(), "--out", out.string()});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_TRUE(slurp(out).starts_with("protocol=n-magnon n=4\n"));
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(cli({}).code, exit_usage);
    EXPECT_EQ(cli({"frobnicate"}).code, exit_usage);
    EXPECT_EQ(cli({"sweep"}).code, exit_usage);
    EXPECT_EQ(cli({"run", "--engine", "exact"}).code, exit_usage);
    EXPECT_EQ(cli({"run", "--config", "/nonexistent/magnon.cfg"}).code, exit_usage);
    EXPECT_EQ(cli({"sweep", "--param", "omega_q"}).code, exit_usage);
    const auto bad = temp_file("bad.txt", "n = 2\ngamma_q_mhz = -1\n");
    const auto r = cli({"run", "--config", bad.string()});
    EXPECT_EQ(r.code, exit_usage);
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
    const auto guard = temp_file("guard.txt", "engine = ideal-effective\nomega_q_ghz = 7.0\nomega_a_ghz = 6.98\n");
    EXPECT_EQ(cli({"run", "--config", guard.string()}).code, exit_usage);
    EXPECT_EQ(cli({"run", "--n", "5", "--engine", "ideal-effective"}).code, exit_usage);
}

TEST(Cli, Deterministic) {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"run", "--n", "2", "--engine", "full-unitary"}, {"trace", "--n", "3"}, {"schedule", "--n", "4"}}) {
        const auto a = cli(args);
        const auto b = cli(args);
        EXPECT_EQ(a.code, exit_ok);
        EXPECT_EQ(a.out, b.out);
    }
}

TEST(Cli, ExecutableMatchesInProcess) {
    const auto out = temp_file("trace_exe.csv");
    const std::string cmd = std::string(MAGNON_CLI_PATH) + " trace --n 4 --samples 17 --out " + out.string();
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_EQ(slurp(out), cli({"trace", "--n", "4", "--samples", "17"}).out);
}
