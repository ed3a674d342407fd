#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "incentix/cli.hpp"

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = incentix::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string fixture(const char* name) { return std::string(INCENTIX_FIXTURES) + "/" + name; }

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("incentix_test_" + name)).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST(Cli, FlagshipBicCheck) {
    const CliRun r = cli({"bic-check", "--prior", fixture("prior-d"), "--policy",
                       "repeated-hp:inner=always:2,n0=auto,eps=auto", "--T", "5", "--mode", "exact"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("round,rec,slack,ci_half_width,mode\n", 0), 0u);
    EXPECT_NE(r.out.find("1,2,NA,NA,exact"), std::string::npos);
    EXPECT_NE(r.err.find("pass true"), std::string::npos);
    // 5 rounds x 2 recommendations + header
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 11);
}

TEST(Cli, BicCheckFailureExitCode) {
    const CliRun r = cli({"bic-check", "--prior", fixture("prior-c"), "--policy",
                       "repeated-hp:inner=always:2,n0=1,eps=0.01", "--T", "4"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("pass false"), std::string::npos);
}

TEST(Cli, BicCheckMonteCarlo) {
    const CliRun r = cli({"bic-check", "--prior", fixture("prior-d"), "--policy",
                       "repeated-hp:inner=round-robin", "--T", "4", "--mode", "mc", "--replicates", "20000"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find(",mc\n"), std::string::npos);
}

TEST(Cli, PersuasionOpt) {
    const CliRun r = cli({"persuasion-opt", "--vlow", "0", "--vhigh", "1", "--p", "0.5", "--mu2", "0.4"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("0.833333"), std::string::npos);
    EXPECT_NE(r.out.find("full_revelation_value 0.5\n"), std::string::npos);
    const CliRun d = cli({"persuasion-opt", "--vlow", "0", "--vhigh", "1", "--p", "0.5", "--mu2", "0.4", "--delta", "0.01"});
    EXPECT_NE(d.out.find("near_optimal_value 0.819672"), std::string::npos);
    const CliRun bad = cli({"persuasion-opt", "--vlow", "0", "--vhigh", "1", "--p", "0.5", "--mu2", "0.4", "--delta", "0.4"});
    EXPECT_EQ(bad.code, 2);
}

TEST(Cli, PersuasionPolicyMatrices) {
    const std::string path = temp_path("bp.json");
    const CliRun r = cli({"persuasion-opt", "--vlow", "0", "--vhigh", "1", "--p", "0.5", "--mu2", "0.4", "--delta",
                       "0.01", "--format", "json", "--output", path});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(slurp(path));
    const auto& rows = doc["policies"]["near_optimal"]["rows"];
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& row : rows) EXPECT_NEAR(row[0].get<double>() + row[1].get<double>(), 1.0, 1e-12);
    std::filesystem::remove(path);
}

TEST(Cli, Explorability) {
    const CliRun c = cli({"explorability", "--prior", fixture("prior-c"), "--nmax", "50"});
    EXPECT_EQ(c.code, 0) << c.err;
    EXPECT_NE(c.out.find("not explorable"), std::string::npos);
    const CliRun a = cli({"explorability", "--prior", fixture("prior-a")});
    EXPECT_EQ(a.code, 0);
    EXPECT_NE(a.out.find("explorable at n=1"), std::string::npos);
    EXPECT_NE(a.out.find("threshold 0.0333333"), std::string::npos);
    EXPECT_NE(a.out.find("independent_criterion true"), std::string::npos);
}

TEST(Cli, GreedyFailure) {
    const CliRun r = cli({"greedy-failure", "--prior", fixture("prior-a"), "--T", "10", "--replicates", "5000"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("exact 0.5\n"), std::string::npos);
    EXPECT_NE(r.out.find("bound 0.1\n"), std::string::npos);
}

TEST(Cli, SimulateSeedDeterminesCsv) {
    const std::vector<std::string> base{"simulate", "--prior", fixture("prior-d"), "--policy",
                                        "repeated-hp:inner=adaptive-race", "--T", "50", "--replicates", "700"};
    auto with_seed = [&](const char* s) {
        auto args = base;
        args.insert(args.end(), {"--seed", s});
        return cli(args);
    };
    const CliRun a = with_seed("5");
    const CliRun b = with_seed("5");
    const CliRun c = with_seed("6");
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.err, b.err);
    EXPECT_NE(a.out, c.out);
    EXPECT_EQ(a.out.rfind("round,arm1_freq,arm2_freq,cum_regret_mean,cum_regret_ci\n", 0), 0u);
}

TEST(Cli, RationalAgents) {
    const CliRun r = cli({"simulate", "--prior", fixture("prior-c"), "--policy", "always:2", "--T", "3", "--agent",
                       "rational", "--replicates", "100"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("deviations 300"), std::string::npos);
    const CliRun big = cli({"simulate", "--prior", fixture("prior-c"), "--policy", "always:2", "--T", "20", "--agent",
                         "rational"});
    EXPECT_EQ(big.code, 2);
}

TEST(Cli, RegretCurveFixedInstance) {
    const CliRun r = cli({"regret-curve", "--alg", "ucb1", "--mu1", "0.5", "--mu2", "0.7", "--T", "100",
                       "--replicates", "50"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("algorithm ucb1"), std::string::npos);
    const CliRun missing = cli({"regret-curve", "--alg", "ucb1", "--T", "100"});
    EXPECT_EQ(missing.code, 2);
}

TEST(Cli, ReplayRoundTrip) {
    const std::vector<std::vector<std::string>> commands{
        {"simulate", "--prior", fixture("prior-a"), "--policy", "full-revelation", "--T", "20", "--replicates", "300"},
        {"bic-check", "--prior", fixture("prior-d"), "--policy", "repeated-hp:inner=round-robin", "--T", "3"},
        {"bic-check", "--prior", fixture("prior-d"), "--policy", "repeated-hp:inner=round-robin", "--T", "3",
         "--mode", "mc", "--replicates", "500"},
        {"persuasion-opt", "--vlow", "0.1", "--vhigh", "0.9", "--p", "0.3", "--mu2", "0.2", "--delta", "0.05"},
        {"explorability", "--prior", fixture("prior-d"), "--nmax", "8"},
        {"greedy-failure", "--prior", fixture("prior-d"), "--T", "30", "--replicates", "1000"},
        {"regret-curve", "--alg", "thompson", "--prior", fixture("prior-d"), "--T", "40", "--replicates", "64"},
    };
    int i = 0;
    for (auto args : commands) {
        const std::string path = temp_path("replay" + std::to_string(i++) + ".json");
        if (args[0] != "persuasion-opt" && args[0] != "explorability") args.insert(args.end(), {"--seed", "3"});
        args.insert(args.end(), {"--format", "json", "--output", path});
        const CliRun r = cli(args);
        ASSERT_EQ(r.code, 0) << args[0] << ": " << r.err;
        const CliRun again = cli({"replay", "--input", path});
        EXPECT_EQ(again.code, 0) << args[0];
        EXPECT_EQ(again.out, "replay identical\n");

        auto doc = nlohmann::json::parse(slurp(path));
        doc["summary"]["tampered"] = true;
        std::ofstream(path) << doc.dump();
        EXPECT_EQ(cli({"replay", "--input", path}).code, 1);
        std::filesystem::remove(path);
    }
}

TEST(Cli, CsvOutputFile) {
    const std::string path = temp_path("sim.csv");
    const CliRun r = cli({"simulate", "--prior", fixture("prior-d"), "--policy", "greedy", "--T", "10", "--replicates",
                       "100", "--output", path});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string text = slurp(path);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 11);
    EXPECT_NE(r.out.find("never_arm2_fraction"), std::string::npos);
    std::filesystem::remove(path);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(cli({}).code, 2);
    EXPECT_EQ(cli({"frobnicate"}).code, 2);
    EXPECT_EQ(cli({"simulate", "--policy", "greedy"}).code, 2);
    EXPECT_EQ(cli({"simulate", "--prior", fixture("prior-d"), "--policy", "nonsense"}).code, 2);
    EXPECT_EQ(cli({"simulate", "--prior", "/no/such/prior", "--policy", "greedy"}).code, 2);
    EXPECT_EQ(cli({"simulate", "--prior", fixture("prior-a"), "--policy", "thompson"}).code, 2);
    EXPECT_EQ(cli({"bic-check", "--prior", fixture("prior-d"), "--policy", "always:2", "--T", "9"}).code, 2);
    EXPECT_EQ(cli({"bic-check", "--prior", fixture("prior-d"), "--policy", "repeated-hp:inner=thompson", "--T", "3"})
                  .code,
              2);
    const CliRun c = cli({"bic-check", "--prior", fixture("prior-c"), "--policy", "repeated-hp:inner=always:2", "--T", "3"});
    EXPECT_EQ(c.code, 2);
    EXPECT_NE(c.err.find("not explorable"), std::string::npos);
    EXPECT_EQ(cli({"bic-check", "--prior", fixture("prior-d"), "--policy", "greedy", "--mode", "fast"}).code, 2);
    EXPECT_EQ(cli({"replay", "--input", "/no/such/file.json"}).code, 2);
}

TEST(Cli, Help) {
    const CliRun r = cli({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("bic-check"), std::string::npos);
}
