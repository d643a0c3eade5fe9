#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "grand/cli.hpp"
#include "json.hpp"

namespace grand::cli {
namespace {

namespace fs = std::filesystem;

struct Run {
    int status;
    std::string out;
    std::string err;
};

Run run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "grand_sim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int status = main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {status, out.str(), err.str()};
}

RunConfig parse(std::vector<std::string> args) {
    args.insert(args.begin(), "grand_sim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return parse_and_validate(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("grand_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

TEST(Cli, EmptyArgvPrintsUsage) {
    const auto r = run_cli({});
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("--code"), std::string::npos);
}

TEST(Cli, ParsesThresholdSweepConfiguration) {
    const auto cfg = parse({"--code", "rlc:128:116", "--tau", "none,0,1,2", "--ebn0", "0:0.5:8"});
    EXPECT_EQ(cfg.code.kind, CodeKind::Rlc);
    EXPECT_EQ(cfg.code.n, 128u);
    EXPECT_EQ(cfg.code.k, 116u);
    ASSERT_EQ(cfg.taus.size(), 4u);
    EXPECT_FALSE(cfg.taus[0]);
    EXPECT_EQ(*cfg.taus[3], 2.0);
    ASSERT_EQ(cfg.ebn0_points.size(), 17u);
    EXPECT_EQ(cfg.ebn0_points.front(), 0.0);
    EXPECT_EQ(cfg.ebn0_points.back(), 8.0);
    const auto code = build_code(cfg);
    EXPECT_EQ(build_policies(cfg, code).size(), 4u);
}

TEST(Cli, CrcWithSeedIsRejected) {
    EXPECT_THROW(parse({"--code", "crc:64:52", "--seed", "3", "--mode", "markers"}), ConfigError);
    const auto r = run_cli({"--code", "crc:64:52", "--seed", "3", "--mode", "markers"});
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("polynomial"), std::string::npos);
}

TEST(Cli, ValidationErrors) {
    EXPECT_THROW(parse({"--code", "rlc:8:9", "--mode", "markers"}), ConfigError);
    EXPECT_THROW(parse({"--code", "crc:64:52:0x5", "--mode", "markers"}), ConfigError);
    EXPECT_THROW(parse({"--code", "ldpc:64:52", "--mode", "markers"}), ConfigError);
    EXPECT_THROW(parse({"--code", "rlc:64:52"}), ConfigError);  // sweep without --ebn0
    EXPECT_THROW(parse({"--code", "rlc:64:52", "--ebn0", "1:-1:3"}), ConfigError);
    EXPECT_THROW(parse({"--code", "rlc:64:52", "--ebn0", "1", "--tau", "x"}), ConfigError);
    EXPECT_THROW(parse({"--code", "rlc:64:52", "--ebn0", "1", "--decoder", "sgrand"}), ConfigError);
    EXPECT_THROW(parse({"--code", "rlc:64:52", "--ebn0", "1", "--trials", "0"}), ConfigError);
    EXPECT_THROW(parse({"--code", "rlc:64:52", "--ebn0", "0:1:3", "--mode", "fig1"}), ConfigError);
    EXPECT_THROW(parse({"--code", "rlc:16:8", "--ebn0", "1", "--mode", "oracle"}), ConfigError);
}

TEST(Cli, SeedSemantics) {
    const auto a = parse({"--code", "rlc:64:52", "--seed", "9", "--mode", "markers"});
    EXPECT_EQ(a.code_seed(), 9u);
    const auto b = parse({"--code", "rlc:64:52:4", "--seed", "9", "--mode", "markers"});
    EXPECT_EQ(b.code_seed(), 4u);
    EXPECT_EQ(b.seed, 9u);
}

TEST(Cli, ConfigFileWithFlagOverride) {
    const auto dir = scratch("config");
    {
        std::ofstream f(dir / "run.ini");
        f << "code = rlc:64:52\n" << "tau = none,1\n" << "ebn0 = 2\n" << "trials = 40\n";
    }
    const auto cfg = parse({"--config", (dir / "run.ini").string(), "--trials", "7"});
    EXPECT_EQ(cfg.trials, 7u);
    EXPECT_EQ(cfg.taus.size(), 2u);
    EXPECT_EQ(cfg.config_file, (dir / "run.ini").string());

    {
        std::ofstream f(dir / "bad.ini");
        f << "code = rlc:64:52\n" << "ebn0 = 2\n" << "colour = blue\n";
    }
    EXPECT_THROW(parse({"--config", (dir / "bad.ini").string()}), ConfigError);
}

TEST(Cli, MarkersMode) {
    const auto r = run_cli({"--code", "rlc:128:116", "--mode", "markers"});
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("shannon_ebn0_db=4.48888883"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("mincap_ebn0_db=1.11527825"), std::string::npos) << r.out;
}

TEST(Cli, DumpCodeMatchesLibrary) {
    const auto r = run_cli({"--code", "crc:7:4:0x5", "--mode", "dump-code"});
    EXPECT_EQ(r.status, 0);
    std::istringstream is(r.out);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#') rows.push_back(line);
    const auto h = make_crc(7, 4, 0x5).parity_check();
    ASSERT_EQ(rows.size(), h.size());
    for (std::size_t i = 0; i < h.size(); ++i) EXPECT_EQ(rows[i], h[i].to_hex());
}

TEST(Cli, OracleModePasses) {
    const auto dir = scratch("oracle");
    const auto r = run_cli({"--code", "rlc:8:4", "--ebn0", "2", "--mode", "oracle", "--out", dir.string()});
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("PASS"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "oracle.csv"));

    const auto c = run_cli({"--code", "rlc:8:4", "--ebn0", "2", "--mode", "oracle", "--incorrect-model", "codebook",
                            "--out", dir.string()});
    EXPECT_EQ(c.status, 0) << c.err;
    EXPECT_NE(r.out, c.out);  // different incorrect-model deviation
}

TEST(Cli, SweepWritesReproducibleOutputs) {
    const auto dir = scratch("sweep");
    const std::vector<std::string> args{"--code", "rlc:64:52:3", "--tau", "none,0,2", "--ebn0", "2:1:3",
                                        "--trials", "100", "--seed", "5", "--trial-csv", "--out", dir.string()};
    ASSERT_EQ(run_cli(args).status, 0);
    std::ifstream csv(dir / "sweep.csv");
    std::stringstream first;
    first << csv.rdbuf();
    EXPECT_NE(first.str().find(sweep_csv_header()), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "trials.csv"));

    std::ifstream js(dir / "sweep.json");
    const auto j = nlohmann::json::parse(js);
    EXPECT_EQ(j["config"]["seed"], 5);
    EXPECT_EQ(j["config"]["code_seed"], 3);
    EXPECT_EQ(j["policies"].size(), 3u);
    EXPECT_EQ(j["monotonicity_violations"], 0);

    ASSERT_EQ(run_cli(args).status, 0);
    std::ifstream again(dir / "sweep.csv");
    std::stringstream second;
    second << again.rdbuf();
    EXPECT_EQ(first.str(), second.str());
}

TEST(Cli, GuardFailureExitCode) {
    const auto dir = scratch("guard");
    const auto r = run_cli({"--code", "rlc:8:4", "--ebn0", "14", "--mode", "fig1", "--out", dir.string()});
    EXPECT_EQ(r.status, 3);
}

TEST(Cli, UnwritableOutputIsIoFailure) {
    const auto dir = scratch("io");
    { std::ofstream f(dir / "file"); }
    const auto r = run_cli({"--code", "rlc:8:4", "--ebn0", "2", "--trials", "5", "--out", (dir / "file").string()});
    EXPECT_EQ(r.status, 1);
}

TEST(Cli, ExecutableRuns) {
    const std::string cmd = std::string(GRAND_SIM_EXE) + " --code rlc:128:116 --mode markers > /dev/null";
    EXPECT_EQ(std::system(cmd.c_str()), 0);
    const std::string bad = std::string(GRAND_SIM_EXE) + " > /dev/null 2>&1";
    EXPECT_NE(std::system(bad.c_str()), 0);
}

}  // namespace
}  // namespace grand::cli
