#ifdef SNAR_HAVE_CLI

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"
#include "snar/io.hpp"
#include "snar_cli/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    args.insert(args.begin(), "snar");
    std::ostringstream out;
    std::ostringstream err;
    const int code = snar::cli::cli_dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, SimulateThenFit) {
    const fs::path dir = fs::temp_directory_path() / "snar_cli_test";
    fs::remove_all(dir);
    const std::string csv = (dir / "path.csv").string();
    const CliRun sim = run({"simulate", "--phi", "1.05", "--p", "0.977", "--sigma2", "36", "--n", "373", "--seed", "7",
                         "--out", csv});
    ASSERT_EQ(sim.code, 0) << sim.err;
    const snar::ObservedSeries s = snar::load_series(csv, "y");
    EXPECT_EQ(s.size(), 374u);

    const CliRun again = run({"--seed", "7", "simulate", "--phi", "1.05", "--p", "0.977", "--sigma2", "36", "--n", "373"});
    std::ifstream f(csv);
    std::stringstream text;
    text << f.rdbuf();
    EXPECT_EQ(again.out, text.str());

    const CliRun fit = run({"fit", "--input", csv, "--column", "y"});
    ASSERT_EQ(fit.code, 0) << fit.err;
    const auto j = nlohmann::json::parse(fit.out);
    EXPECT_NEAR(j["theta_hat"]["phi"].get<double>(), 1.05, 0.05);
    fs::remove_all(dir);
}

TEST(Cli, UsageErrors) {
    const CliRun unknown = run({"fit", "--bogus"});
    EXPECT_EQ(unknown.code, 1);
    EXPECT_NE(unknown.err.find("Usage:"), std::string::npos);
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"simulate", "--n", "abc"}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, RuntimeErrors) {
    EXPECT_EQ(run({"fit", "--input", "/nonexistent.csv"}).code, 2);
    EXPECT_EQ(run({"simulate", "--n", "10", "--p", "1.5"}).code, 2);
    const CliRun an = run({"analyze", "--input", "/nonexistent.csv", "--out", "/tmp/snar_cli_never"});
    EXPECT_EQ(an.code, 2);
    EXPECT_NE(an.err.find("load"), std::string::npos);
}

TEST(Cli, StudyCommandWritesTableAndManifest) {
    const fs::path dir = fs::temp_directory_path() / "snar_cli_study";
    fs::remove_all(dir);
    const CliRun r = run({"mc-size", "--reps", "20", "--n", "200", "--workers", "2", "--seed", "3", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "size.csv"));
    std::ifstream m(dir / "manifest.json");
    const auto j = nlohmann::json::parse(m);
    EXPECT_EQ(j["master_seed"], 3);
    fs::remove_all(dir);
}

#endif
