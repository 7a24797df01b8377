#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
};

CliRun run(const std::string& args) {
    const std::string cmd = std::string(MGPERT_CLI_PATH) + " " + args + " 2>/dev/null";
    CliRun r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

double json_field(const std::string& json, const std::string& key) {
    const auto at = json.find("\"" + key + "\": ");
    if (at == std::string::npos) return NAN;
    return std::stod(json.substr(at + key.size() + 4));
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("mgpert_cli_" + name);
    fs::remove_all(d);
    return d;
}

}  // namespace

TEST(Cli, PayoffAtExpiry) {
    const CliRun r = run("price --days 0 --spot 110 --strike 100 --kind call");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json_field(r.out, "total"), 10.0);
    EXPECT_NE(r.out.find("\"implied_vol\": null"), std::string::npos);
}

TEST(Cli, ValidationExitCodes) {
    EXPECT_EQ(run("price --rho 1.5").code, 2);
    EXPECT_EQ(run("mc-price --paths 3 --antithetic true").code, 2);
    EXPECT_EQ(run("price --no-such-flag 1").code, 2);
    EXPECT_EQ(run("experiment timeseries --dataset 7 --out " + scratch("ds7").string()).code, 2);
    EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, DegenerateExitCode) {
    // R2 = 0 at kappa = sigma xi0 / sqrt(2) - xi0^2 with sigma = 1, xi0 = 0.5.
    EXPECT_EQ(run("price --sigma 1 --xi 0.5 --kappa 0.10355339059327379").code, 3);
}

TEST(Cli, OracleCoarseGridDoesNotConverge) {
    EXPECT_EQ(run("oracle-check --nodes 8 --strikes 100 --draws 0").code, 4);
}

TEST(Cli, OracleV0DoesNotChangeClosedForm) {
    const auto column = [](const std::string& csv) {
        std::istringstream in(csv);
        std::string line, col;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
            std::istringstream f(line);
            std::string field;
            for (int i = 0; i < 6 && std::getline(f, field, ','); ++i) {
            }
            col += field + "\n";
        }
        return col;
    };
    const CliRun a = run("oracle-check --v0 1 --nodes 64 --time-slices 32 --draws 100");
    const CliRun b = run("oracle-check --v0 10 --nodes 64 --time-slices 32 --draws 100");
    ASSERT_EQ(a.code, 0) << a.out;
    ASSERT_EQ(b.code, 0) << b.out;
    EXPECT_FALSE(column(a.out).empty());
    EXPECT_EQ(column(a.out), column(b.out));
}

TEST(Cli, McPriceDeterministicAndBlackScholesLimit) {
    const std::string args = "mc-price --xi 0 --theta 0.04 --variance 0.04 --paths 100000 --steps-per-day 2 --seed 9";
    const CliRun a = run(args + " --threads 1");
    const CliRun b = run(args + " --threads 3");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    const CliRun bs = run("price --sigma 0.2 --variance 0.04");
    // The c0 field is Black-Scholes at sigma = 0.2.
    const double est = json_field(a.out, "estimate"), se = json_field(a.out, "std_error");
    EXPECT_LE(std::fabs(est - json_field(bs.out, "c0")), 3.0 * se);
}

TEST(Cli, ConfigPrecedence) {
    const fs::path dir = scratch("cfg");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "run.cfg");
        f << "# scenario\nspot = 120\nstrike=100\n\ndays=0\n";
    }
    const CliRun from_file = run("price --config " + (dir / "run.cfg").string());
    ASSERT_EQ(from_file.code, 0);
    EXPECT_EQ(json_field(from_file.out, "total"), 20.0);
    const CliRun flag_wins = run("price --config " + (dir / "run.cfg").string() + " --spot 130");
    EXPECT_EQ(json_field(flag_wins.out, "total"), 30.0);
    {
        std::ofstream f(dir / "bad.cfg");
        f << "bogus=1\n";
    }
    EXPECT_EQ(run("price --config " + (dir / "bad.cfg").string()).code, 2);
    EXPECT_EQ(run("price --config " + (dir / "missing.cfg").string()).code, 2);
}

TEST(Cli, OutputDirectoryContract) {
    const fs::path dir = scratch("out") / "nested";
    const std::string small = " --sample-paths 1 --obs 1 --sims 200 --steps-per-day 1 --strata 10";
    const CliRun r = run("experiment timeseries --dataset 1" + small + " --out " + dir.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(fs::exists(dir / "param_summary.csv"));
    EXPECT_TRUE(fs::exists(dir / "fit_summary.csv"));
    EXPECT_TRUE(fs::exists(dir / "panel_ds1.csv"));
    EXPECT_EQ(slurp(dir / "fit_summary.csv").rfind("# config_hash=", 0), 0u);

    // A regular file in the way of the directory.
    const fs::path blocker = scratch("blocker");
    { std::ofstream f(blocker); }
    EXPECT_EQ(run("experiment timeseries --dataset 1" + small + " --out " + (blocker / "sub").string()).code, 2);
}
