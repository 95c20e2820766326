#include "cli.hpp"

#include "steklov/errors.hpp"
#include "steklov/io.hpp"

#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace steklov;
using namespace steklov::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("steklov_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

nlohmann::json load_json(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(ParseConfig, FlagsOverrideDefaults) {
    const RunConfig c = parse_config({"--k", "2", "--n-angles", "200", "--diameter", "2", "--out-dir", "x"});
    EXPECT_EQ(c.ks, std::vector<std::size_t>{2});
    EXPECT_EQ(c.n_angles, 200u);
    EXPECT_DOUBLE_EQ(c.diameter, 2.0);
    EXPECT_EQ(c.mode, "optimize-convex");
    EXPECT_DOUBLE_EQ(c.mesh_h_factor, 0.05);
}

TEST(ParseConfig, EmptyInputGivesDefaults) {
    ::unsetenv("STEKLOV_OUT_DIR");
    const RunConfig c = parse_config({});
    EXPECT_EQ(c.mode, "optimize-convex");
    EXPECT_EQ(c.ks, std::vector<std::size_t>{1});
    EXPECT_EQ(c.n_angles, 200u);
    EXPECT_EQ(c.out_dir, "steklov_out");
}

TEST(ParseConfig, OddAngleCountRejected) {
    try {
        parse_config({"--n-angles", "201"});
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key, "n_angles");
    }
}

TEST(ParseConfig, BadValuesRejected) {
    EXPECT_THROW(parse_config({"--mode", "fly"}), ConfigError);
    EXPECT_THROW(parse_config({"--k", "0"}), ConfigError);
    EXPECT_THROW(parse_config({"--diameter", "-1"}), ConfigError);
    EXPECT_THROW(parse_config({"--initial", "circle"}), ConfigError);
    EXPECT_THROW(parse_config({"--jobs", "0"}), ConfigError);
    EXPECT_THROW(parse_config({"--bogus"}), ConfigError);
    EXPECT_THROW(parse_config({"--k", "two"}), ConfigError);
}

TEST(ParseConfig, ConfigFileThenFlags) {
    const fs::path dir = scratch("config");
    fs::create_directories(dir);
    const fs::path file = dir / "run.cfg";
    std::ofstream(file) << "# comment\nmode = optimize-nonconvex\nn_angles = 100\nk = 2,3\ndiameter = 3\n";
    const RunConfig c = parse_config({"--config", file.string(), "--diameter", "4"});
    EXPECT_EQ(c.mode, "optimize-nonconvex");
    EXPECT_EQ(c.n_angles, 100u);
    EXPECT_EQ(c.ks, (std::vector<std::size_t>{2, 3}));
    EXPECT_DOUBLE_EQ(c.diameter, 4.0);
    fs::remove_all(dir);
}

TEST(ParseConfig, UnknownConfigKeyRejected) {
    const fs::path dir = scratch("badkey");
    fs::create_directories(dir);
    const fs::path file = dir / "run.cfg";
    std::ofstream(file) << "n_angles = 100\nwobble = 3\n";
    EXPECT_THROW(parse_config({"--config", file.string()}), ConfigError);
    fs::remove_all(dir);
}

TEST(ParseConfig, OutDirFromEnvironment) {
    ::setenv("STEKLOV_OUT_DIR", "/tmp/from_env", 1);
    EXPECT_EQ(parse_config({}).out_dir, "/tmp/from_env");
    EXPECT_EQ(parse_config({"--out-dir", "flag"}).out_dir, "flag");
    ::unsetenv("STEKLOV_OUT_DIR");
}

TEST(ParseConfig, HelpIsNotAnError) { EXPECT_THROW(parse_config({"--help"}), HelpRequested); }

TEST(Run, BenchmarkDiskWritesAnalyticSpectrum) {
    const fs::path dir = scratch("disk");
    RunConfig c = parse_config({"--mode", "benchmark-disk", "--out-dir", dir.string()});
    std::ostringstream out, err;
    EXPECT_EQ(run(c, out, err), kExitOk) << err.str();
    for (const char* f : {"result.json", "shape.csv", "shape.svg", "spectrum.csv", "history.csv"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    std::ifstream in(dir / "spectrum.csv");
    std::string line;
    std::getline(in, line);
    const double expected[9] = {0, 1, 1, 2, 2, 3, 3, 4, 4};
    for (double e : expected) {
        ASSERT_TRUE(std::getline(in, line));
        const double v = std::stod(line.substr(line.find(',') + 1));
        EXPECT_NEAR(v, e, 5e-3 * std::max(e, 1.0));
    }
    const auto j = load_json(dir / "result.json");
    EXPECT_TRUE(j["benchmark"]["passed"].get<bool>());
    fs::remove_all(dir);
}

TEST(Run, OptimizeWritesSchemaAndSpectrumRoundTrips) {
    const fs::path dir = scratch("opt");
    RunConfig c = parse_config({"--k", "1", "--n-angles", "40", "--max-iters", "8", "--restarts", "0", "--out-dir",
                                (dir / "opt").string()});
    std::ostringstream out, err;
    ASSERT_EQ(run(c, out, err), kExitOk) << err.str();
    const auto j = load_json(dir / "opt" / "result.json");
    for (const char* key : {"config", "objective", "eigenvalues", "diameter", "diameter_pairs", "support", "history"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["support"].size(), 40u);
    EXPECT_GT(j["objective"].get<double>(), 2.0);

    RunConfig s = parse_config({"--mode", "spectrum", "--k", "1", "--n-angles", "40", "--initial",
                                "file:" + (dir / "opt" / "shape.csv").string(), "--out-dir", (dir / "spec").string()});
    ASSERT_EQ(run(s, out, err), kExitOk) << err.str();
    const auto js = load_json(dir / "spec" / "result.json");
    const auto& a = j["eigenvalues"];
    const auto& b = js["eigenvalues"];
    for (std::size_t i = 1; i < a.size(); ++i) {
        EXPECT_NEAR(b[i].get<double>(), a[i].get<double>(), 1e-6 * a[i].get<double>()) << i;
    }
    fs::remove_all(dir);
}

TEST(Run, NonConvexWritesGraphs) {
    const fs::path dir = scratch("nonconvex");
    RunConfig c = parse_config({"--mode", "optimize-nonconvex", "--initial", "disk", "--k", "1", "--n-angles", "40",
                                "--max-iters", "3", "--restarts", "0", "--out-dir", dir.string()});
    std::ostringstream out, err;
    const int code = run(c, out, err);
    EXPECT_TRUE(code == kExitOk || code == kExitCheckFailed) << err.str();
    const auto j = load_json(dir / "result.json");
    EXPECT_EQ(j["graphs"]["p"].size(), 20u);
    EXPECT_EQ(j["graphs"]["q"].size(), 20u);
    fs::remove_all(dir);
}

TEST(Run, SeveralKWithJobsArePerKAndDeterministic) {
    const fs::path dir = scratch("jobs");
    auto args = [&](const std::string& sub, const std::string& jobs) {
        return std::vector<std::string>{"--k", "1,2", "--n-angles", "40", "--max-iters", "5", "--restarts", "1",
                                        "--seed", "5", "--jobs", jobs, "--out-dir", (dir / sub).string()};
    };
    std::ostringstream out, err;
    ASSERT_EQ(run(parse_config(args("a", "2")), out, err), kExitOk) << err.str();
    ASSERT_EQ(run(parse_config(args("b", "1")), out, err), kExitOk) << err.str();
    for (const char* k : {"k1", "k2"}) {
        auto strip = [](nlohmann::json j) {
            j.erase("wall_time_s");
            return j.dump();
        };
        EXPECT_EQ(strip(load_json(dir / "a" / k / "result.json")), strip(load_json(dir / "b" / k / "result.json")));
        EXPECT_EQ(slurp(dir / "a" / k / "shape.csv"), slurp(dir / "b" / k / "shape.csv"));
    }
    fs::remove_all(dir);
}

TEST(Run, MissingInitialFileIsASolverSideFailure) {
    const fs::path dir = scratch("missing");
    RunConfig c = parse_config({"--mode", "spectrum", "--initial", "file:/nonexistent.csv", "--out-dir", dir.string()});
    std::ostringstream out, err;
    EXPECT_EQ(run(c, out, err), kExitSolverFailure);
    EXPECT_NE(err.str().find("io:"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Run, BoundExperimentReport) {
    const fs::path dir = scratch("bound");
    RunConfig c = parse_config({"--mode", "experiment:bound", "--k", "1", "--out-dir", dir.string()});
    std::ostringstream out, err;
    EXPECT_EQ(run(c, out, err), kExitOk) << err.str();
    const auto j = load_json(dir / "experiment.json");
    EXPECT_TRUE(j["passed"].get<bool>());
    EXPECT_NEAR(j["margin"].get<double>(), 1.0 / (2 * 3.141592653589793), 2e-3);
    fs::remove_all(dir);
}
