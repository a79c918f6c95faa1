#include "vodsim/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace vodsim {
namespace {

namespace fs = std::filesystem;

const fs::path kScenarios = VODSIM_SCENARIO_DIR;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "vodsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string scenario(const char* name) { return (kScenarios / name).string(); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t data_rows(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::size_t rows = 0;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        ++rows;
    }
    return rows;
}

class CliFiles : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("vodsim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    fs::path dir;
};

TEST(Cli, ValidateGoodScenario) {
    const auto r = invoke({"validate", scenario("good.scn")});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "ok: 7 nodes, 8 edges, 6 peers\n");
}

TEST(Cli, ValidateDisconnectedScenario) {
    const auto r = invoke({"validate", scenario("disconnected.scn")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("DisconnectedGraph"), std::string::npos) << r.err;
}

TEST_F(CliFiles, SweepWritesSixRows) {
    const fs::path out = dir / "out.csv";
    const auto r = invoke({"sweep", scenario("base.scn"), "-o", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = slurp(out);
    EXPECT_EQ(csv.rfind("# seed=1\nmode,nodes,coverage,avg_repeated\n", 0), 0u) << csv;
    EXPECT_EQ(data_rows(csv), 6u);
}

TEST(Cli, SweepScalesAndModeOverride) {
    const auto r = invoke({"sweep", scenario("base.scn"), "--scales", "12,30", "--mode", "blind", "--seed", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(data_rows(r.out), 2u);
    EXPECT_NE(r.out.find("# seed=5\n"), std::string::npos);
    EXPECT_NE(r.out.find("blind,30,"), std::string::npos);
}

TEST(Cli, RunIsByteIdenticalAcrossInvocations) {
    const auto a = invoke({"run", scenario("good.scn")});
    const auto b = invoke({"run", scenario("good.scn")});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.rfind("# seed=7\n", 0), 0u);
    const auto c = invoke({"run", scenario("good.scn"), "--seed", "8"});
    EXPECT_NE(a.out, c.out);
}

TEST(Cli, RunFlagsReachTheReport) {
    const auto r = invoke({"run", scenario("good.scn"), "--no-clustering", "--no-probe", "--mode", "blind"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("\nblind,7,"), std::string::npos);
    EXPECT_EQ(r.out.find("probe,0,"), std::string::npos);
    EXPECT_EQ(r.out.find("cluster,"), r.out.find("cluster,ch_count"));
}

TEST_F(CliFiles, RunWritesTraceLog) {
    const fs::path log = dir / "trace.log";
    const auto r = invoke({"run", scenario("cpr_rescue.scn"), "--log", log.string(), "-o", (dir / "r.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(slurp(log).rfind("TX 0 -> 1 2 3\n", 0), 0u);
    EXPECT_NE(slurp(dir / "r.csv").find("summary,0.333333,1.000000"), std::string::npos);
}

TEST(Cli, FloodBench) {
    const auto r = invoke({"flood-bench", scenario("good.scn")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(data_rows(r.out), 2u);
    EXPECT_NE(r.out.find("blind,7,1.000000,"), std::string::npos);
    EXPECT_NE(r.out.find("rrdbfsf,7,1.000000,"), std::string::npos);
}

TEST_F(CliFiles, ValidateWritesNothing) {
    const auto before = std::distance(fs::directory_iterator(dir), fs::directory_iterator{});
    const auto r = invoke({"validate", scenario("good.scn"), "-o", (dir / "x.csv").string()});
    EXPECT_EQ(r.code, 1);  // validate takes no output option
    EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}), before);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(invoke({}).code, 1);
    EXPECT_EQ(invoke({"launch", scenario("good.scn")}).code, 1);
    EXPECT_EQ(invoke({"run", "/no/such/file.scn"}).code, 1);
    EXPECT_EQ(invoke({"run", scenario("good.scn"), "--mode", "gossip"}).code, 1);
    EXPECT_EQ(invoke({"run", scenario("good.scn"), "--seed", "-3"}).code, 1);
    EXPECT_EQ(invoke({"run", scenario("good.scn"), "--seed", "18446744073709551616"}).code, 1);
    EXPECT_EQ(invoke({"--help"}).code, 0);
}

}  // namespace
}  // namespace vodsim
