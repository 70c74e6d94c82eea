#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "slicetrain/cli.hpp"

using namespace slicetrain;

namespace {

struct CliRun {
    CommandResult result;
    std::string out;
    std::string err;
};

CliRun run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliRun r{run_cli(args, out, err), "", ""};
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = std::filesystem::temp_directory_path() /
               ("slicetrain_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        std::filesystem::remove_all(dir_);
        std::filesystem::create_directories(dir_);
    }
    void TearDown() override { std::filesystem::remove_all(dir_); }

    std::filesystem::path dir_;
};

}  // namespace

TEST_F(CliTest, SliceHourglassWaist) {
    const CliRun r = run({"slice", "--shape", "hourglass", "--m1", "0", "--svg", (dir_ / "waist.svg").string()});
    ASSERT_EQ(r.result.exit_code, 0) << r.err;
    EXPECT_NE(r.out.find("loops 1"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("shape=circle"), std::string::npos) << r.out;
    EXPECT_TRUE(std::filesystem::exists(dir_ / "waist.svg"));
    EXPECT_EQ(r.result.artifacts, std::vector<std::string>{(dir_ / "waist.svg").string()});
}

TEST_F(CliTest, SweepTaperWritesProfile) {
    const auto csv = dir_ / "taper.csv";
    const CliRun r = run({"sweep", "--shape", "taper", "--axis", "y", "--samples", "512", "--csv", csv.string()});
    ASSERT_EQ(r.result.exit_code, 0) << r.err;
    const auto rows = lines(read_file(csv));
    ASSERT_EQ(rows.size(), 513u);
    EXPECT_EQ(rows[0], "offset,area,loop_count");
    double best = -1.0;
    std::size_t best_row = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double area = std::stod(rows[i].substr(rows[i].find(',') + 1));
        if (area > best) best = area, best_row = i;
    }
    EXPECT_EQ(best_row, 1u);
}

TEST_F(CliTest, ValidateSolutionsAndReplay) {
    const auto log = dir_ / "session.ndjson";
    const CliRun v = run({"validate-solutions", "--log", log.string()});
    ASSERT_EQ(v.result.exit_code, 0) << v.err;
    for (const char* id : {"L1T1", "L1T2", "L1T3", "L2T1", "L2T2", "L3T1"}) {
        EXPECT_NE(v.out.find(std::string(id) + " satisfied"), std::string::npos) << id;
    }
    EXPECT_NE(v.out.find("total 600"), std::string::npos);

    const auto csv = dir_ / "summary.csv";
    const CliRun r1 = run({"replay", "--log", log.string(), "--csv", csv.string()});
    ASSERT_EQ(r1.result.exit_code, 0) << r1.err;
    const auto rows = lines(read_file(csv));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].substr(0, 4), "600,");
    const CliRun r2 = run({"replay", "--log", log.string()});
    EXPECT_EQ(r1.result.summary, r2.result.summary);
}

TEST_F(CliTest, BundleAndItems) {
    const CliRun b = run({"bundle", "--out", (dir_ / "bundle").string()});
    ASSERT_EQ(b.result.exit_code, 0) << b.err;
    std::ifstream in(dir_ / "bundle" / "bundle.json");
    const auto bundle = nlohmann::json::parse(in);
    EXPECT_EQ(bundle.at("tasks").size(), 6u);
    for (const auto& task : bundle.at("tasks")) {
        EXPECT_TRUE(std::filesystem::exists(dir_ / "bundle" / task.at("mesh").get<std::string>()));
    }

    const CliRun g = run({"gen-items", "--out", (dir_ / "items").string(), "--seed", "4"});
    ASSERT_EQ(g.result.exit_code, 0) << g.err;
    EXPECT_TRUE(std::filesystem::exists(dir_ / "items" / "manifest.json"));
}

TEST_F(CliTest, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).result.exit_code, 2);
    EXPECT_EQ(run({"frobnicate"}).result.exit_code, 2);
    EXPECT_EQ(run({"replay"}).result.exit_code, 2);
    EXPECT_EQ(run({"slice", "--shape", "hourglass", "--m1", "abc"}).result.exit_code, 2);
    EXPECT_EQ(run({"shape", "--shape", "teapot"}).result.exit_code, 2);
}

TEST_F(CliTest, DomainErrorsExitOneWithName) {
    const CliRun few = run({"sweep", "--shape", "sphere", "--samples", "10"});
    EXPECT_EQ(few.result.exit_code, 1);
    EXPECT_NE(few.err.find("InvalidSpec"), std::string::npos) << few.err;

    const auto bad = dir_ / "bad.ndjson";
    std::ofstream(bad) << "not json\n";
    const CliRun r = run({"replay", "--log", bad.string()});
    EXPECT_EQ(r.result.exit_code, 1);
    EXPECT_NE(r.err.find("MalformedLog"), std::string::npos) << r.err;

    const CliRun missing = run({"replay", "--log", (dir_ / "absent.ndjson").string()});
    EXPECT_EQ(missing.result.exit_code, 1);
    EXPECT_TRUE(missing.err.find("IoError") != std::string::npos ||
                missing.err.find("MalformedLog") != std::string::npos)
        << missing.err;
}
