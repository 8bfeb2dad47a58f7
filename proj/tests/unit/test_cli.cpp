#include "ltmtex/dataset.hpp"

#include "cli_runner.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace ltmtex {
namespace {

namespace fs = std::filesystem;
using testing::run_cli;
using testing::slurp;

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("ltmtex_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    testing::CliResult cli(const std::string& args) { return run_cli(LTMTEX_CLI_PATH, args, dir_ / "io"); }

    std::string path(const std::string& rel) const { return (dir_ / rel).string(); }

    // bin -> count for nonzero bins of a histogram CSV.
    static std::map<int, long> nonzero_bins(const std::string& csv) {
        std::istringstream in(csv);
        std::string line;
        std::getline(in, line);
        EXPECT_EQ(line, "bin,count");
        std::map<int, long> bins;
        while (std::getline(in, line)) {
            const auto comma = line.find(',');
            const long count = std::stol(line.substr(comma + 1));
            if (count) bins[std::stoi(line.substr(0, comma))] = count;
        }
        return bins;
    }

    fs::path dir_;
};

TEST_F(Cli, DumpKernelsFive) {
    const auto r = cli("dump-kernels --size 5 --out " + path("k5"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    int masks = 0;
    for (const auto& e : fs::directory_iterator(dir_ / "k5")) {
        const auto name = e.path().filename().string();
        masks += name.size() == 7 && name[0] == 'M' && e.path().extension() == ".csv";
    }
    EXPECT_EQ(masks, 25);
    EXPECT_TRUE(fs::exists(dir_ / "k5" / "index.csv"));

    const std::string m00 = slurp(dir_ / "k5" / "M00.csv");
    std::size_t count = 0;
    for (auto pos = m00.find("0.200000"); pos != std::string::npos; pos = m00.find("0.200000", pos + 1)) ++count;
    EXPECT_EQ(count, 25u);
    EXPECT_EQ(slurp(dir_ / "k5" / "M22.csv").substr(0, 8), "0.285714");
}

TEST_F(Cli, DumpKernelsThree) {
    ASSERT_EQ(cli("dump-kernels --size 3 --out " + path("k3")).exit_code, 0);
    int masks = 0;
    for (const auto& e : fs::directory_iterator(dir_ / "k3")) masks += e.path().filename().string().starts_with("M");
    EXPECT_EQ(masks, 9);
}

TEST_F(Cli, DumpKernelsRejectsEvenSize) {
    const auto r = cli("dump-kernels --size 4 --out " + path("k4"));
    EXPECT_EQ(r.exit_code, 2);
    const auto err = nlohmann::json::parse(r.err);
    EXPECT_EQ(err["error"], "usage");
    EXPECT_FALSE(fs::exists(dir_ / "k4"));
}

TEST_F(Cli, ExtractConstantImage) {
    write_image(GrayImage(32, 32, 100), dir_ / "flat.pgm");
    auto r = cli("extract --image " + path("flat.pgm") + " --out " + path("ltm.csv") + " --render " + path("ltm.pgm"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(nonzero_bins(slurp(dir_ / "ltm.csv")), (std::map<int, long>{{0, 784}}));
    const GrayImage rendered = load_image(dir_ / "ltm.pgm");
    EXPECT_EQ(rendered.width, 28);

    r = cli("extract --descriptor olbp --image " + path("flat.pgm") + " --out " + path("olbp.csv"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(nonzero_bins(slurp(dir_ / "olbp.csv")), (std::map<int, long>{{255, 900}}));

    r = cli("extract --descriptor cslbp --cslbp-threshold 0 --image " + path("flat.pgm"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(nonzero_bins(r.out), (std::map<int, long>{{0, 900}}));
}

TEST_F(Cli, ExtractGratingConservesMass) {
    const auto split = generate_synthetic(4, 2, 32, 1);
    write_image(split.train.front().image, dir_ / "grating.pgm");
    const auto r = cli("extract --image " + path("grating.pgm"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    long total = 0;
    for (const auto& [bin, count] : nonzero_bins(r.out)) {
        EXPECT_LT(bin, 120);
        total += count;
    }
    EXPECT_EQ(total, 784);
}

TEST_F(Cli, ExtractErrors) {
    auto r = cli("extract --image " + path("missing.pgm"));
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_EQ(nlohmann::json::parse(r.err)["error"], "missing_file");

    write_image(GrayImage(4, 4, 1), dir_ / "small.pgm");
    r = cli("extract --image " + path("small.pgm"));
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_EQ(nlohmann::json::parse(r.err)["error"], "validation");

    write_image(GrayImage(16, 16, 1), dir_ / "ok.pgm");
    r = cli("extract --image " + path("ok.pgm") + " --orders M00,M01,M10,M11,M20,M02 --weights 1,1,1,1,1,1 --render " +
            path("r.pgm"));
    EXPECT_EQ(r.exit_code, 2);

    r = cli("extract --image " + path("ok.pgm") + " --weights 1,1");
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.err.find("weights"), std::string::npos);
}

TEST_F(Cli, RunIsByteIdenticalAcrossRerunsAndThreads) {
    const std::string base = "run --dataset synthetic:4:10:1:32 --eval cv:5 --sweep random:4:7";
    ASSERT_EQ(cli(base + " --out " + path("a")).exit_code, 0);
    ASSERT_EQ(cli(base + " --out " + path("b")).exit_code, 0);
    ASSERT_EQ(cli(base + " --threads 4 --out " + path("c")).exit_code, 0);
    const auto a = slurp(dir_ / "a" / "results.csv");
    EXPECT_EQ(a, slurp(dir_ / "b" / "results.csv"));
    EXPECT_EQ(a, slurp(dir_ / "c" / "results.csv"));
    EXPECT_EQ(slurp(dir_ / "a" / "results.md"), slurp(dir_ / "c" / "results.md"));
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 5);
}

TEST_F(Cli, RunFromSpecFile) {
    fs::create_directories(dir_ / "specs");
    std::ofstream(dir_ / "specs" / "exp5.json") << R"({
        "version": 1,
        "dataset": "synthetic:4:20:1",
        "descriptor": "ltm",
        "ltm": {"kernel_size": 5, "orders": ["M00", "M01", "M10", "M11", "M20"], "weights": [0.1, 5, 5, 5, 5]},
        "eval": "cv:10"
    })";
    const auto r = cli("run --spec " + path("specs/exp5.json") + " --out " + path("out"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NE(r.out.find("best: experiment 1, LTM M00 M01 M10 M11 M20, weights .1 5 5 5 5"), std::string::npos)
        << r.out;
    const auto spec = nlohmann::json::parse(slurp(dir_ / "out" / "spec.json"));
    EXPECT_EQ(spec["ltm"]["weights"][0], 0.1);

    const auto olbp = cli("run --spec " + path("specs/exp5.json") + " --descriptor olbp");
    ASSERT_EQ(olbp.exit_code, 0) << olbp.err;
    EXPECT_NE(olbp.out.find("| 1 | OLBP |"), std::string::npos) << olbp.out;
}

TEST_F(Cli, RunErrors) {
    auto r = cli("run --dataset synthetic:4:10:1 --eval cv:1");
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.err.find("eval"), std::string::npos);

    r = cli("run --dataset " + path("nowhere"));
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_EQ(nlohmann::json::parse(r.err)["error"], "dataset");

    r = cli("run --spec " + path("absent.json"));
    EXPECT_EQ(r.exit_code, 2);

    r = cli("frobnicate");
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_EQ(nlohmann::json::parse(r.err)["error"], "usage");
}

TEST_F(Cli, CompareIsDeterministic) {
    const std::string base = "compare --dataset synthetic:4:10:1:32 --eval cv:5";
    ASSERT_EQ(cli(base + " --out " + path("a")).exit_code, 0);
    ASSERT_EQ(cli(base + " --threads 3 --out " + path("b")).exit_code, 0);
    const auto a = slurp(dir_ / "a" / "compare.csv");
    EXPECT_EQ(a, slurp(dir_ / "b" / "compare.csv"));
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 6);
    for (const char* name : {"LTM,", "OLBP,", "CS-LBP,", "CS-LDP,", "XCS-LBP,"}) EXPECT_NE(a.find(name), std::string::npos);
}

TEST_F(Cli, GenerateTrainPredict) {
    ASSERT_EQ(cli("generate --classes 3 --per-class 6 --size 32 --seed 4 --out " + path("synth")).exit_code, 0);
    const auto split = load_split(dir_ / "synth");
    EXPECT_EQ(split.train.size(), 9u);
    EXPECT_EQ(split.test.size(), 9u);

    auto r = cli("train --dataset " + path("synth") + " --model " + path("model.txt"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const auto model_a = slurp(dir_ / "model.txt");
    ASSERT_EQ(cli("train --dataset " + path("synth") + " --model " + path("model2.txt")).exit_code, 0);
    EXPECT_EQ(model_a, slurp(dir_ / "model2.txt"));

    write_image(split.test.front().image, dir_ / "probe.pgm");
    r = cli("predict --model " + path("model.txt") + " --image " + path("probe.pgm"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
    const int label = std::stoi(r.out);
    EXPECT_GE(label, 0);
    EXPECT_LT(label, 3);
}

}  // namespace
}  // namespace ltmtex
