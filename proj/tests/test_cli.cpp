#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "cloudrca/io.hpp"
#include "support.hpp"

using namespace cloudrca;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// Runs the tool with `args`; stdout is captured, stderr discarded.
Run cli(const std::string& args) {
    const std::string cmd = std::string(CLOUDRCA_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// One full synth -> detect -> templates -> cluster -> featurize -> train chain on the smallest platform.
class Chain : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new test_support::TempDir;
        const auto& d = dir_->path();
        ASSERT_EQ(cli("synth --platform olap --out " + q(d / "corpus")).code, 0);
        const auto c = d / "corpus" / "olap";
        const std::string data = " --windows " + q(c / "windows.json");
        ASSERT_EQ(cli("detect --metrics " + q(c / "metrics.jsonl") + data + " --out " + q(d / "w")).code, 0);
        ASSERT_EQ(cli("templates --logs " + q(c / "logs.txt") + data + " --out " + q(d / "w")).code, 0);
        ASSERT_EQ(cli("cluster --logs " + q(c / "logs.txt") + data + " --tree " + q(d / "w" / "tree.json") + " --out " +
                      q(d / "w"))
                      .code,
                  0);
        ASSERT_EQ(cli("featurize --reports " + q(d / "w" / "reports.json") + " --logs " + q(c / "logs.txt") + data +
                      " --topology " + q(c / "topology.json") + " --tree " + q(d / "w" / "tree.json") + " --patterns " +
                      q(d / "w" / "patterns.json") + " --out " + q(d / "w"))
                      .code,
                  0);
        ASSERT_EQ(cli("train --train " + q(d / "w" / "train.json") + " --topology " + q(d / "w" / "topology.json") +
                      " --out " + q(d / "w"))
                      .code,
                  0);
    }
    static void TearDownTestSuite() {
        delete dir_;
        dir_ = nullptr;
    }
    static fs::path work() { return dir_->path() / "w"; }
    static fs::path corpus() { return dir_->path() / "corpus" / "olap"; }

    static test_support::TempDir* dir_;
};

test_support::TempDir* Chain::dir_ = nullptr;

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(cli("--help").code, 0);
    EXPECT_EQ(cli("").code, 2);
    EXPECT_EQ(cli("frobnicate").code, 2);
    EXPECT_EQ(cli("train").code, 2);  // --train is required
    EXPECT_EQ(cli("--config /nonexistent/config.json synth --out x").code, 2);
}

TEST(Cli, InvalidInputsExitWithTwo) {
    test_support::TempDir d;
    write_file(d / "bad.json", "{\"features\": {\"k\": 0}}");
    EXPECT_EQ(cli("--config " + q(d / "bad.json") + " synth --out " + q(d / "x")).code, 2);
    EXPECT_EQ(cli("synth --platform nowhere --out " + q(d / "x")).code, 2);
    EXPECT_EQ(cli("synth --platform olap").code, 2);  // no output directory
    EXPECT_EQ(cli("train --train " + q(d / "missing.json") + " --topology " + q(d / "missing.json") + " --out " +
                  q(d / "x"))
                  .code,
              2);
}

TEST(Cli, InternalErrorsExitWithOne) {
    test_support::TempDir d;
    write_file(d / "blocker", "");
    EXPECT_EQ(cli("synth --platform olap --out " + q(d / "blocker" / "sub")).code, 1);
}

TEST(Cli, SynthIsByteIdenticalAcrossRuns) {
    test_support::TempDir d;
    ASSERT_EQ(cli("--seed 4 synth --platform olap --out " + q(d / "a")).code, 0);
    ASSERT_EQ(cli("--seed 4 synth --platform olap --out " + q(d / "b")).code, 0);
    for (const char* f : {"metrics.jsonl", "logs.txt", "topology.json", "windows.json"}) {
        EXPECT_EQ(read_file(d / "a" / "olap" / f), read_file(d / "b" / "olap" / f)) << f;
    }
    ASSERT_EQ(cli("--seed 5 synth --platform olap --out " + q(d / "c")).code, 0);
    EXPECT_NE(read_file(d / "a" / "olap" / "metrics.jsonl"), read_file(d / "c" / "olap" / "metrics.jsonl"));
}

TEST_F(Chain, EvalWritesReport) {
    const auto r = cli("eval --model " + q(work() / "model.json") + " --test " + q(work() / "test.json") +
                       " --topology " + q(work() / "topology.json") + " --out " + q(work() / "eval"));
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("f1"), std::string::npos);
    EXPECT_NE(read_file(work() / "eval" / "eval.json").find("\"f1\""), std::string::npos);
}

TEST_F(Chain, InferPrintsDiagnosis) {
    const auto r = cli("infer --model " + q(work() / "model.json") + " --dataset " + q(work() / "test.json") +
                       " --sample 0");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("best_module"), std::string::npos);
    EXPECT_EQ(cli("infer --model " + q(work() / "model.json") + " --dataset " + q(work() / "test.json") +
                  " --sample 0")
                  .out,
              r.out);
    EXPECT_EQ(cli("infer --model " + q(work() / "model.json") + " --dataset " + q(work() / "test.json") +
                  " --sample 999999")
                  .code,
              2);
}

TEST_F(Chain, InferRejectsForeignFeatureSet) {
    // Features built without patterns (one per template) do not match the model.
    const auto c = corpus();
    ASSERT_EQ(cli("featurize --reports " + q(work() / "reports.json") + " --logs " + q(c / "logs.txt") +
                  " --windows " + q(c / "windows.json") + " --topology " + q(c / "topology.json") + " --tree " +
                  q(work() / "tree.json") + " --out " + q(work() / "raw"))
                  .code,
              0);
    ASSERT_NE(read_file(work() / "raw" / "test.json"), read_file(work() / "test.json"));
    EXPECT_EQ(cli("infer --model " + q(work() / "model.json") + " --dataset " + q(work() / "raw" / "test.json") +
                  " --sample 0")
                  .code,
              2);
}

TEST_F(Chain, TrainIsByteIdenticalAcrossRuns) {
    ASSERT_EQ(cli("train --train " + q(work() / "train.json") + " --topology " + q(work() / "topology.json") +
                  " --out " + q(work() / "again"))
                  .code,
              0);
    EXPECT_EQ(read_file(work() / "again" / "model.json"), read_file(work() / "model.json"));
}
