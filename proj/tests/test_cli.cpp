#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qtsc/cli.hpp"
#include "tmpdir.hpp"

namespace fs = std::filesystem;
using qtsc::KeyValues;

namespace {

struct CliRun {
    int code = 0;
    std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
    args.insert(args.begin(), "qtsc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = qtsc::cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

int shell(const std::string& args) {
    const int rc = std::system((std::string(QTSC_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string config(const std::string& name) { return std::string(QTSC_SOURCE_DIR) + "/configs/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Re-runs the command recorded in a run manifest with a different --out.
int rerun(const fs::path& manifest, const fs::path& out) {
    const std::string argv = KeyValues::load(manifest.string()).get<std::string>("argv");
    std::istringstream is(argv);
    std::string tok, cmd;
    is >> tok;  // program
    bool skip = false;
    while (is >> tok) {
        if (skip) {
            skip = false;
            continue;
        }
        if (tok == "--out") {
            skip = true;
            continue;
        }
        cmd += " " + tok;
    }
    return shell(cmd + " --out " + out.string());
}

/// Every file except the run manifest is byte-identical.
void expect_same_outputs(const fs::path& a, const fs::path& b) {
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file() || e.path().filename() == "run_manifest.txt") continue;
        const fs::path rel = fs::relative(e.path(), a);
        ASSERT_TRUE(fs::exists(b / rel)) << rel;
        EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
        ++files;
    }
    EXPECT_GT(files, 0u);
}

}  // namespace

TEST(Dispatch, NoArgumentsIsUsageError) {
    const CliRun r = cli({});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST(Dispatch, UnknownSubcommandIsUsageError) {
    const CliRun r = cli({"frobnicate"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("unknown subcommand"), std::string::npos);
}

TEST(Dispatch, BadFlagValuesAreUsageErrors) {
    qtsc::testing::TempDir tmp;
    EXPECT_EQ(cli({"gen", "--system", "pendulum", "--out", tmp.path().string()}).code, 1);
    EXPECT_EQ(cli({"gen", "--system", "sine", "--classes", "0", "--out", tmp.path().string()}).code, 1);
    EXPECT_EQ(cli({"train", "--data", tmp.path().string(), "--precision", "quaternary"}).code, 1);
    EXPECT_EQ(cli({"estimate"}).code, 1);
}

TEST(Dispatch, MissingDataIsDataError) {
    qtsc::testing::TempDir tmp;
    const CliRun r = cli({"embed", "--data", (tmp.path() / "nope").string(), "--out", (tmp.path() / "o").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("data error"), std::string::npos);
}

TEST(Estimate, DbaPaperMacs) {
    qtsc::testing::TempDir tmp;
    const CliRun r = cli({"estimate", "--config", config("db_a.txt"), "--out", tmp.path().string()});
    ASSERT_EQ(r.code, 0) << r.err;
    // (5 * 128 + 250) * 250
    EXPECT_NE(r.out.find("paper MACs per window   222500"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("Memory(Mb)"), std::string::npos);
    EXPECT_TRUE(fs::exists(tmp.path() / "run_manifest.txt"));
    EXPECT_TRUE(fs::exists(tmp.path() / "estimate.txt"));
}

TEST(Estimate, DefaultOutputRootFromEnvironment) {
    qtsc::testing::TempDir tmp;
    ::setenv("QTSC_OUTPUT_ROOT", tmp.path().c_str(), 1);
    const CliRun r = cli({"estimate", "--config", config("ecg200.txt")});
    ::unsetenv("QTSC_OUTPUT_ROOT");
    ASSERT_EQ(r.code, 0) << r.err;
    const fs::path manifest = tmp.path() / "estimate" / "run_manifest.txt";
    ASSERT_TRUE(fs::exists(manifest));
    const KeyValues kv = KeyValues::load(manifest.string());
    EXPECT_EQ(kv.get<std::string>("command"), "estimate");
    EXPECT_TRUE(kv.has("timestamp"));
    EXPECT_TRUE(kv.has("git_describe"));
    EXPECT_EQ(kv.get<std::string>("config"), config("ecg200.txt"));
}

TEST(Gen, SineDefaultsToAlphaThree) {
    qtsc::testing::TempDir tmp;
    const CliRun r = cli({"gen", "--system", "sine", "--classes", "5", "--per-class", "2", "--length", "50", "--out",
                       tmp.path().string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const KeyValues kv = KeyValues::load((tmp.path() / "manifest.txt").string());
    EXPECT_EQ(kv.get<double>("sine_alpha"), 3.0);
    EXPECT_EQ(kv.get<int>("classes"), 5);
    EXPECT_EQ(kv.get<int>("channels"), 1);
    const auto ld = qtsc::ingest::load_dataset_dir(tmp.path());
    EXPECT_EQ(ld.all.records.size(), 10u);
    EXPECT_EQ(ld.all.records.front().length(), 50u);
}

TEST(Train, ConfigMismatchIsDataError) {
    qtsc::testing::TempDir tmp;
    ASSERT_EQ(cli({"gen", "--system", "sine", "--classes", "3", "--per-class", "4", "--length", "200", "--out",
                   (tmp.path() / "d").string()})
                  .code,
              0);
    // config says 5 classes
    const CliRun r = cli({"train", "--data", (tmp.path() / "d").string(), "--config", config("sine_net.txt"), "--epochs",
                       "1", "--out", (tmp.path() / "t").string()});
    EXPECT_EQ(r.code, 2);
}

TEST(Quantize, RejectsFullPrecisionModel) {
    qtsc::testing::TempDir tmp;
    const fs::path d = tmp.path() / "d", t = tmp.path() / "t";
    ASSERT_EQ(cli({"gen", "--system", "sine", "--per-class", "4", "--length", "200", "--out", d.string()}).code, 0);
    ASSERT_EQ(cli({"train", "--data", d.string(), "--config", config("sine_net.txt"), "--epochs", "1", "--out", t.string()}).code, 0);
    EXPECT_EQ(cli({"quantize", "--model", (t / "model").string(), "--out", (tmp.path() / "q").string()}).code, 1);
}

TEST(EndToEnd, PipelineIsReproducibleFromManifests) {
    qtsc::testing::TempDir tmp;
    const fs::path root = tmp.path();
    const std::string d = (root / "gen").string();
    ASSERT_EQ(shell("gen --system sine --config " + config("sine_bank.txt") + " --per-class 6 --out " + d), 0);
    ASSERT_EQ(shell("embed --data " + d + " --iters 200 --metric euclidean --out " + (root / "embed").string()), 0);
    ASSERT_EQ(shell("train --data " + d + " --config " + config("sine_net.txt") +
                    " --precision ternary --epochs 2 --out " + (root / "train").string()),
              0);
    ASSERT_EQ(shell("quantize --model " + (root / "train" / "model").string() + " --out " + (root / "packed").string()), 0);
    ASSERT_EQ(shell("eval --model " + (root / "packed").string() + " --data " + d + " --report confusion --out " +
                    (root / "eval").string()),
              0);
    ASSERT_EQ(shell("simulate --model " + (root / "packed").string() + " --data " + d + " --machine " +
                    config("machine.txt") + " --trace --limit 3 --out " + (root / "sim").string()),
              0);
    ASSERT_EQ(shell("estimate --config " + config("ecg200.txt") + " --out " + (root / "est").string()), 0);

    EXPECT_EQ(slurp(root / "train" / "trace.csv").substr(0, 24), "epoch,loss,test_accuracy");
    EXPECT_NE(slurp(root / "sim" / "report.txt").find("golden_agreement    3/3"), std::string::npos);
    EXPECT_EQ(slurp(root / "sim" / "trace.csv").substr(0, 19), "cycle,state,unit,op");

    // Re-run each command from its manifest and compare every artifact.
    for (const char* step : {"gen", "embed", "train", "quantize", "eval", "simulate", "est"}) {
        const std::string s = step == std::string("simulate") ? "sim" : step == std::string("quantize") ? "packed" : step;
        SCOPED_TRACE(s);
        const fs::path again = root / (s + "_again");
        ASSERT_EQ(rerun(root / s / "run_manifest.txt", again), 0);
        expect_same_outputs(root / s, again);
    }
}
