#include "politelens/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

#include "support/synthetic.hpp"
#include "support/test_util.hpp"

using namespace politelens;
using politelens::cli::dispatch;

namespace {

std::string write_marker_corpus(const testutil::TempDir& tmp, std::size_t count,
                                std::uint64_t seed) {
    auto path = tmp.file("corpus.jsonl");
    corpus::save_examples(path, testutil::marker_corpus(count, seed));
    return path;
}

std::string small_train_config(const testutil::TempDir& tmp) {
    auto path = tmp.file("small.conf");
    testutil::write_file(path,
                         "# compact settings for tests\n"
                         "embedding_dim = 24\n"
                         "feature_maps = 4\n"
                         "windows = 3,4,5\n"
                         "max_epochs = 6\n"
                         "patience = 6\n"
                         "seed = 11\n");
    return path;
}

}  // namespace

TEST(Dispatch, UsageErrorsExitOne) {
    EXPECT_EQ(dispatch({"no-such-command"}), 1);
    EXPECT_EQ(dispatch({"train", "--no-such-flag", "x"}), 1);
    EXPECT_EQ(dispatch({}), 1);
    EXPECT_EQ(dispatch({"prepare"}), 1);  // missing required --input
    EXPECT_EQ(dispatch({"baseline", "--kind", "zzz", "--data", "nowhere"}), 1);
}

TEST(Dispatch, DataErrorsExitTwo) {
    EXPECT_EQ(dispatch({"eval", "--model", "/nonexistent.ckpt", "--data", "/nonexistent.jsonl"}),
              2);
    testutil::TempDir tmp;
    auto bad = tmp.file("bad.jsonl");
    testutil::write_file(bad, "not json\n");
    EXPECT_EQ(dispatch({"prepare", "--input", bad, "--outdir", tmp.file("out")}), 2);
}

TEST(Prepare, SplitsFilesAndManifest) {
    testutil::TempDir tmp;
    auto corpus_path = write_marker_corpus(tmp, 100, 3);
    auto outdir = tmp.file("data");
    ASSERT_EQ(dispatch({"prepare", "--input", corpus_path, "--outdir", outdir, "--seed", "5"}), 0);

    auto train = corpus::load_examples(outdir + "/train.jsonl");
    auto dev = corpus::load_examples(outdir + "/dev.jsonl");
    auto test = corpus::load_examples(outdir + "/test.jsonl");
    EXPECT_EQ(train.size(), 70u);
    EXPECT_EQ(dev.size(), 10u);
    EXPECT_EQ(test.size(), 20u);
    auto vocab = corpus::Vocabulary::load_tsv(outdir + "/vocab.tsv");
    EXPECT_GT(vocab.size(), 10u);

    auto manifest = testutil::read_file(outdir + "/prepare.manifest.json");
    auto j = nlohmann::json::parse(manifest);
    EXPECT_EQ(j["command"], "prepare");
    EXPECT_EQ(j["seed"], 5);
    EXPECT_EQ(j["outputs"].size(), 4u);
}

TEST(Prepare, IdempotentOutputsAcrossRuns) {
    testutil::TempDir tmp;
    auto corpus_path = write_marker_corpus(tmp, 60, 9);
    ASSERT_EQ(dispatch({"prepare", "--input", corpus_path, "--outdir", tmp.file("a"), "--seed",
                        "13"}),
              0);
    ASSERT_EQ(dispatch({"prepare", "--input", corpus_path, "--outdir", tmp.file("b"), "--seed",
                        "13"}),
              0);
    for (const char* name : {"train.jsonl", "dev.jsonl", "test.jsonl", "vocab.tsv"})
        EXPECT_EQ(testutil::read_file(tmp.file(std::string("a/") + name)),
                  testutil::read_file(tmp.file(std::string("b/") + name)))
            << name;
}

TEST(Prepare, EnvSeedOverridesDefaultButNotFlag) {
    testutil::TempDir tmp;
    auto corpus_path = write_marker_corpus(tmp, 60, 21);
    setenv("POLITELENS_SEED", "99", 1);
    ASSERT_EQ(dispatch({"prepare", "--input", corpus_path, "--outdir", tmp.file("env")}), 0);
    ASSERT_EQ(dispatch({"prepare", "--input", corpus_path, "--outdir", tmp.file("flag"), "--seed",
                        "99"}),
              0);
    ASSERT_EQ(
        dispatch({"prepare", "--input", corpus_path, "--outdir", tmp.file("other"), "--seed", "7"}),
        0);
    unsetenv("POLITELENS_SEED");
    EXPECT_EQ(testutil::read_file(tmp.file("env/train.jsonl")),
              testutil::read_file(tmp.file("flag/train.jsonl")));
    EXPECT_NE(testutil::read_file(tmp.file("env/train.jsonl")),
              testutil::read_file(tmp.file("other/train.jsonl")));
}

TEST(Eval, VocabHashMismatchExitsTwo) {
    testutil::TempDir tmp;
    auto corpus_path = write_marker_corpus(tmp, 80, 5);
    auto outdir = tmp.file("data");
    ASSERT_EQ(dispatch({"prepare", "--input", corpus_path, "--outdir", outdir}), 0);
    auto config = small_train_config(tmp);
    auto model = tmp.file("model.ckpt");
    ASSERT_EQ(dispatch({"train", "--data", outdir, "--config", config, "--out", model,
                        "--max-epochs", "1"}),
              0);
    // poison the vocabulary next to the data file
    testutil::write_file(outdir + "/vocab.tsv", "<pad>\t0\n<unk>\t1\nintruder\t2\n");
    EXPECT_EQ(dispatch({"eval", "--model", model, "--data", outdir + "/test.jsonl", "--out",
                        tmp.file("pred.tsv")}),
              2);
}

TEST(Saliency, FlagValidation) {
    testutil::TempDir tmp;
    EXPECT_EQ(dispatch({"saliency", "--model", tmp.file("nope.ckpt")}), 1);  // neither id nor text
    EXPECT_EQ(dispatch({"saliency", "--model", tmp.file("nope.ckpt"), "--id", "x", "--text", "y"}),
              1);
}

// Scripted run of the whole pipeline on the synthetic marker corpus, twice,
// asserting byte-identical analysis outputs for one seed.
TEST(EndToEnd, FullPipelineDeterministic) {
    testutil::TempDir tmp;
    auto corpus_path = write_marker_corpus(tmp, 120, 31);
    auto config = small_train_config(tmp);

    auto run_all = [&](const std::string& tag) {
        auto dir = tmp.file(tag);
        std::filesystem::create_directories(dir);
        auto data = dir + "/data";
        auto model = dir + "/model.ckpt";
        EXPECT_EQ(dispatch({"prepare", "--input", corpus_path, "--outdir", data, "--seed", "17"}),
                  0);
        EXPECT_EQ(dispatch({"train", "--data", data, "--config", config, "--out", model}), 0);
        EXPECT_EQ(dispatch({"eval", "--model", model, "--data", data + "/test.jsonl", "--out",
                            dir + "/predictions.tsv"}),
                  0);
        EXPECT_EQ(dispatch({"baseline", "--kind", "ling+disc", "--data", data, "--out",
                            dir + "/baseline.tsv", "--dump-features", dir + "/features.tsv"}),
                  0);
        EXPECT_EQ(dispatch({"clusters", "--model", model, "--data", data + "/train.jsonl", "--k",
                            "5", "--out", dir + "/clusters.tsv"}),
                  0);
        EXPECT_EQ(dispatch({"saliency", "--model", model, "--text", "thanks for the great page",
                            "--outdir", dir + "/saliency"}),
                  0);
        EXPECT_EQ(dispatch({"trajectory", "--model", model, "--words", "default", "--svg",
                            dir + "/trajectory.svg", "--tsv", dir + "/trajectory.tsv"}),
                  0);
        EXPECT_EQ(dispatch({"strategies", "--data", corpus_path, "--out", dir + "/strategies.tsv"}),
                  0);
        return dir;
    };

    auto a = run_all("a");
    auto b = run_all("b");

    for (const char* name :
         {"/predictions.tsv", "/baseline.tsv", "/features.tsv", "/clusters.tsv",
          "/trajectory.tsv", "/trajectory.svg", "/strategies.tsv", "/model.ckpt"})
        EXPECT_EQ(testutil::read_file(a + name), testutil::read_file(b + name)) << name;

    // saliency files for the ad-hoc text
    auto list_tsv = [](const std::string& dir) {
        for (const auto& entry : std::filesystem::directory_iterator(dir))
            if (entry.path().extension() == ".tsv" &&
                entry.path().string().find("matrix") == std::string::npos)
                return entry.path().string();
        return std::string();
    };
    auto sal_a = list_tsv(a + "/saliency");
    auto sal_b = list_tsv(b + "/saliency");
    ASSERT_FALSE(sal_a.empty());
    EXPECT_EQ(testutil::read_file(sal_a), testutil::read_file(sal_b));

    // manifests exist next to every output family
    for (const char* name : {"/data/prepare.manifest.json", "/train.manifest.json",
                             "/eval.manifest.json", "/baseline.manifest.json",
                             "/clusters.manifest.json", "/strategies.manifest.json"})
        EXPECT_TRUE(std::filesystem::exists(a + name)) << name;
}

TEST(ConfigFile, UnknownKeyRejected) {
    testutil::TempDir tmp;
    auto path = tmp.file("bad.conf");
    testutil::write_file(path, "no_such_key = 1\n");
    train::TrainConfig cfg;
    EXPECT_THROW(cli::load_config_file(cfg, path), UsageError);

    auto ok = tmp.file("ok.conf");
    testutil::write_file(ok, "batch_size = 8 # inline comment\nwindows = 2,3\n");
    cli::load_config_file(cfg, ok);
    EXPECT_EQ(cfg.batch_size, 8u);
    EXPECT_EQ(cfg.dims.windows, (std::vector<std::size_t>{2, 3}));
}
