#include "eqir/cli.hpp"
#include "eqir/common.hpp"
#include "pipeline.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace eqir;
using testutil::TempDir;
using testutil::write_file;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(const std::vector<std::string>& args)
{
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    return {code, o.str(), e.str()};
}

} // namespace

TEST(Config, ParsesKeyValueLines)
{
    const auto v = cli::parse_config("# comment\nalpha = 0.1\n\nseed=4\n");
    EXPECT_EQ(v.at("alpha"), "0.1");
    EXPECT_EQ(v.at("seed"), "4");
    EXPECT_THROW(cli::parse_config("alpha 0.1\n"), UsageError);
}

TEST(Config, FlagsOverrideFile)
{
    TempDir dir;
    write_file(dir.file("a.cfg"), "alpha=0.1\n");
    EXPECT_DOUBLE_EQ(
        cli::parse_args({"--config", dir.file("a.cfg"), "train", "--alpha", "0.3"}).debias.alpha,
        0.3);
    EXPECT_DOUBLE_EQ(cli::parse_args({"--config", dir.file("a.cfg"), "train"}).debias.alpha, 0.1);
}

TEST(Config, FileFillsGlobalAndCommandOptions)
{
    TempDir dir;
    write_file(dir.file("a.cfg"), "seed=11\nthreads=2\nweight_decay=0.01\ndebias=true\n");
    const auto c = cli::parse_args({"--config", dir.file("a.cfg"), "train", "--seed", "5"});
    EXPECT_EQ(c.seed, 5u);
    EXPECT_EQ(c.threads, 2u);
    EXPECT_DOUBLE_EQ(c.train.weight_decay, 0.01);
    EXPECT_TRUE(c.debias_enabled);
}

TEST(Config, UnknownKeyIsRejected)
{
    TempDir dir;
    write_file(dir.file("b.cfg"), "bogus=1\n");
    try {
        cli::parse_args({"--config", dir.file("b.cfg"), "train"});
        FAIL();
    } catch (const UsageError& e) {
        EXPECT_EQ(std::string(e.what()), "unknown key bogus");
    }
    // A key that belongs to another command is unknown here too.
    write_file(dir.file("c.cfg"), "alpha=0.2\n");
    EXPECT_THROW(cli::parse_args({"--config", dir.file("c.cfg"), "compare"}), UsageError);
    const auto r = invoke({"--config", dir.file("b.cfg"), "synth"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("unknown key bogus"), std::string::npos);
}

TEST(Run, UsageErrorsExitOne)
{
    auto r = invoke({"train", "--alpha", "1.5"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("alpha must be in [0,1]"), std::string::npos) << r.err;

    r = invoke({"train", "--debias", "--corpus", "c", "--queries", "q", "--qrels", "r"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("--biased-model"), std::string::npos) << r.err;

    r = invoke({"train", "--lr", "fast"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("--lr"), std::string::npos) << r.err;

    EXPECT_EQ(invoke({}).code, 1);
    EXPECT_EQ(invoke({"retrieve", "--corpus", "c", "--queries", "q"}).code, 1);
    EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Run, SubcommandHelpListsItsOptions)
{
    const auto r = invoke({"train-biased", "--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("--strategy"), std::string::npos) << r.out;
}

TEST(Run, DataErrorsExitTwo)
{
    TempDir dir;
    auto r = invoke({"--out", dir.file("o"), "complexity", "--queries", dir.file("none.jsonl")});
    EXPECT_EQ(r.code, 2);
    write_file(dir.file("bad.jsonl"), "{not json\n");
    r = invoke({"--out", dir.file("o"), "complexity", "--queries", dir.file("bad.jsonl")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 1"), std::string::npos);
}

TEST(Run, ComplexityWritesTable)
{
    TempDir dir;
    write_file(dir.file("q.jsonl"), R"({"_id":"q1","text":"best pizza rome"}
{"_id":"q2","text":"Although it rained, we left."}
)");
    const auto r = invoke({"--out", dir.file("o"), "complexity", "--queries", dir.file("q.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto table = testutil::slurp(dir.file("o/reports/complexity.tsv"));
    std::istringstream lines(table);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    EXPECT_EQ(header.rfind("query_id\tscore\tMLC\tMLS", 0), 0u);
    EXPECT_EQ(std::count(header.begin(), header.end(), '\t'), 31);
    EXPECT_EQ(std::count(row.begin(), row.end(), '\t'), 31);
    EXPECT_EQ(row.rfind("q1\t", 0), 0u);
    EXPECT_NE(row.find("\tNA"), std::string::npos);
}

TEST(Run, CompareIdenticalRuns)
{
    TempDir dir;
    write_file(dir.file("a.run"), "q1 Q0 d1 1 2.0 x\nq2 Q0 d2 1 1.0 x\n");
    write_file(dir.file("q.tsv"), "q1\td1\t1\nq2\td3\t1\n");
    const auto r = invoke({"--out", dir.file("o"), "compare", "--run-a", dir.file("a.run"),
                           "--run-b", dir.file("a.run"), "--qrels", dir.file("q.tsv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("raw_p=1.0\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("adjusted_p=1.0\n"), std::string::npos);
}

TEST(Run, PipelineIsDeterministicAcrossThreads)
{
    TempDir dir;
    const auto one = testutil::run_pipeline(dir.path() / "p", 1, 60, 3);
    ASSERT_EQ(one.failure, "");
    const auto again = testutil::run_pipeline(dir.path() / "p", 1, 60, 3);
    const auto four = testutil::run_pipeline(dir.path() / "p", 4, 60, 3);
    ASSERT_EQ(four.failure, "");
    EXPECT_EQ(one.snapshot, again.snapshot);
    EXPECT_EQ(one.snapshot, four.snapshot);
    EXPECT_NE(one.snapshot.find("checkpoint_digest="), std::string::npos);
}

TEST(Run, TamperedCheckpointIsRejected)
{
    TempDir dir;
    ASSERT_EQ(testutil::run_pipeline(dir.path() / "p", 1, 60, 2).failure, "");
    const auto out = (dir.path() / "p" / "out").string();
    const auto ckpt = out + "/checkpoints/plain.eqir";
    auto bytes = testutil::slurp(ckpt);
    bytes[bytes.size() - 1] ^= 0x01;
    write_file(ckpt, bytes);
    const auto r = invoke({"--out", out, "retrieve", "--model", ckpt, "--corpus",
                           out + "/data/corpus.jsonl", "--queries", out + "/data/queries.jsonl"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("manifest"), std::string::npos) << r.err;

    // The debiased trainer checks its weak learner the same way.
    const auto biased = out + "/checkpoints/biased-less_data.manifest";
    write_file(biased, "checkpoint_digest=0000000000000000\n");
    const auto t = invoke({"--out", out, "train", "--debias", "--biased-model",
                           out + "/checkpoints/biased-less_data.eqir", "--corpus",
                           out + "/data/corpus.jsonl", "--queries", out + "/data/queries.jsonl",
                           "--qrels", out + "/data/qrels/train.tsv"});
    EXPECT_EQ(t.code, 2);
}

TEST(Run, ManifestRecordsTrainingSettings)
{
    TempDir dir;
    ASSERT_EQ(testutil::run_pipeline(dir.path() / "p", 1, 60, 2).failure, "");
    const auto manifest =
        testutil::slurp((dir.path() / "p/out/checkpoints/debiased.manifest").string());
    for (const char* key : {"mode=debiased\n", "seed=3\n", "alpha=0.1\n", "epochs=2\n",
                            "negatives=7\n", "biased_digest=", "checkpoint_digest=", "corpus="}) {
        EXPECT_NE(manifest.find(key), std::string::npos) << key;
    }
}
