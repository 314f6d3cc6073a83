#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bugenrich/cli.hpp"
#include "fixtures.hpp"

using testing_support::fixture_path;
using testing_support::read_file;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = bugenrich::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("bugenrich_cli_" + std::string(testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    void write(const std::string& name, const std::string& content) const {
        std::ofstream(path(name), std::ios::binary) << content;
    }

    fs::path dir_;
    const std::string corpus_ = fixture_path("e2e/corpus.jsonl");
    const std::string vocab_ = fixture_path("e2e/vocabulary.tsv");
};

}  // namespace

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"rank", "--jobs", "0"}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, InvalidConfigNamesField) {
    write("bad.json", R"({"retrieval": {"k1": -1}})");
    const auto r = run({"rank", "--config", path("bad.json"), "--corpus", corpus_});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("retrieval.k1"), std::string::npos);
    const auto s = run({"rank", "--corpus", corpus_, "--set", "retrieval.zzz=1"});
    EXPECT_EQ(s.code, 1);
    EXPECT_NE(s.err.find("retrieval.zzz"), std::string::npos);
}

TEST_F(CliTest, MissingInputNamesPath) {
    const auto missing = path("absent.jsonl");
    const auto r = run({"rank", "--corpus", missing});
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find(missing), std::string::npos);
}

TEST_F(CliTest, ValidateReportsIssuesWithDataExitCode) {
    EXPECT_EQ(run({"validate", "--corpus", corpus_}).code, 0);
    write("broken.jsonl", R"({"id":"a","summary":"x","description":"y","created_at":5,"master_id":"b","project":"p"})"
                          "\n");
    const auto r = run({"validate", "--corpus", path("broken.jsonl")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("dangling"), std::string::npos);
}

TEST_F(CliTest, ExtractKeepsAtMostKTerms) {
    const auto r = run({"extract", "--corpus", corpus_, "--k-terms", "3", "-o", path("terms.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(path("terms.jsonl"));
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line); ++lines) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_LE(j["terms"].size(), 3u);
    }
    EXPECT_EQ(lines, 60u);
    EXPECT_NE(r.err.find("[config]"), std::string::npos);
    EXPECT_NE(r.err.find("\"k_terms\":3"), std::string::npos);
}

TEST_F(CliTest, FlagBeatsSetBeatsConfigFile) {
    write("c.json", R"({"extraction": {"k_terms": 7}})");
    const auto file_only = run({"extract", "--config", path("c.json"), "--corpus", corpus_, "-o", path("a")});
    EXPECT_NE(file_only.err.find("\"k_terms\":7"), std::string::npos);
    const auto with_set = run({"extract", "--config", path("c.json"), "--set", "extraction.k_terms=5", "--corpus",
                               corpus_, "-o", path("b")});
    EXPECT_NE(with_set.err.find("\"k_terms\":5"), std::string::npos);
    const auto with_flag = run({"extract", "--config", path("c.json"), "--set", "extraction.k_terms=5", "--k-terms",
                                "2", "--corpus", corpus_, "-o", path("c")});
    EXPECT_NE(with_flag.err.find("\"k_terms\":2"), std::string::npos);
}

TEST_F(CliTest, EvaluateNeedsSeedWhenSubsampling) {
    const auto r = run({"evaluate", "--corpus", corpus_});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("seed"), std::string::npos);
    EXPECT_EQ(run({"evaluate", "--corpus", corpus_, "--set", "evaluation.n_subsamples=0"}).code, 0);
}

TEST_F(CliTest, EvaluateTwiceIsByteIdentical) {
    const std::vector<std::string> base{"evaluate", "--corpus", corpus_, "--seed", "11", "--format", "json"};
    auto a = base, b = base;
    a.insert(a.end(), {"--jobs", "1", "-o", path("a.json")});
    b.insert(b.end(), {"--jobs", "4", "-o", path("b.json")});
    ASSERT_EQ(run(a).code, 0);
    ASSERT_EQ(run(b).code, 0);
    EXPECT_EQ(read_file(path("a.json")), read_file(path("b.json")));
    EXPECT_FALSE(read_file(path("a.json")).empty());
}

TEST_F(CliTest, EvaluateFormats) {
    for (const char* format : {"json", "table", "csv"}) {
        const auto r = run({"evaluate", "--corpus", corpus_, "--seed", "1", "--format", format});
        EXPECT_EQ(r.code, 0) << format << r.err;
        EXPECT_FALSE(r.out.empty());
    }
    EXPECT_EQ(run({"evaluate", "--corpus", corpus_, "--seed", "1", "--format", "xml"}).code, 1);
}

TEST_F(CliTest, CompareImprovesDissimilarStratum) {
    const auto r = run({"compare", "--corpus", corpus_, "--vocabulary", vocab_, "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_GT(j["delta"]["dissimilar"]["recall_rate"]["5"].get<double>(), 0.0);
    EXPECT_GE(j["delta"]["dissimilar"]["recall_rate"]["5"].get<double>(),
              j["delta"]["similar"]["recall_rate"]["5"].get<double>());
    EXPECT_TRUE(j["significance"].contains("overall"));
}

TEST_F(CliTest, EnrichThenCompareFromFile) {
    ASSERT_EQ(run({"enrich", "--corpus", corpus_, "--vocabulary", vocab_, "-o", path("enriched.jsonl")}).code, 0);
    const auto direct = run({"compare", "--corpus", corpus_, "--vocabulary", vocab_, "--seed", "3"});
    const auto from_file = run({"compare", "--corpus", corpus_, "--enriched", path("enriched.jsonl"), "--seed", "3"});
    ASSERT_EQ(from_file.code, 0) << from_file.err;
    EXPECT_EQ(direct.out, from_file.out);
}

TEST_F(CliTest, InputsAreNotMutated) {
    fs::copy_file(corpus_, path("corpus.jsonl"));
    fs::copy_file(vocab_, path("vocab.tsv"));
    const auto before_c = read_file(path("corpus.jsonl"));
    const auto before_v = read_file(path("vocab.tsv"));
    run({"compare", "--corpus", path("corpus.jsonl"), "--vocabulary", path("vocab.tsv"), "--seed", "1", "-o",
         path("out.json")});
    run({"enrich", "--corpus", path("corpus.jsonl"), "--vocabulary", path("vocab.tsv"), "-o", path("e.jsonl")});
    const auto clash = run({"enrich", "--corpus", path("corpus.jsonl"), "--vocabulary", path("vocab.tsv"), "-o",
                            path("corpus.jsonl")});
    EXPECT_NE(clash.code, 0);
    EXPECT_EQ(read_file(path("corpus.jsonl")), before_c);
    EXPECT_EQ(read_file(path("vocab.tsv")), before_v);
}

TEST_F(CliTest, VocabSplitAndBleu) {
    const auto r = run({"vocab-split", "-i", vocab_, "--output-dir", path("split"), "--seed", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto manifest = nlohmann::json::parse(read_file(path("split/manifest.json")));
    EXPECT_EQ(manifest["seed"], 5);
    EXPECT_TRUE(fs::exists(path("split/train.tsv")));
    EXPECT_EQ(run({"vocab-split", "-i", vocab_, "--output-dir", path("split2")}).code, 1);

    write("pred.tsv", "javadoc\tdocumentation generated from comments in java source\nnotaterm\tx\n");
    const auto b = run({"bleu-eval", "--predictions", path("pred.tsv"), "--references", vocab_});
    ASSERT_EQ(b.code, 0) << b.err;
    const auto j = nlohmann::json::parse(b.out);
    EXPECT_EQ(j["pairs"], 1);
    EXPECT_EQ(j["unmatched"], 1);
    EXPECT_NEAR(j["bleu"].get<double>(), 1.0, 1e-12);
}

TEST_F(CliTest, VocabClean) {
    write("raw.tsv", "Thread\t<p>a unit of <b>execution</b> http://x.org</p>\tglossary\nempty\t<br/>\tglossary\n");
    const auto r = run({"vocab-clean", "-i", path("raw.tsv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("thread\t", 0), 0u);
    EXPECT_EQ(r.out.find("empty"), std::string::npos);
}
