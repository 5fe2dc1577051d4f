#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eden/providers/stub_server.hpp"
#include "eden_cli.hpp"
#include "helpers.hpp"

using namespace eden;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = cli::run_cli(std::move(args), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<nlohmann::json> jsonl(const std::string& text) {
    std::vector<nlohmann::json> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(nlohmann::json::parse(line));
    return out;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("eden_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write(const std::string& name, const std::string& content) const {
        std::ofstream(path(name)) << content;
        return path(name);
    }

    const std::string toy = test::data_path("toy_model.json");
    const std::string toy_prompts = test::data_path("toy_prompts.txt");
    fs::path dir_;
};

}  // namespace

TEST_F(Cli, SingleBranchDecodeMatchesGreedy) {
    const auto e = run({"decode", "--model-file", toy, "--prompts", toy_prompts, "--decoder", "eden", "--b-max", "1",
                        "--max-tokens", "4"});
    const auto g = run({"decode", "--model-file", toy, "--prompts", toy_prompts, "--decoder", "greedy", "--max-tokens", "4"});
    ASSERT_EQ(e.code, 0) << e.err;
    ASSERT_EQ(g.code, 0) << g.err;
    const auto je = jsonl(e.out), jg = jsonl(g.out);
    ASSERT_EQ(je.size(), 3u);
    ASSERT_EQ(jg.size(), 3u);
    for (std::size_t i = 0; i < je.size(); ++i) EXPECT_EQ(je[i]["tokens"].dump(), jg[i]["tokens"].dump());
}

TEST_F(Cli, DecodeScoreMatchesVerifyOracle) {
    const auto d = run({"decode", "--model-file", toy, "--prompts", toy_prompts, "--b-max", "5", "--max-tokens", "4"});
    const auto v = run({"verify", "--model-file", toy, "--prompts", toy_prompts, "--b-max", "5", "--max-tokens", "4"});
    ASSERT_EQ(d.code, 0) << d.err;
    ASSERT_EQ(v.code, 0) << v.err;
    const auto results = jsonl(d.out);
    const auto report = lines(v.out);
    ASSERT_EQ(report.size(), results.size());
    for (std::size_t i = 0; i < report.size(); ++i) {
        std::istringstream is(report[i]);
        std::string status, word, idx, label;
        double oracle = 0.0;
        is >> status >> word >> idx >> label >> oracle;
        EXPECT_EQ(status, "PASS");
        EXPECT_NEAR(results[i]["score"].get<double>(), oracle, 1e-9);
    }
}

TEST_F(Cli, DecodeSchema) {
    const auto out = path("decode.jsonl");
    const auto r = run({"decode", "--model-file", toy, "--prompts", toy_prompts, "--max-tokens", "4", "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto& j : jsonl(slurp(out))) {
        ASSERT_TRUE(j.is_object());
        EXPECT_TRUE(j["tokens"].is_array());
        EXPECT_TRUE(j["text"].is_string());
        EXPECT_TRUE(j["score"].is_number());
        EXPECT_TRUE(j["expansions"].is_number_unsigned());
        ASSERT_TRUE(j["trace"].is_array());
        for (const auto& st : j["trace"]) {
            for (const char* key : {"step", "active", "entropy", "normalized_entropy", "mean_branch", "max_branch",
                                    "children", "prunes", "beam", "s_star"})
                EXPECT_TRUE(st.contains(key)) << key;
        }
    }
}

TEST_F(Cli, MissingModelFileFailsWithoutOutput) {
    const auto out = path("never.jsonl");
    const auto r = run({"decode", "--model-file", path("absent.json"), "--prompts", toy_prompts, "--out", out});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(r.err.empty());
    EXPECT_FALSE(fs::exists(out));
    EXPECT_FALSE(fs::exists(out + ".tmp"));
}

TEST_F(Cli, UnknownFlagIsConfigError) {
    EXPECT_EQ(run({"decode", "--bogus"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"decode", "--model-file", toy, "--prompts", toy_prompts, "--decoder", "viterbi"}).code, 2);
    EXPECT_EQ(run({"decode", "--model-file", toy, "--prompts", toy_prompts, "--b-max", "0"}).code, 2);
}

TEST_F(Cli, TrainIsByteIdentical) {
    const auto corpus = test::data_path("tiny_corpus.txt");
    const auto a = path("a.json"), b = path("b.json");
    ASSERT_EQ(run({"train-ngram", "--corpus", corpus, "--order", "2", "--out", a}).code, 0);
    ASSERT_EQ(run({"train-ngram", "--corpus", corpus, "--order", "2", "--out", b}).code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
    const auto doc = nlohmann::json::parse(slurp(a));
    EXPECT_EQ(doc["order"], 2);
    const auto u = path("u.json");
    ASSERT_EQ(run({"train-ngram", "--corpus", corpus, "--order", "1", "--out", u}).code, 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(u))["order"], 1);
}

TEST_F(Cli, TrainedModelDecodes) {
    const auto model = path("m.json");
    ASSERT_EQ(run({"train-ngram", "--corpus", test::data_path("tiny_corpus.txt"), "--out", model}).code, 0);
    const auto r = run({"decode", "--provider", "ngram", "--model-file", model, "--prompts",
                        test::data_path("tiny_prompts.txt"), "--max-tokens", "8"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(jsonl(r.out).size(), 3u);
}

TEST_F(Cli, BenchGreedyExpansionsEqualLength) {
    const auto prompts = write("p.txt", "\nA\nB\n");
    const auto r = run({"bench", "--model-file", toy, "--prompts", prompts, "--decoders", "greedy", "--max-tokens", "4",
                        "--temperature", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], "decoder,param,mean_normalized_score,mean_expansions,n_prompts");
    const auto m = test::toy_model();
    ScoreConfig c;
    c.max_length = 4;
    c.vocab_size = 3;
    double length = 0.0;
    for (const auto& p : {TokenSequence{}, TokenSequence{0}, TokenSequence{1}})
        length += static_cast<double>(greedy_decode(m, p, c).tokens.size());
    std::istringstream is(rows[1]);
    std::string name, param, score, exp, n;
    std::getline(is, name, ',');
    std::getline(is, param, ',');
    std::getline(is, score, ',');
    std::getline(is, exp, ',');
    std::getline(is, n, ',');
    EXPECT_EQ(name, "greedy");
    EXPECT_EQ(param, "");
    EXPECT_NEAR(std::stod(exp), length / 3.0, 1e-12);
    EXPECT_EQ(n, "3");
}

TEST_F(Cli, BenchSuiteSchema) {
    const auto r = run({"bench", "--suite-models", "5", "--decoders", "eden,beam", "--sweep", "2,3", "--max-tokens", "5",
                        "--threads", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 5u);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(std::count(rows[i].begin(), rows[i].end(), ','), 4);
}

TEST_F(Cli, EmptyPromptsFileIsConfigError) {
    const auto empty = write("empty.txt", "");
    EXPECT_EQ(run({"bench", "--model-file", toy, "--prompts", empty}).code, 2);
    EXPECT_EQ(run({"decode", "--model-file", toy, "--prompts", empty}).code, 2);
}

TEST_F(Cli, RegretInfeasibleBudget) {
    const auto out = path("r.csv");
    EXPECT_EQ(run({"simulate-regret", "--T", "50", "--M", "0.01", "--out", out}).code, 2);
    EXPECT_FALSE(fs::exists(out));
}

TEST_F(Cli, RegretCsvIsDeterministic) {
    const std::vector<std::string> args{"simulate-regret", "--T", "10", "--M", "50", "--seeds", "4", "--trials", "10"};
    const auto a = run(args), b = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    const auto rows = lines(a.out);
    ASSERT_EQ(rows.size(), 16u);
    EXPECT_EQ(rows[0], "variance_level,policy,mean_regret,stderr,M,T,seed_count");
    EXPECT_EQ(rows[1].substr(0, 8), "0,fixed,");
}

TEST_F(Cli, EstimatePointMassIsExact) {
    const auto r = run({"estimate-entropy", "--point-mass", "--seeds", "5", "--grid", "10,100"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], "m,rmse,stderr,threshold_bmax5,threshold_bmax10");
    EXPECT_EQ(rows[1].substr(0, 5), "10,0,");
    EXPECT_EQ(run({"estimate-entropy", "--method", "jackknife"}).code, 2);
}

TEST_F(Cli, VerifyRandomModels) {
    const auto r = run({"verify", "--count", "0"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "0/0 passed\n");
    const auto some = run({"verify", "--count", "5", "--max-vocab", "3", "--max-length", "3"});
    EXPECT_NE(some.out.find("/5 passed"), std::string::npos);
}

TEST_F(Cli, VerifyGuardExceeded) {
    EXPECT_EQ(run({"verify", "--count", "1", "--max-vocab", "20", "--max-length", "20"}).code, 2);
}

TEST_F(Cli, RemoteDecodeMatchesLocal) {
    const auto m = test::toy_model();
    StubCompletionServer server(m);
    server.start();
    const auto remote = run({"decode", "--provider", "remote", "--endpoint", server.endpoint(), "--model-file", toy,
                             "--top-logprobs", "3", "--vocab-known", "--prompts", toy_prompts, "--max-tokens", "4"});
    const auto local = run({"decode", "--model-file", toy, "--prompts", toy_prompts, "--max-tokens", "4"});
    ASSERT_EQ(remote.code, 0) << remote.err;
    ASSERT_EQ(local.code, 0) << local.err;
    const auto jr = jsonl(remote.out), jl = jsonl(local.out);
    ASSERT_EQ(jr.size(), jl.size());
    for (std::size_t i = 0; i < jr.size(); ++i) {
        EXPECT_EQ(jr[i]["tokens"], jl[i]["tokens"]);
        EXPECT_NEAR(jr[i]["score"].get<double>(), jl[i]["score"].get<double>(), 1e-9);
    }
}

TEST_F(Cli, UnreachableRemoteIsProviderError) {
    const auto r = run({"decode", "--provider", "remote", "--endpoint", "http://127.0.0.1:9", "--model-file", toy,
                        "--prompts", toy_prompts});
    EXPECT_EQ(r.code, 3);
}
