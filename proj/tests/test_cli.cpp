#include <gtest/gtest.h>

#include <sstream>

#include "araucana/cli.hpp"
#include "test_support.hpp"

using namespace araucana;
using namespace araucana::testing;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "araucana");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override { dir = temp_dir(::testing::UnitTest::GetInstance()->current_test_info()->name()); }
    void TearDown() override { fs::remove_all(dir); }
    std::string p(const std::string& name) const { return (dir / name).string(); }

    void synth(const std::string& gen, const std::string& rows, const std::string& sub, std::vector<std::string> extra = {}) {
        std::vector<std::string> args{"synth", "--gen", gen, "--rows", rows, "--seed", "7", "--out", p(sub)};
        args.insert(args.end(), extra.begin(), extra.end());
        auto r = run(args);
        ASSERT_EQ(r.code, 0) << r.err;
    }

    fs::path dir;
};

}  // namespace

TEST_F(Cli, SynthWritesDataSchemaManifest) {
    synth("xor_mixed", "500", "d");
    EXPECT_TRUE(fs::exists(p("d/data.csv")));
    EXPECT_TRUE(fs::exists(p("d/schema.json")));
    EXPECT_TRUE(fs::exists(p("d/manifest.json")));
    synth("xor_mixed", "500", "e");
    EXPECT_EQ(read_text_file(p("d/data.csv")), read_text_file(p("e/data.csv")));
    auto m = json::parse(read_text_file(p("d/manifest.json")));
    EXPECT_EQ(m["command"], "synth");
    EXPECT_EQ(m["seed"], 7);
    EXPECT_TRUE(m.contains("duration_seconds"));
    EXPECT_EQ(m["flags"]["gen"], "xor_mixed");
}

TEST_F(Cli, SynthUsageErrors) {
    EXPECT_EQ(run({"synth", "--rows", "10", "--out", p("x")}).code, 2);
    EXPECT_EQ(run({"synth", "--gen", "bogus", "--rows", "10", "--out", p("x")}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
}

TEST_F(Cli, TrainForestAndKnn) {
    synth("xor_mixed", "500", "d");
    auto r = run({"train", "--data", p("d/data.csv"), "--schema", p("d/schema.json"), "--out", p("m"), "--n-trees", "30"});
    ASSERT_EQ(r.code, 0) << r.err;
    ASSERT_EQ(r.out.rfind("training accuracy: ", 0), 0u);
    EXPECT_GE(std::stod(r.out.substr(19)), 0.95);
    EXPECT_TRUE(fs::exists(p("m/model.json")));
    auto m = json::parse(read_text_file(p("m/manifest.json")));
    EXPECT_EQ(m["inputs"][p("d/data.csv")], cli::sha256_hex(read_text_file(p("d/data.csv"))));

    auto k = run({"train", "--data", p("d/data.csv"), "--model", "knn", "--k", "1", "--out", p("k")});
    ASSERT_EQ(k.code, 0) << k.err;
    EXPECT_EQ(k.out, "training accuracy: 1.0000\n");
}

TEST_F(Cli, TrainMissingTargetNamesColumn) {
    synth("moons2d", "50", "d");
    auto r = run({"train", "--data", p("d/data.csv"), "--target", "outcome", "--out", p("m")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("outcome"), std::string::npos) << r.err;
}

TEST_F(Cli, ExplainConstantStubOracle) {
    synth("xor_mixed", "200", "d");
    auto r = run({"explain", "--data", p("d/data.csv"), "--index", "3", "--oracle",
                  std::string("cmd:") + ARAUCANA_STUB_PATH + " --constant 0"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("IF (always) THEN 0", 0), 0u) << r.out;
    EXPECT_NE(r.out.find("faithful=true"), std::string::npos);
}

TEST_F(Cli, ExplainEchoesDefaults) {
    synth("imbalanced_mixed", "300", "d");
    auto r = run({"explain", "--data", p("d/data.csv"), "--index", "0", "--n-trees", "10", "--out", p("x")});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* frag : {"\"n_neighbors\":100", "\"distance\":\"gower\"", "\"algorithm\":\"smote-nc\"",
                             "\"policy\":\"balance\"", "\"pruned\":false"})
        EXPECT_NE(r.out.find(frag), std::string::npos) << frag << "\n" << r.out;
    EXPECT_TRUE(fs::exists(p("x/explanation.json")));
    EXPECT_TRUE(fs::exists(p("x/manifest.json")));
}

TEST_F(Cli, ExplainJsonFormat) {
    synth("moons2d", "200", "d");
    auto r = run({"explain", "--data", p("d/data.csv"), "--instance", "[0.3, 0.2, \"a\", \"b\"]", "--format", "json", "--n-trees", "10"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = json::parse(r.out);
    for (const char* key : {"query", "oracle_label", "tree_prediction", "rule", "tree", "tree_stats", "faithful",
                            "neighborhood", "config", "seed", "warnings"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_TRUE(j["faithful"].get<bool>());
    LoadOptions opt;
    opt.target = "label";
    auto schema = std::make_shared<const Schema>(infer_schema(read_csv_file(p("d/data.csv")), opt));
    auto e = explanation_from_json(j, schema);
    EXPECT_EQ(render_explanation(e, RenderFormat::Json), r.out);
}

TEST_F(Cli, ExplainInvalidInstance) {
    synth("moons2d", "100", "d");
    EXPECT_EQ(run({"explain", "--data", p("d/data.csv"), "--instance", "[0.3]"}).code, 2);
    EXPECT_EQ(run({"explain", "--data", p("d/data.csv"), "--instance", "not json"}).code, 2);
    EXPECT_EQ(run({"explain", "--data", p("d/data.csv"), "--index", "1000"}).code, 2);
    EXPECT_EQ(run({"explain", "--data", p("d/data.csv")}).code, 2);
}

TEST_F(Cli, ExplainOracleFailureExitsOne) {
    synth("moons2d", "100", "d");
    auto r = run({"explain", "--data", p("d/data.csv"), "--index", "1", "--oracle",
                  std::string("cmd:") + ARAUCANA_STUB_PATH + " --garbage"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("oracle failure"), std::string::npos) << r.err;
}

TEST_F(Cli, ModelWithDifferentSchemaIsRejected) {
    synth("moons2d", "100", "a");
    synth("xor_mixed", "100", "b");
    ASSERT_EQ(run({"train", "--data", p("a/data.csv"), "--out", p("m"), "--n-trees", "5"}).code, 0);
    auto r = run({"explain", "--data", p("b/data.csv"), "--index", "0", "--model", p("m/model.json")});
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.err.find("schema mismatch"), std::string::npos) << r.err;
}

TEST_F(Cli, PrecomputedOracle) {
    synth("moons2d", "120", "d");
    auto table = read_csv_file(p("d/data.csv"));
    std::string csv = "x0,x1,label,pred\n";
    for (const auto& row : table.rows) csv += row[0] + "," + row[1] + "," + row[2] + "," + row[2] + "\n";
    write_text_file(p("pre.csv"), csv);
    auto bad = run({"explain", "--data", p("pre.csv"), "--index", "0", "--oracle", "precomputed:pred"});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("precomputed oracle cannot label synthetic instances"), std::string::npos) << bad.err;
    auto ok = run({"explain", "--data", p("pre.csv"), "--index", "0", "--oracle", "precomputed:pred", "--smote-policy", "off"});
    EXPECT_EQ(ok.code, 0) << ok.err;
    EXPECT_NE(ok.out.find("faithful=true"), std::string::npos);
}

TEST_F(Cli, EvaluatePerfectFidelity) {
    synth("imbalanced_mixed", "300", "d", {"--test-rows", "30"});
    auto r = run({"evaluate", "--data", p("d/data.csv"), "--schema", p("d/schema.json"), "--test", p("d/test.csv"),
                  "--explainers", "araucana", "--n-trees", "10", "--out", p("ev")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("1.000"), std::string::npos) << r.out;
    EXPECT_EQ(read_text_file(p("ev/summary.csv")), "explainer,agreements,total,failures,fidelity\naraucana,30,30,0,1.000000\n");
    auto m = json::parse(read_text_file(p("ev/manifest.json")));
    EXPECT_EQ(m["inputs"].size(), 3u);
}

TEST_F(Cli, EvaluateTestFraction) {
    synth("xor_mixed", "200", "d");
    auto r = run({"evaluate", "--data", p("d/data.csv"), "--test-frac", "0.1", "--n-trees", "10", "--out", p("ev")});
    ASSERT_EQ(r.code, 0) << r.err;
    auto per = parse_csv(read_text_file(p("ev/per_instance.csv")));
    EXPECT_EQ(per.rows.size(), 40u);
}

TEST_F(Cli, EvaluateUsageErrors) {
    synth("xor_mixed", "100", "d", {"--test-rows", "10"});
    auto r = run({"evaluate", "--data", p("d/data.csv"), "--test", p("d/test.csv"), "--explainers", "lime", "--out", p("ev")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("araucana, linear"), std::string::npos) << r.err;
    EXPECT_EQ(run({"evaluate", "--data", p("d/data.csv"), "--out", p("ev")}).code, 2);
    EXPECT_EQ(run({"evaluate", "--data", p("d/data.csv"), "--test-frac", "1.5", "--out", p("ev")}).code, 2);
    EXPECT_EQ(run({"evaluate", "--data", p("d/data.csv"), "--test-frac", "0.2", "--smote-policy", "sometimes",
                   "--out", p("ev")})
                  .code,
              2);
}

TEST(CliDigest, Sha256KnownVector) {
    EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
