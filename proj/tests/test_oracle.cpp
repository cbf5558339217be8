#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace araucana;
using namespace araucana::testing;

TEST(Oracle, SingleTreeForestEqualsCart) {
    Dataset d = synth_dataset(spec("imbalanced_mixed", 300), 5);
    ForestConfig cfg;
    cfg.n_trees = 1;
    cfg.bootstrap = false;
    cfg.max_features = d.schema().size();
    auto forest = train_forest(d, cfg);
    auto tree = fit_tree(d.rows(), d.targets(), d.schema_ptr());
    BuiltInOracle oracle(forest);
    auto batch = oracle.predict_batch(d.rows());
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_EQ(batch[i], tree.predict(d.row(i)));
        EXPECT_EQ(batch[i], oracle.predict(d.row(i)));
    }
}

TEST(Oracle, ForestDeterministicAndAccurate) {
    Dataset d = synth_dataset(spec("xor_mixed", 500), 7);
    ForestConfig cfg;
    cfg.n_trees = 30;
    cfg.seed = 9;
    Model a = train_forest(d, cfg), b = train_forest(d, cfg);
    EXPECT_EQ(model_to_json(a), model_to_json(b));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < d.size(); ++i) hits += model_predict(a, d.row(i)) == d.targets()[i];
    EXPECT_GE(hits, 475u);
}

TEST(Oracle, KnnExamples) {
    Dataset d = synth_dataset(spec("moons2d", 200), 4);
    auto k1 = train_knn(d, 1);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(k1.predict(d.row(i)), d.targets()[i]);

    auto all = train_knn(d, d.size());
    std::size_t ones = 0;
    for (Label l : d.targets()) ones += l == 1.0;
    Label global = ones * 2 > d.size() ? 1.0 : 0.0;
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(all.predict(random_instance(d.schema(), rng)), global);
}

TEST(Oracle, ModelFileRoundTrip) {
    auto dir = temp_dir("oracle");
    Dataset d = synth_dataset(spec("imbalanced_mixed", 200), 1);
    ForestConfig cfg;
    cfg.n_trees = 10;
    Model forest = train_forest(d, cfg);
    Model knn = train_knn(d, 3);
    save_model(forest, (dir / "f.json").string());
    save_model(knn, (dir / "k.json").string());
    Model f2 = load_model((dir / "f.json").string());
    Model k2 = load_model((dir / "k.json").string());
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
        auto x = random_instance(d.schema(), rng);
        EXPECT_EQ(model_predict(forest, x), model_predict(f2, x));
        EXPECT_EQ(model_predict(knn, x), model_predict(k2, x));
    }

    std::string text = read_text_file((dir / "f.json").string());
    write_text_file((dir / "trunc.json").string(), text.substr(0, text.size() / 2));
    EXPECT_THROW(load_model((dir / "trunc.json").string()), DataError);

    Dataset other = synth_dataset(spec("moons2d", 50), 1);
    try {
        BuiltInOracle o(f2, other.schema());
        FAIL() << "expected a schema mismatch";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("schema mismatch"), std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST(Oracle, PrecomputedBackend) {
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1)}, binary_target());
    PrecomputedOracle o(s, "pred");
    std::vector<Instance> rows{inst({0.1}), inst({0.4}), inst({0.9})};
    std::vector<Label> preds{1, 0, 1};
    o.add(rows, preds);
    EXPECT_EQ(o.predict_batch(rows), preds);
    EXPECT_FALSE(o.can_label_synthetic());
    try {
        o.predict(inst({0.5}));
        FAIL();
    } catch (const OracleError& e) {
        EXPECT_NE(std::string(e.what()).find("precomputed oracle cannot label synthetic instances"), std::string::npos);
    }
}

TEST(Oracle, PredictionColumnParsing) {
    auto table = parse_csv("x,label,pred\n0.1,0,1\n0.2,1,0\n");
    Schema s({FeatureSpec::numeric("x", 0, 1)}, binary_target());
    EXPECT_EQ(parse_prediction_column(table, "pred", s), (std::vector<Label>{1, 0}));
    EXPECT_THROW(parse_prediction_column(table, "nope", s), DataError);
}

TEST(Oracle, TrainingWithoutTargetNamesColumn) {
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1)}, TargetSpec{"outcome", Task::Classification, {"0", "1"}});
    Dataset d(s, {inst({0.1})});
    try {
        train_forest(d);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("outcome"), std::string::npos);
    }
}

TEST(Oracle, ForestRegressorAveragesTrees) {
    SynthSpec sp = spec("xor_mixed", 200);
    sp.task = Task::Regression;
    Dataset d = synth_dataset(sp, 2);
    ForestConfig cfg;
    cfg.n_trees = 5;
    auto f = train_forest(d, cfg);
    const auto& x = d.row(0);
    double mean = 0;
    for (const auto& t : f.trees()) mean += t.predict(x);
    EXPECT_DOUBLE_EQ(f.predict(x), mean / 5);
}
