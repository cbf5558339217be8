#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace araucana;
using namespace araucana::testing;

namespace {

class ConstantExplainer final : public Explainer {
public:
    explicit ConstantExplainer(Label l) : label_(l) {}
    std::string name() const override { return "constant"; }
    Label predict(const ExplainContext&) const override { return label_; }

private:
    Label label_;
};

/// Fails on every other test instance with a non-oracle error.
class FlakyExplainer final : public Explainer {
public:
    std::string name() const override { return "flaky"; }
    Label predict(const ExplainContext& ctx) const override {
        if (ctx.x.numeric(0) < 0.5) throw std::runtime_error("flaky failure");
        return ctx.oracle.predict(ctx.x);
    }
};

Neighborhood whole(const Dataset& d, const Instance& x, const PredictionOracle& o) {
    ExplainConfig cfg;
    cfg.n_neighbors = d.size();
    return select_neighborhood(d, x, o, cfg);
}

/// Best agreement any affine classifier sign(w.z + b) reaches on the XOR
/// corners, by enumerating a grid of directions and offsets.
double best_linear_xor_agreement() {
    const double corners[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    const int labels[4] = {0, 1, 1, 0};
    int best = 0;
    for (int a = 0; a < 360; ++a) {
        const double t = a * M_PI / 180.0, w0 = std::cos(t), w1 = std::sin(t);
        for (int bi = -300; bi <= 300; ++bi) {
            const double b = bi / 100.0 + 0.005;
            int hits = 0;
            for (int k = 0; k < 4; ++k) hits += ((w0 * corners[k][0] + w1 * corners[k][1] + b > 0) ? 1 : 0) == labels[k];
            best = std::max(best, hits);
        }
    }
    return best / 4.0;
}

}  // namespace

TEST(Fidelity, EncodeInstance) {
    auto s = make_schema({FeatureSpec::numeric("x", 0, 4), FeatureSpec::categorical("c", {"a", "b", "c"})});
    EXPECT_EQ(encode_instance(*s, inst({1.0, cat(2)})), (std::vector<double>{0.25, 0, 0, 1}));
}

TEST(Fidelity, ConstantRelabelsGiveConstantPredictor) {
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1)}, binary_target());
    Dataset d(s, {inst({0.1}), inst({0.2}), inst({0.9})}, std::vector<Label>{0, 1, 0});
    FunctionOracle o(s, [](const Instance&) { return 1.0; });
    auto lin = fit_linear_explainer(d, whole(d, inst({0.5}), o), inst({0.5}));
    EXPECT_TRUE(lin.is_constant());
    for (const auto& r : d.rows()) EXPECT_EQ(lin.predict(r), 1.0);
}

TEST(Fidelity, SeparableNeighborhood) {
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1), FeatureSpec::numeric("y", 0, 1)}, binary_target());
    std::mt19937_64 rng(3);
    std::vector<Instance> rows;
    for (int i = 0; i < 200; ++i) rows.push_back(random_instance(*s, rng));
    Dataset d(s, rows, std::vector<Label>(rows.size(), 0));
    FunctionOracle o(s, [](const Instance& z) { return z.numeric(0) + z.numeric(1) > 1.0 ? 1.0 : 0.0; });
    Instance x = inst({0.5, 0.5});
    auto nbh = whole(d, x, o);
    auto lin = fit_linear_explainer(d, nbh, x);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < nbh.indices.size(); ++i) agree += lin.predict(d.row(nbh.indices[i])) == nbh.relabels[i];
    EXPECT_GE(agree, 190u);
}

TEST(Fidelity, XorCornersCapLinearAgreement) {
    EXPECT_EQ(best_linear_xor_agreement(), 0.75);
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1), FeatureSpec::numeric("y", 0, 1)}, binary_target());
    std::vector<Instance> corners{inst({0.0, 0.0}), inst({0.0, 1.0}), inst({1.0, 0.0}), inst({1.0, 1.0})};
    std::vector<Instance> rows;
    for (int rep = 0; rep < 5; ++rep) rows.insert(rows.end(), corners.begin(), corners.end());
    Dataset d(s, rows, std::vector<Label>(rows.size(), 0));
    FunctionOracle o(s, [](const Instance& z) { return (z.numeric(0) > 0.5) != (z.numeric(1) > 0.5) ? 1.0 : 0.0; });
    for (const auto& x : corners) {
        auto lin = fit_linear_explainer(d, whole(d, x, o), x);
        std::size_t agree = 0;
        for (const auto& c : corners) agree += lin.predict(c) == o.predict(c);
        EXPECT_LE(agree / 4.0, 0.75);
    }
}

TEST(Fidelity, ConstantExplainerScoresMajorityFraction) {
    auto [train, test] = synth_train_test(spec("imbalanced_mixed", 300), 80, 2);
    ForestConfig fc;
    fc.n_trees = 10;
    BuiltInOracle o(train_forest(train, fc));
    auto labels = o.predict_batch(test.rows());
    std::size_t zeros = std::count(labels.begin(), labels.end(), 0.0);
    std::vector<std::shared_ptr<const Explainer>> ex{std::make_shared<ConstantExplainer>(0.0)};
    auto report = evaluate_fidelity(train, test, o, ex);
    EXPECT_DOUBLE_EQ(report.summaries[0].fidelity(), static_cast<double>(zeros) / test.size());
}

TEST(Fidelity, AraucanaIsPerfectOnUniqueQueries) {
    auto [train, test] = synth_train_test(spec("imbalanced_mixed", 400), 40, 5);
    ForestConfig fc;
    fc.n_trees = 15;
    BuiltInOracle o(train_forest(train, fc));
    std::vector<std::shared_ptr<const Explainer>> ex{make_explainer("araucana"), make_explainer("linear")};
    auto report = evaluate_fidelity(train, test, o, ex);
    EXPECT_EQ(report.summaries[0].fidelity(), 1.0);
    EXPECT_EQ(report.summaries[0].total, test.size());
    EXPECT_GE(report.summaries[1].fidelity(), 0.0);
    EXPECT_LE(report.summaries[1].fidelity(), 1.0);
    EXPECT_EQ(report.records.size(), 2 * test.size());
}

TEST(Fidelity, ThreadedEvaluationMatchesSequential) {
    auto [train, test] = synth_train_test(spec("xor_mixed", 300), 30, 6);
    ForestConfig fc;
    fc.n_trees = 10;
    BuiltInOracle o(train_forest(train, fc));
    std::vector<std::shared_ptr<const Explainer>> ex{make_explainer("araucana"), make_explainer("linear")};
    EvaluateConfig one, many;
    many.jobs = 3;
    auto a = report_to_csv(evaluate_fidelity(train, test, o, ex, one));
    auto b = report_to_csv(evaluate_fidelity(train, test, o, ex, many));
    EXPECT_EQ(a.summary, b.summary);
    EXPECT_EQ(a.per_instance, b.per_instance);
}

TEST(Fidelity, FailuresAreExcludedAndCounted) {
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1)}, binary_target());
    std::vector<Instance> rows;
    for (int i = 0; i < 20; ++i) rows.push_back(inst({i / 20.0}));
    Dataset train(s, rows, std::vector<Label>(20, 0));
    Dataset test(s, {inst({0.1}), inst({0.6}), inst({0.7}), inst({0.3})}, std::nullopt);
    FunctionOracle o(s, [](const Instance& z) { return z.numeric(0) > 0.4 ? 1.0 : 0.0; });
    std::vector<std::shared_ptr<const Explainer>> ex{std::make_shared<FlakyExplainer>()};
    auto report = evaluate_fidelity(train, test, o, ex);
    EXPECT_EQ(report.summaries[0].failures, 2u);
    EXPECT_EQ(report.summaries[0].total, 2u);
    EXPECT_EQ(report.summaries[0].failures + report.summaries[0].total, test.size());
    EXPECT_EQ(report.summaries[0].fidelity(), 1.0);
    auto csv = report_to_csv(report);
    EXPECT_NE(csv.per_instance.find("flaky failure"), std::string::npos);
}

TEST(Fidelity, OracleFailureAborts) {
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1)}, binary_target());
    Dataset train(s, {inst({0.1}), inst({0.9})}, std::vector<Label>{0, 1});
    Dataset test(s, {inst({0.5})}, std::nullopt);
    FunctionOracle o(s, [](const Instance&) -> Label { throw OracleError("boom"); });
    std::vector<std::shared_ptr<const Explainer>> ex{make_explainer("araucana")};
    EXPECT_THROW(evaluate_fidelity(train, test, o, ex), OracleError);
}

TEST(Fidelity, ReportCsv) {
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1)}, binary_target());
    Dataset train(s, {inst({0.1}), inst({0.9})}, std::vector<Label>{0, 1});
    FunctionOracle o(s, [](const Instance& z) { return z.numeric(0) > 0.5 ? 1.0 : 0.0; });
    std::vector<std::shared_ptr<const Explainer>> ex{make_explainer("araucana")};

    Dataset empty(s, {}, std::nullopt);
    auto r0 = report_to_csv(evaluate_fidelity(train, empty, o, ex));
    EXPECT_EQ(r0.summary, "explainer,agreements,total,failures,fidelity\naraucana,0,0,0,nan\n");
    EXPECT_EQ(r0.per_instance, "index,explainer,oracle_label,prediction,agree,error\n");

    Dataset one(s, {inst({0.8})}, std::nullopt);
    auto report = evaluate_fidelity(train, one, o, ex);
    auto r1 = report_to_csv(report);
    EXPECT_EQ(r1.summary, "explainer,agreements,total,failures,fidelity\naraucana,1,1,0,1.000000\n");
    EXPECT_EQ(r1.per_instance, "index,explainer,oracle_label,prediction,agree,error\n0,araucana,1,1,1,\n");
    auto again = report_to_csv(report);
    EXPECT_EQ(again.summary, r1.summary);
    EXPECT_EQ(again.per_instance, r1.per_instance);
}

TEST(Fidelity, UnknownExplainer) {
    try {
        make_explainer("lime");
        FAIL();
    } catch (const UsageError& e) {
        EXPECT_NE(std::string(e.what()).find("araucana, linear"), std::string::npos);
    }
}
