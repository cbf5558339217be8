#include <gtest/gtest.h>

#include <map>

#include "test_support.hpp"

using namespace araucana;
using namespace araucana::testing;

namespace {

SchemaPtr binary_cats(std::size_t d) {
    std::vector<FeatureSpec> fs;
    for (std::size_t i = 0; i < d; ++i) fs.push_back(FeatureSpec::categorical("f" + std::to_string(i), {"0", "1"}));
    return make_schema(fs, binary_target());
}

Instance bits(std::size_t v, std::size_t d) {
    Instance x;
    for (std::size_t i = 0; i < d; ++i) x.values.emplace_back(CategoryIndex{(v >> i) & 1u});
    return x;
}

std::size_t training_errors(const ExplainerTree& t, const std::vector<Instance>& rows, const std::vector<Label>& labels) {
    std::size_t e = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) e += t.predict(rows[i]) != labels[i];
    return e;
}

/// Lowest training error any classifier can reach: per distinct feature
/// vector, every label except the most frequent one is unavoidable.
std::size_t min_achievable_error(const std::vector<Instance>& rows, const std::vector<Label>& labels) {
    std::map<std::vector<Value>, std::map<Label, std::size_t>> groups;
    for (std::size_t i = 0; i < rows.size(); ++i) ++groups[rows[i].values][labels[i]];
    std::size_t e = 0;
    for (const auto& [key, by_label] : groups) {
        std::size_t total = 0, best = 0;
        for (auto [l, n] : by_label) {
            total += n;
            best = std::max(best, n);
        }
        e += total - best;
    }
    return e;
}

}  // namespace

TEST(Cart, AndDataset) {
    auto s = binary_cats(2);
    std::vector<Instance> rows{bits(0, 2), bits(1, 2), bits(2, 2), bits(3, 2)};
    std::vector<Label> labels{0, 0, 0, 1};
    auto t = fit_tree(rows, labels, s);
    EXPECT_EQ(training_errors(t, rows, labels), 0u);
    EXPECT_LE(t.leaf_count(), 3u);
    EXPECT_EQ(t.predict(bits(3, 2)), 1.0);
    std::vector<std::size_t> counts{3, 1};
    EXPECT_NEAR(gini_impurity(counts), 2.0 * 0.75 * 0.25, 1e-15);
    EXPECT_EQ(t.root().samples, 4u);
}

TEST(Cart, XorNeedsZeroGainRootSplit) {
    auto s = binary_cats(2);
    std::vector<Instance> rows{bits(0, 2), bits(1, 2), bits(2, 2), bits(3, 2)};
    std::vector<Label> labels{0, 1, 1, 0};
    auto t = fit_tree(rows, labels, s);
    EXPECT_EQ(training_errors(t, rows, labels), 0u);
    EXPECT_EQ(t.stats(), (TreeStats{2, 4, 7}));
}

TEST(Cart, PureRootIsSingleLeaf) {
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1)}, binary_target());
    std::vector<Instance> rows{inst({0.1}), inst({0.5}), inst({0.9})};
    std::vector<Label> labels{1, 1, 1};
    auto t = fit_tree(rows, labels, s);
    EXPECT_EQ(t.stats(), (TreeStats{0, 1, 1}));
    EXPECT_TRUE(t.decision_path(inst({0.3})).empty());
    EXPECT_EQ(t.predict(inst({0.77})), 1.0);
}

TEST(Cart, DepthOneTreeHasOneStepPaths) {
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1)}, binary_target());
    std::vector<Instance> rows{inst({0.1}), inst({0.2}), inst({0.8}), inst({0.9})};
    std::vector<Label> labels{0, 0, 1, 1};
    auto t = fit_tree(rows, labels, s);
    ASSERT_EQ(t.depth(), 1u);
    auto path = t.decision_path(inst({0.15}));
    ASSERT_EQ(path.size(), 1u);
    EXPECT_TRUE(path[0].passed);
    EXPECT_DOUBLE_EQ(path[0].test.threshold, 0.5);
}

TEST(Cart, LeafCountIsInternalCountPlusOne) {
    std::mt19937_64 rng(3);
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1), FeatureSpec::categorical("c", {"a", "b", "c"}),
                          FeatureSpec::numeric("z", 0, 1)},
                         binary_target());
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Instance> rows;
        std::vector<Label> labels;
        std::bernoulli_distribution coin(0.5);
        for (int i = 0; i < 40; ++i) {
            rows.push_back(random_instance(*s, rng));
            labels.push_back(coin(rng));
        }
        auto t = fit_tree(rows, labels, s);
        auto st = t.stats();
        EXPECT_EQ(st.leaf_count, st.node_count - st.leaf_count + 1);
        EXPECT_EQ(training_errors(t, rows, labels), 0u);
    }
}

TEST(Cart, ConflictingDuplicatesReachMinimumError) {
    auto s = binary_cats(2);
    std::vector<Instance> rows{bits(0, 2), bits(0, 2), bits(0, 2), bits(1, 2), bits(3, 2), bits(3, 2)};
    std::vector<Label> labels{0, 1, 1, 1, 0, 1};
    auto t = fit_tree(rows, labels, s);
    EXPECT_EQ(training_errors(t, rows, labels), min_achievable_error(rows, labels));
}

TEST(Cart, BruteForceSmallCategoricalDatasets) {
    // Every multiset of up to 6 rows over 2 binary features and every consistent labeling.
    const std::size_t d = 2, values = 1u << d;
    auto s = binary_cats(d);
    std::size_t checked = 0;
    std::vector<std::size_t> counts(values, 0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t v, std::size_t left) {
        if (v == values) {
            std::vector<std::size_t> present;
            for (std::size_t i = 0; i < values; ++i)
                if (counts[i]) present.push_back(i);
            if (present.empty()) return;
            for (std::size_t mask = 0; mask < (1u << present.size()); ++mask) {
                std::vector<Instance> rows;
                std::vector<Label> labels;
                for (std::size_t p = 0; p < present.size(); ++p)
                    for (std::size_t c = 0; c < counts[present[p]]; ++c) {
                        rows.push_back(bits(present[p], d));
                        labels.push_back((mask >> p) & 1u);
                    }
                auto t = fit_tree(rows, labels, s);
                ASSERT_EQ(training_errors(t, rows, labels), 0u);
                ++checked;
            }
            return;
        }
        for (std::size_t c = 0; c <= left; ++c) {
            counts[v] = c;
            rec(v + 1, left - c);
        }
        counts[v] = 0;
    };
    rec(0, 6);
    EXPECT_GT(checked, 1000u);
}

TEST(Cart, RegressionLeavesReproduceTargets) {
    std::mt19937_64 rng(17);
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1), FeatureSpec::categorical("c", {"a", "b"})}, regression_target());
    std::vector<Instance> rows;
    std::vector<Label> y;
    std::normal_distribution<double> g(0, 1);
    for (int i = 0; i < 100; ++i) {
        rows.push_back(random_instance(*s, rng));
        y.push_back(g(rng));
    }
    auto t = fit_tree(rows, y, s);
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(t.predict(rows[i]), y[i]);
}

TEST(Cart, MaxDepthAndMinSamplesSplit) {
    std::mt19937_64 rng(2);
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1), FeatureSpec::numeric("y", 0, 1)}, binary_target());
    std::vector<Instance> rows;
    std::vector<Label> labels;
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < 60; ++i) {
        rows.push_back(random_instance(*s, rng));
        labels.push_back(coin(rng));
    }
    CartConfig cfg;
    cfg.max_depth = 2;
    EXPECT_LE(fit_tree(rows, labels, s, cfg).depth(), 2u);
    CartConfig mss;
    mss.min_samples_split = 100;
    EXPECT_EQ(fit_tree(rows, labels, s, mss).leaf_count(), 1u);
    mss.min_samples_split = 1;
    EXPECT_THROW(fit_tree(rows, labels, s, mss), ValidationError);
}

TEST(Cart, EntropyCriterionAlsoFitsPerfectly) {
    std::mt19937_64 rng(21);
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1), FeatureSpec::categorical("c", {"a", "b", "c"})}, binary_target());
    std::vector<Instance> rows;
    std::vector<Label> labels;
    std::bernoulli_distribution coin(0.3);
    for (int i = 0; i < 80; ++i) {
        rows.push_back(random_instance(*s, rng));
        labels.push_back(coin(rng));
    }
    CartConfig cfg;
    cfg.criterion = Criterion::Entropy;
    EXPECT_EQ(training_errors(fit_tree(rows, labels, s, cfg), rows, labels), 0u);
}

TEST(Cart, JsonRoundTrip) {
    std::mt19937_64 rng(6);
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1), FeatureSpec::categorical("c", {"a", "b", "c"})}, binary_target());
    std::vector<Instance> rows;
    std::vector<Label> labels;
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < 50; ++i) {
        rows.push_back(random_instance(*s, rng));
        labels.push_back(coin(rng));
    }
    auto t = fit_tree(rows, labels, s);
    auto back = tree_from_json(json::parse(tree_to_json(t).dump()), s);
    EXPECT_EQ(back, t);
    EXPECT_EQ(back.stats(), t.stats());
}

TEST(Cart, RejectsBadInput) {
    auto s = make_schema({FeatureSpec::numeric("x", 0, 1)}, binary_target());
    std::vector<Instance> rows{inst({0.1})};
    std::vector<Label> bad{3};
    EXPECT_THROW(fit_tree(rows, bad, s), ValidationError);
    EXPECT_THROW(fit_tree({}, {}, s), ValidationError);
    std::vector<TreeNode> cyclic(1);
    cyclic[0].leaf = false;
    EXPECT_THROW(ExplainerTree(cyclic, s, Task::Classification), ValidationError);
}
