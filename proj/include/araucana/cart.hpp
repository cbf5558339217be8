#ifndef ARAUCANA_CART_HPP
#define ARAUCANA_CART_HPP

// CART decision trees (classification and regression), grown unpruned by
// default. Numeric splits are `x <= threshold`, categorical splits are
// one-vs-rest `x == category`; the left child takes rows passing the test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "araucana/error.hpp"
#include "araucana/random.hpp"
#include "araucana/tabular.hpp"

namespace araucana {

enum class Criterion { Gini, Entropy, Mse };

inline std::string to_string(Criterion c) {
    switch (c) {
        case Criterion::Gini: return "gini";
        case Criterion::Entropy: return "entropy";
        case Criterion::Mse: return "mse";
    }
    return "?";
}

struct CartConfig {
    /// Gini or Entropy for classification; regression always uses MSE.
    Criterion criterion = Criterion::Gini;
    std::size_t min_samples_split = 2;
    std::optional<std::size_t> max_depth;
    std::uint64_t seed = 0;
    /// Features drawn per node (forest mode). nullopt = all features.
    std::optional<std::size_t> feature_subsample;
};

struct SplitTest {
    enum class Kind { NumericLE, CategoryEq };
    Kind kind = Kind::NumericLE;
    double threshold = 0.0;
    std::size_t category = 0;

    bool passes(const Instance& inst, std::size_t feature) const {
        return kind == Kind::NumericLE ? inst.numeric(feature) <= threshold : inst.category(feature) == category;
    }
    bool operator==(const SplitTest&) const = default;
};

struct RegressionStats {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;
    bool operator==(const RegressionStats&) const = default;
};

struct TreeNode {
    bool leaf = true;
    // Internal
    std::size_t feature = 0;
    SplitTest test;
    std::size_t left = 0;
    std::size_t right = 0;
    // Leaf only; internal nodes keep just the routed sample count
    Label prediction = 0.0;
    std::vector<std::size_t> class_counts;
    RegressionStats stats;
    std::size_t samples = 0;

    bool operator==(const TreeNode&) const = default;
};

struct PathStep {
    std::size_t feature = 0;
    SplitTest test;
    /// True when the instance passed the test (left branch).
    bool passed = true;
};

struct TreeStats {
    std::size_t depth = 0;
    std::size_t leaf_count = 0;
    std::size_t node_count = 0;
    bool operator==(const TreeStats&) const = default;
};

/// Immutable fitted tree; nodes live in a flat array, root at index 0.
class ExplainerTree {
public:
    ExplainerTree(std::vector<TreeNode> nodes, SchemaPtr schema, Task task)
        : nodes_(std::move(nodes)), schema_(std::move(schema)), task_(task) {
        if (nodes_.empty()) throw ValidationError("tree without nodes");
        check(0, 0);
    }

    const TreeNode& root() const { return nodes_.front(); }
    const TreeNode& node(std::size_t i) const { return nodes_.at(i); }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const Schema& schema() const { return *schema_; }
    const SchemaPtr& schema_ptr() const { return schema_; }
    Task task() const { return task_; }
    std::size_t depth() const { return depth_; }
    std::size_t leaf_count() const { return leaf_count_; }
    TreeStats stats() const { return {depth_, leaf_count_, nodes_.size()}; }

    /// Index of the leaf `inst` is routed to. Does not validate.
    std::size_t leaf_index(const Instance& inst) const {
        std::size_t i = 0;
        while (!nodes_[i].leaf) i = nodes_[i].test.passes(inst, nodes_[i].feature) ? nodes_[i].left : nodes_[i].right;
        return i;
    }

    Label predict(const Instance& inst) const {
        validate_instance(*schema_, inst);
        return nodes_[leaf_index(inst)].prediction;
    }

    std::vector<PathStep> decision_path(const Instance& inst) const {
        validate_instance(*schema_, inst);
        std::vector<PathStep> path;
        std::size_t i = 0;
        while (!nodes_[i].leaf) {
            const auto& n = nodes_[i];
            bool pass = n.test.passes(inst, n.feature);
            path.push_back({n.feature, n.test, pass});
            i = pass ? n.left : n.right;
        }
        return path;
    }

    bool operator==(const ExplainerTree& o) const { return nodes_ == o.nodes_ && task_ == o.task_; }

private:
    void check(std::size_t i, std::size_t depth) {
        if (depth > nodes_.size()) throw ValidationError("tree contains a cycle");
        const auto& n = nodes_.at(i);
        if (n.leaf) {
            ++leaf_count_;
            depth_ = std::max(depth_, depth);
            if (task_ == Task::Classification) {
                std::size_t sum = std::accumulate(n.class_counts.begin(), n.class_counts.end(), std::size_t{0});
                if (sum != n.samples) throw ValidationError("leaf class counts do not sum to sample count");
            }
            return;
        }
        if (n.feature >= schema_->size()) throw ValidationError("split on unknown feature");
        const auto& f = schema_->feature(n.feature);
        if (n.test.kind == SplitTest::Kind::NumericLE && !f.is_numeric())
            throw ValidationError("numeric split on categorical feature '" + f.name + "'");
        if (n.test.kind == SplitTest::Kind::CategoryEq && (!f.is_categorical() || n.test.category >= f.categories.size()))
            throw ValidationError("invalid categorical split on feature '" + f.name + "'");
        if (n.left >= nodes_.size() || n.right >= nodes_.size() || n.left <= i || n.right <= i)
            throw ValidationError("invalid child index");
        check(n.left, depth + 1);
        check(n.right, depth + 1);
    }

    std::vector<TreeNode> nodes_;
    SchemaPtr schema_;
    Task task_;
    std::size_t depth_ = 0;
    std::size_t leaf_count_ = 0;
};

inline Label predict_tree(const ExplainerTree& tree, const Instance& inst) { return tree.predict(inst); }
inline std::vector<PathStep> decision_path(const ExplainerTree& tree, const Instance& inst) { return tree.decision_path(inst); }
inline TreeStats tree_stats(const ExplainerTree& tree) { return tree.stats(); }

/// Gini impurity 1 - sum p_k^2 of class counts.
inline double gini_impurity(std::span<const std::size_t> counts) {
    double n = 0, sq = 0;
    for (auto c : counts) {
        n += static_cast<double>(c);
        sq += static_cast<double>(c) * static_cast<double>(c);
    }
    return n > 0 ? 1.0 - sq / (n * n) : 0.0;
}

namespace detail {

class TreeBuilder {
public:
    TreeBuilder(std::span<const Instance> rows, std::span<const Label> labels, const Schema& schema,
                const CartConfig& cfg, Task task, std::size_t n_classes)
        : rows_(rows), labels_(labels), schema_(schema), cfg_(cfg), task_(task), n_classes_(n_classes),
          rng_(cfg.seed) {}

    std::vector<TreeNode> build(std::vector<std::size_t> indices) {
        grow(std::move(indices), 0);
        return std::move(nodes_);
    }

private:
    struct Candidate {
        double gain = -std::numeric_limits<double>::infinity();
        std::size_t feature = 0;
        SplitTest test;
        bool valid = false;
    };

    // Node score: larger is purer. The impurity decrease of a split is
    // score(left) + score(right) - score(parent).
    double score_counts(std::span<const std::size_t> counts, std::size_t n) const {
        if (n == 0) return 0.0;
        const double dn = static_cast<double>(n);
        if (cfg_.criterion == Criterion::Entropy) {
            double s = 0.0;  // -n * H
            for (auto c : counts)
                if (c) s += static_cast<double>(c) * std::log(static_cast<double>(c) / dn);
            return s;
        }
        double sq = 0.0;  // n - n * gini
        for (auto c : counts) sq += static_cast<double>(c) * static_cast<double>(c);
        return sq / dn;
    }
    static double score_sum(double sum, std::size_t n) { return n ? sum * sum / static_cast<double>(n) : 0.0; }

    bool better(const Candidate& best, double gain) const {
        return !best.valid || gain > best.gain + 1e-12 * std::max(1.0, std::abs(best.gain));
    }

    std::size_t cls(std::size_t row) const { return static_cast<std::size_t>(labels_[row]); }

    /// Returns true when the feature admits at least one non-trivial split.
    bool scan_feature(std::size_t f, std::span<const std::size_t> idx, double parent_score, Candidate& best) {
        const auto& spec = schema_.feature(f);
        const std::size_t n = idx.size();
        bool any = false;
        if (spec.is_numeric()) {
            std::vector<std::pair<double, std::size_t>> order;
            order.reserve(n);
            for (std::size_t r : idx) order.emplace_back(rows_[r].numeric(f), r);
            std::sort(order.begin(), order.end());
            if (order.front().first == order.back().first) return false;
            std::vector<std::size_t> left(n_classes_, 0), right(n_classes_, 0);
            double lsum = 0.0, rsum = 0.0;
            if (task_ == Task::Classification) {
                for (auto& [v, r] : order) ++right[cls(r)];
            } else {
                for (auto& [v, r] : order) rsum += labels_[r];
            }
            for (std::size_t i = 0; i + 1 < n; ++i) {
                std::size_t r = order[i].second;
                if (task_ == Task::Classification) {
                    ++left[cls(r)];
                    --right[cls(r)];
                } else {
                    lsum += labels_[r];
                    rsum -= labels_[r];
                }
                double lo = order[i].first, hi = order[i + 1].first;
                if (lo == hi) continue;
                any = true;
                std::size_t nl = i + 1, nr = n - nl;
                double gain = task_ == Task::Classification
                                  ? score_counts(left, nl) + score_counts(right, nr) - parent_score
                                  : score_sum(lsum, nl) + score_sum(rsum, nr) - parent_score;
                if (better(best, gain)) {
                    double t = lo + (hi - lo) / 2.0;
                    if (t >= hi || t < lo) t = lo;
                    best = {gain, f, {SplitTest::Kind::NumericLE, t, 0}, true};
                }
            }
        } else {
            const std::size_t levels = spec.categories.size();
            std::vector<std::size_t> level_n(levels, 0);
            std::vector<std::vector<std::size_t>> level_counts;
            std::vector<double> level_sum(levels, 0.0);
            std::vector<std::size_t> total(n_classes_, 0);
            double total_sum = 0.0;
            if (task_ == Task::Classification) level_counts.assign(levels, std::vector<std::size_t>(n_classes_, 0));
            for (std::size_t r : idx) {
                std::size_t c = rows_[r].category(f);
                ++level_n[c];
                if (task_ == Task::Classification) {
                    ++level_counts[c][cls(r)];
                    ++total[cls(r)];
                } else {
                    level_sum[c] += labels_[r];
                    total_sum += labels_[r];
                }
            }
            std::vector<std::size_t> rest(n_classes_, 0);
            for (std::size_t c = 0; c < levels; ++c) {
                if (level_n[c] == 0 || level_n[c] == n) continue;
                any = true;
                std::size_t nl = level_n[c], nr = n - nl;
                double gain;
                if (task_ == Task::Classification) {
                    for (std::size_t k = 0; k < n_classes_; ++k) rest[k] = total[k] - level_counts[c][k];
                    gain = score_counts(level_counts[c], nl) + score_counts(rest, nr) - parent_score;
                } else {
                    gain = score_sum(level_sum[c], nl) + score_sum(total_sum - level_sum[c], nr) - parent_score;
                }
                if (better(best, gain)) best = {gain, f, {SplitTest::Kind::CategoryEq, 0.0, c}, true};
            }
        }
        return any;
    }

    std::size_t grow(std::vector<std::size_t> idx, std::size_t depth) {
        const std::size_t id = nodes_.size();
        nodes_.emplace_back();
        TreeNode node;
        node.samples = idx.size();
        bool pure;
        double parent_score;
        if (task_ == Task::Classification) {
            node.class_counts.assign(n_classes_, 0);
            for (std::size_t r : idx) ++node.class_counts[cls(r)];
            auto best = std::max_element(node.class_counts.begin(), node.class_counts.end());
            node.prediction = static_cast<Label>(best - node.class_counts.begin());
            pure = *best == idx.size();
            parent_score = score_counts(node.class_counts, idx.size());
        } else {
            double sum = 0.0;
            pure = true;
            for (std::size_t r : idx) {
                sum += labels_[r];
                pure = pure && labels_[r] == labels_[idx.front()];
            }
            const double mean = sum / static_cast<double>(idx.size());
            double var = 0.0;
            for (std::size_t r : idx) var += (labels_[r] - mean) * (labels_[r] - mean);
            node.stats = {idx.size(), pure ? labels_[idx.front()] : mean, pure ? 0.0 : var / static_cast<double>(idx.size())};
            node.prediction = node.stats.mean;
            parent_score = score_sum(sum, idx.size());
        }

        const bool stop = pure || idx.size() < cfg_.min_samples_split || (cfg_.max_depth && depth >= *cfg_.max_depth);
        Candidate best;
        if (!stop) {
            std::vector<std::size_t> order(schema_.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::size_t budget = order.size();
            if (cfg_.feature_subsample && *cfg_.feature_subsample < order.size()) {
                std::shuffle(order.begin(), order.end(), rng_);
                budget = std::max<std::size_t>(1, *cfg_.feature_subsample);
            }
            // Visit features until `budget` splittable ones have been scanned.
            std::size_t visited = 0;
            for (std::size_t f : order) {
                if (visited >= budget) break;
                if (scan_feature(f, idx, parent_score, best)) ++visited;
            }
        }
        if (!best.valid) {
            nodes_[id] = std::move(node);
            return id;
        }

        std::vector<std::size_t> left, right;
        for (std::size_t r : idx) (best.test.passes(rows_[r], best.feature) ? left : right).push_back(r);
        idx.clear();
        idx.shrink_to_fit();
        node.leaf = false;
        node.feature = best.feature;
        node.test = best.test;
        node.prediction = 0.0;
        node.class_counts.clear();
        node.stats = {};
        nodes_[id] = node;
        std::size_t l = grow(std::move(left), depth + 1);
        std::size_t r = grow(std::move(right), depth + 1);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    std::span<const Instance> rows_;
    std::span<const Label> labels_;
    const Schema& schema_;
    const CartConfig& cfg_;
    Task task_;
    std::size_t n_classes_;
    Rng rng_;
    std::vector<TreeNode> nodes_;
};

inline void check_labels(const Schema& schema, std::span<const Label> labels) {
    if (!schema.target()) throw ValidationError("schema has no target; cannot infer the task");
    if (schema.task() == Task::Classification) {
        for (Label l : labels)
            if (!(l >= 0) || l != std::floor(l) || l >= static_cast<double>(schema.class_count()))
                throw ValidationError("label " + format_real(l) + " is not a class index");
    } else {
        for (Label l : labels)
            if (!std::isfinite(l)) throw ValidationError("non-finite regression target");
    }
}

}  // namespace detail

/// Fits a tree on rows[indices] (indices may repeat, e.g. a bootstrap sample).
/// The task comes from the schema target.
///
/// Any non-trivial split is admissible at an impure node, including one with
/// zero impurity decrease (needed for XOR-like structure); the split with the
/// largest decrease wins, ties going to the first feature visited and then the
/// lowest threshold or category index. With the default config the tree
/// reaches zero training error unless identical feature vectors carry
/// different labels.
inline ExplainerTree fit_tree_on(std::span<const Instance> rows, std::span<const Label> labels,
                                 std::vector<std::size_t> indices, SchemaPtr schema, const CartConfig& cfg = {}) {
    if (!schema) throw ValidationError("fit_tree without schema");
    if (rows.size() != labels.size()) throw ValidationError("label/row length mismatch");
    if (indices.empty()) throw ValidationError("cannot fit a tree on zero rows");
    if (cfg.min_samples_split < 2) throw ValidationError("min_samples_split must be >= 2");
    for (std::size_t i : indices)
        if (i >= rows.size()) throw ValidationError("row index out of range");
    for (const auto& r : rows) validate_instance(*schema, r);
    detail::check_labels(*schema, labels);

    const Task task = schema->task();
    CartConfig effective = cfg;
    if (task == Task::Regression) effective.criterion = Criterion::Mse;
    else if (effective.criterion == Criterion::Mse) effective.criterion = Criterion::Gini;
    detail::TreeBuilder builder(rows, labels, *schema, effective, task, schema->class_count());
    auto nodes = builder.build(std::move(indices));
    return ExplainerTree(std::move(nodes), std::move(schema), task);
}

inline ExplainerTree fit_tree(std::span<const Instance> rows, std::span<const Label> labels, SchemaPtr schema,
                              const CartConfig& cfg = {}) {
    if (rows.empty()) throw ValidationError("cannot fit a tree on zero rows");
    std::vector<std::size_t> all(rows.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return fit_tree_on(rows, labels, std::move(all), std::move(schema), cfg);
}

// ---------------------------------------------------------------------------
// JSON: nested {feature, test: {kind, threshold|category}, left, right} |
// {leaf: {prediction, counts|stats}}

namespace detail {

inline json node_to_json(const ExplainerTree& tree, std::size_t i) {
    const auto& n = tree.node(i);
    json j;
    if (n.leaf) {
        json leaf;
        leaf["prediction"] = n.prediction;
        if (tree.task() == Task::Classification) {
            leaf["counts"] = n.class_counts;
        } else {
            leaf["stats"] = {{"count", n.stats.count}, {"mean", n.stats.mean}, {"variance", n.stats.variance}};
        }
        j["leaf"] = std::move(leaf);
        return j;
    }
    j["feature"] = n.feature;
    if (n.test.kind == SplitTest::Kind::NumericLE)
        j["test"] = {{"kind", "le"}, {"threshold", n.test.threshold}};
    else
        j["test"] = {{"kind", "eq"}, {"category", n.test.category}};
    j["left"] = node_to_json(tree, n.left);
    j["right"] = node_to_json(tree, n.right);
    return j;
}

inline std::size_t node_from_json(const json& j, Task task, std::vector<TreeNode>& nodes) {
    const std::size_t id = nodes.size();
    nodes.emplace_back();
    TreeNode n;
    if (j.contains("leaf")) {
        const auto& leaf = j.at("leaf");
        n.prediction = leaf.at("prediction").get<double>();
        if (task == Task::Classification) {
            n.class_counts = leaf.at("counts").get<std::vector<std::size_t>>();
            n.samples = std::accumulate(n.class_counts.begin(), n.class_counts.end(), std::size_t{0});
        } else {
            const auto& s = leaf.at("stats");
            n.stats = {s.at("count").get<std::size_t>(), s.at("mean").get<double>(), s.at("variance").get<double>()};
            n.samples = n.stats.count;
        }
        nodes[id] = std::move(n);
        return id;
    }
    n.leaf = false;
    n.feature = j.at("feature").get<std::size_t>();
    const auto& t = j.at("test");
    const auto kind = t.at("kind").get<std::string>();
    if (kind == "le") n.test = {SplitTest::Kind::NumericLE, t.at("threshold").get<double>(), 0};
    else if (kind == "eq") n.test = {SplitTest::Kind::CategoryEq, 0.0, t.at("category").get<std::size_t>()};
    else throw DataError("unknown split kind '" + kind + "'");
    nodes[id] = n;
    std::size_t l = node_from_json(j.at("left"), task, nodes);
    std::size_t r = node_from_json(j.at("right"), task, nodes);
    nodes[id].left = l;
    nodes[id].right = r;
    nodes[id].samples = nodes[l].samples + nodes[r].samples;
    return id;
}

}  // namespace detail

inline json tree_to_json(const ExplainerTree& tree) { return detail::node_to_json(tree, 0); }

inline ExplainerTree tree_from_json(const json& j, SchemaPtr schema) {
    try {
        const Task task = schema->task();
        std::vector<TreeNode> nodes;
        detail::node_from_json(j, task, nodes);
        return ExplainerTree(std::move(nodes), std::move(schema), task);
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed tree: ") + e.what());
    } catch (const ValidationError& e) {
        throw DataError(std::string("invalid tree: ") + e.what());
    }
}

}  // namespace araucana

#endif
