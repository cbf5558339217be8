#ifndef ARAUCANA_EXPLAIN_HPP
#define ARAUCANA_EXPLAIN_HPP

// Local tree-based explanations. For a query x and a black box f:
//   1. distances from x to every training row (Gower by default)
//   2. keep the N nearest rows
//   3. relabel them with f
//   4. oversample the relabeled neighborhood with SMOTE-NC, relabel the
//      synthetic rows with f
//   5. fit an unpruned CART tree on neighborhood + x + synthetic rows
//   6. read the IF-THEN rule off x's root-to-leaf path

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "araucana/cart.hpp"
#include "araucana/error.hpp"
#include "araucana/gower.hpp"
#include "araucana/oracle.hpp"
#include "araucana/random.hpp"
#include "araucana/smote.hpp"
#include "araucana/tabular.hpp"

namespace araucana {

struct ExplainConfig {
    std::size_t n_neighbors = 100;
    DistanceKind distance = DistanceKind::Gower;
    /// nullopt = SMOTE off. Its seed is replaced by one derived from `seed`.
    std::optional<SmoteConfig> smote = SmoteConfig{};
    CartConfig cart;
    std::uint64_t seed = 0;
    /// Regression agreement: |tree - oracle| <= rel * |oracle| + abs.
    double regression_rel_eps = 1e-6;
    double regression_abs_eps = 1e-9;
};

inline bool labels_agree(Task task, Label a, Label oracle, const ExplainConfig& cfg) {
    if (task == Task::Classification) return a == oracle;
    return std::abs(a - oracle) <= cfg.regression_rel_eps * std::abs(oracle) + cfg.regression_abs_eps;
}

struct Neighborhood {
    std::vector<std::size_t> indices;
    std::vector<double> distances;
    std::vector<Label> relabels;
};

enum class Provenance { Original, Query, Synthetic };

struct ExplainerSet {
    std::vector<Instance> rows;
    std::vector<Label> labels;
    std::vector<Provenance> provenance;
};

struct Condition {
    enum class Op { LE, GT, EQ, NE };
    std::size_t feature = 0;
    Op op = Op::LE;
    double threshold = 0.0;    // LE / GT
    std::size_t category = 0;  // EQ / NE

    bool holds(const Instance& inst) const {
        switch (op) {
            case Op::LE: return inst.numeric(feature) <= threshold;
            case Op::GT: return inst.numeric(feature) > threshold;
            case Op::EQ: return inst.category(feature) == category;
            case Op::NE: return inst.category(feature) != category;
        }
        return false;
    }
    bool operator==(const Condition&) const = default;
};

inline std::string to_string(Condition::Op op) {
    switch (op) {
        case Condition::Op::LE: return "<=";
        case Condition::Op::GT: return ">";
        case Condition::Op::EQ: return "==";
        case Condition::Op::NE: return "!=";
    }
    return "?";
}

struct Rule {
    std::vector<Condition> conditions;
    Label prediction = 0.0;
    std::size_t support = 0;
    double purity = 0.0;

    bool matches(const Instance& inst) const {
        return std::all_of(conditions.begin(), conditions.end(), [&](const auto& c) { return c.holds(inst); });
    }
    bool operator==(const Rule&) const = default;
};

struct NeighborhoodSummary {
    std::size_t size = 0;
    double max_distance = 0.0;
    double mean_distance = 0.0;
    std::size_t synthetic = 0;
    std::size_t explainer_set_size = 0;
    bool operator==(const NeighborhoodSummary&) const = default;
};

struct Explanation {
    SchemaPtr schema;
    Instance query;
    Label oracle_label = 0.0;
    Label tree_prediction = 0.0;
    Rule rule;
    ExplainerTree tree;
    TreeStats tree_stats;
    bool faithful = false;
    NeighborhoodSummary neighborhood;
    json config;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;

    bool operator==(const Explanation& o) const {
        return *schema == *o.schema && query == o.query && oracle_label == o.oracle_label &&
               tree_prediction == o.tree_prediction && rule == o.rule && tree == o.tree && tree_stats == o.tree_stats &&
               faithful == o.faithful && neighborhood == o.neighborhood && config == o.config && seed == o.seed &&
               warnings == o.warnings;
    }
};

// ---------------------------------------------------------------------------

namespace detail {

inline void check_oracle(const Dataset& train, const PredictionOracle& oracle) {
    if (!train.schema().target()) throw ValidationError("training schema has no target");
    if (oracle.schema() != train.schema()) throw ValidationError("oracle schema differs from the training schema");
}

}  // namespace detail

/// The N training rows nearest to x (distance ties to the lower row index),
/// relabeled by the oracle. N is clamped to the training size.
inline Neighborhood select_neighborhood(const Dataset& train, const Instance& x, const PredictionOracle& oracle,
                                        const ExplainConfig& cfg, std::vector<std::string>* warnings = nullptr) {
    validate_instance(train.schema(), x);
    if (cfg.n_neighbors == 0) throw ValidationError("n_neighbors must be >= 1");
    if (train.size() == 0) throw ValidationError("empty training set");
    std::size_t n = cfg.n_neighbors;
    if (n > train.size()) {
        if (warnings)
            warnings->push_back("n_neighbors " + std::to_string(n) + " clamped to training size " + std::to_string(train.size()));
        n = train.size();
    }
    const DistanceMetric metric(cfg.distance, train.schema_ptr());
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) d.emplace_back(metric.unchecked(x, train.row(i)), i);
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(n), d.end());

    Neighborhood nbh;
    std::vector<Instance> rows;
    for (std::size_t i = 0; i < n; ++i) {
        nbh.indices.push_back(d[i].second);
        nbh.distances.push_back(d[i].first);
        rows.push_back(train.row(d[i].second));
    }
    nbh.relabels = oracle.predict_batch(rows);
    if (nbh.relabels.size() != rows.size()) throw OracleError("oracle returned a wrong number of predictions");
    return nbh;
}

/// Neighborhood rows with their relabels, then x with its oracle label, then
/// SMOTE-NC rows relabeled by the oracle.
inline ExplainerSet build_explainer_set(const Dataset& train, const Neighborhood& nbh, const Instance& x,
                                        const PredictionOracle& oracle, const std::optional<SmoteConfig>& smote,
                                        std::vector<std::string>* warnings = nullptr) {
    const Schema& schema = train.schema();
    validate_instance(schema, x);
    if (smote && schema.task() != Task::Classification)
        throw ValidationError("SMOTE-NC is only defined for classification; use smote off for regression");
    if (smote && !oracle.can_label_synthetic())
        throw OracleError("precomputed oracle cannot label synthetic instances (use --smote-policy off)");

    ExplainerSet set;
    for (std::size_t i = 0; i < nbh.indices.size(); ++i) {
        set.rows.push_back(train.row(nbh.indices[i]));
        set.labels.push_back(nbh.relabels[i]);
        set.provenance.push_back(Provenance::Original);
    }
    set.rows.push_back(x);
    set.labels.push_back(oracle.predict(x));
    set.provenance.push_back(Provenance::Query);

    if (smote) {
        std::span<const Instance> nrows(set.rows.data(), nbh.indices.size());
        std::span<const Label> nlabels(set.labels.data(), nbh.indices.size());
        SmoteResult synth = smote_nc(nrows, nlabels, schema, *smote);
        if (warnings) warnings->insert(warnings->end(), synth.warnings.begin(), synth.warnings.end());
        if (!synth.rows.empty()) {
            auto relabels = oracle.predict_batch(synth.rows);
            if (relabels.size() != synth.rows.size()) throw OracleError("oracle returned a wrong number of predictions");
            for (std::size_t i = 0; i < synth.rows.size(); ++i) {
                set.rows.push_back(std::move(synth.rows[i]));
                set.labels.push_back(relabels[i]);
                set.provenance.push_back(Provenance::Synthetic);
            }
        }
    }
    return set;
}

/// Converts a root-to-leaf path into a rule. Numeric tests on one feature
/// collapse into the tightest interval; an equality test on a categorical
/// feature makes inequality tests on that feature redundant. Conditions keep
/// the order in which their feature first appears on the path.
inline std::vector<Condition> path_to_conditions(std::span<const PathStep> path) {
    struct Slot {
        std::size_t feature;
        bool numeric;
        std::optional<double> lower, upper;
        std::optional<std::size_t> equal;
        std::vector<std::size_t> not_equal;
    };
    std::vector<Slot> slots;
    for (const auto& step : path) {
        const bool numeric = step.test.kind == SplitTest::Kind::NumericLE;
        auto it = std::find_if(slots.begin(), slots.end(), [&](const Slot& s) { return s.feature == step.feature; });
        if (it == slots.end()) {
            slots.push_back({step.feature, numeric, {}, {}, {}, {}});
            it = slots.end() - 1;
        }
        if (numeric) {
            if (step.passed) it->upper = it->upper ? std::min(*it->upper, step.test.threshold) : step.test.threshold;
            else it->lower = it->lower ? std::max(*it->lower, step.test.threshold) : step.test.threshold;
        } else if (step.passed) {
            it->equal = step.test.category;
        } else {
            it->not_equal.push_back(step.test.category);
        }
    }
    std::vector<Condition> out;
    for (const auto& s : slots) {
        if (s.numeric) {
            if (s.lower) out.push_back({s.feature, Condition::Op::GT, *s.lower, 0});
            if (s.upper) out.push_back({s.feature, Condition::Op::LE, *s.upper, 0});
        } else if (s.equal) {
            out.push_back({s.feature, Condition::Op::EQ, 0.0, *s.equal});
        } else {
            for (std::size_t c : s.not_equal) out.push_back({s.feature, Condition::Op::NE, 0.0, c});
        }
    }
    return out;
}

namespace detail {

inline json config_echo(const ExplainConfig& cfg, std::size_t effective_n, bool smote_on, Task task) {
    json c;
    c["n_neighbors"] = effective_n;
    c["distance"] = to_string(cfg.distance);
    if (smote_on) {
        c["smote"] = {{"algorithm", "smote-nc"},
                      {"policy", cfg.smote->policy == SmotePolicy::BalanceToMajority ? "balance" : "fixed"},
                      {"k_neighbors", cfg.smote->k_neighbors}};
        if (cfg.smote->policy == SmotePolicy::FixedTotal) c["smote"]["total"] = cfg.smote->fixed_total;
    } else {
        c["smote"] = task == Task::Regression && cfg.smote ? "off (regression)" : "off";
    }
    const auto criterion = task == Task::Regression ? Criterion::Mse
                           : cfg.cart.criterion == Criterion::Mse ? Criterion::Gini : cfg.cart.criterion;
    c["cart"] = {{"criterion", to_string(criterion)},
                 {"min_samples_split", cfg.cart.min_samples_split},
                 {"max_depth", cfg.cart.max_depth ? json(*cfg.cart.max_depth) : json(nullptr)},
                 {"pruned", cfg.cart.max_depth.has_value() || cfg.cart.min_samples_split > 2}};
    c["task"] = task == Task::Classification ? "classification" : "regression";
    if (task == Task::Regression)
        c["regression_epsilon"] = {{"relative", cfg.regression_rel_eps}, {"absolute", cfg.regression_abs_eps}};
    return c;
}

}  // namespace detail

/// Runs steps 4-6 on an already selected neighborhood.
inline Explanation explain_with_neighborhood(const Dataset& train, const Instance& x, const PredictionOracle& oracle,
                                             const Neighborhood& nbh, const ExplainConfig& cfg,
                                             std::vector<std::string> warnings = {}) {
    detail::check_oracle(train, oracle);
    const Task task = train.schema().task();
    std::optional<SmoteConfig> smote = task == Task::Classification ? cfg.smote : std::nullopt;
    if (smote) smote->seed = derive_seed(cfg.seed, SeedStream::Smote);

    ExplainerSet set = build_explainer_set(train, nbh, x, oracle, smote, &warnings);
    const Label oracle_label = set.labels[nbh.indices.size()];
    CartConfig cart = cfg.cart;
    cart.seed = cfg.seed;
    ExplainerTree tree = fit_tree(set.rows, set.labels, train.schema_ptr(), cart);

    const auto path = tree.decision_path(x);
    const std::size_t leaf = tree.leaf_index(x);
    Rule rule;
    rule.conditions = path_to_conditions(path);
    rule.prediction = tree.node(leaf).prediction;
    std::size_t pure = 0;
    for (std::size_t i = 0; i < set.rows.size(); ++i) {
        if (!rule.matches(set.rows[i])) continue;
        ++rule.support;
        if (labels_agree(task, set.labels[i], rule.prediction, cfg)) ++pure;
    }
    rule.purity = rule.support ? static_cast<double>(pure) / static_cast<double>(rule.support) : 0.0;

    NeighborhoodSummary summary;
    summary.size = nbh.indices.size();
    if (!nbh.distances.empty()) {
        summary.max_distance = *std::max_element(nbh.distances.begin(), nbh.distances.end());
        summary.mean_distance =
            std::accumulate(nbh.distances.begin(), nbh.distances.end(), 0.0) / static_cast<double>(nbh.distances.size());
    }
    summary.synthetic = static_cast<std::size_t>(std::count(set.provenance.begin(), set.provenance.end(), Provenance::Synthetic));
    summary.explainer_set_size = set.rows.size();

    const Label tree_prediction = rule.prediction;
    const TreeStats stats = tree.stats();
    return Explanation{train.schema_ptr(),
                       x,
                       oracle_label,
                       tree_prediction,
                       std::move(rule),
                       std::move(tree),
                       stats,
                       labels_agree(task, tree_prediction, oracle_label, cfg),
                       summary,
                       detail::config_echo(cfg, nbh.indices.size(), smote.has_value(), task),
                       cfg.seed,
                       std::move(warnings)};
}

/// The full pipeline. Deterministic for a fixed cfg.seed.
inline Explanation explain_instance(const Dataset& train, const Instance& x, const PredictionOracle& oracle,
                                    const ExplainConfig& cfg = {}) {
    detail::check_oracle(train, oracle);
    std::vector<std::string> warnings;
    Neighborhood nbh = select_neighborhood(train, x, oracle, cfg, &warnings);
    return explain_with_neighborhood(train, x, oracle, nbh, cfg, std::move(warnings));
}

// ---------------------------------------------------------------------------
// Rendering

enum class RenderFormat { Text, Json };

inline json condition_value(const Schema& schema, const Condition& c) {
    if (c.op == Condition::Op::LE || c.op == Condition::Op::GT) return c.threshold;
    return schema.feature(c.feature).categories.at(c.category);
}

inline json explanation_to_json(const Explanation& e) {
    const Schema& s = *e.schema;
    json conds = json::array();
    for (const auto& c : e.rule.conditions)
        conds.push_back({{"feature", s.feature(c.feature).name}, {"op", to_string(c.op)}, {"value", condition_value(s, c)}});
    json j;
    j["query"] = instance_to_json(s, e.query);
    j["oracle_label"] = label_to_json(s, e.oracle_label);
    j["tree_prediction"] = label_to_json(s, e.tree_prediction);
    j["rule"] = {{"conditions", std::move(conds)},
                 {"prediction", label_to_json(s, e.rule.prediction)},
                 {"support", e.rule.support},
                 {"purity", e.rule.purity}};
    j["tree"] = tree_to_json(e.tree);
    j["tree_stats"] = {{"depth", e.tree_stats.depth}, {"leaf_count", e.tree_stats.leaf_count}, {"node_count", e.tree_stats.node_count}};
    j["faithful"] = e.faithful;
    j["neighborhood"] = {{"size", e.neighborhood.size},
                         {"max_distance", e.neighborhood.max_distance},
                         {"mean_distance", e.neighborhood.mean_distance},
                         {"synthetic", e.neighborhood.synthetic},
                         {"explainer_set_size", e.neighborhood.explainer_set_size}};
    j["config"] = e.config;
    j["seed"] = e.seed;
    j["warnings"] = e.warnings;
    return j;
}

inline Explanation explanation_from_json(const json& j, SchemaPtr schema) {
    try {
        const Schema& s = *schema;
        Rule rule;
        for (const auto& jc : j.at("rule").at("conditions")) {
            Condition c;
            auto f = s.feature_index(jc.at("feature").get<std::string>());
            if (!f) throw DataError("unknown feature in rule condition");
            c.feature = *f;
            const auto op = jc.at("op").get<std::string>();
            if (op == "<=") c.op = Condition::Op::LE;
            else if (op == ">") c.op = Condition::Op::GT;
            else if (op == "==") c.op = Condition::Op::EQ;
            else if (op == "!=") c.op = Condition::Op::NE;
            else throw DataError("unknown condition operator '" + op + "'");
            if (c.op == Condition::Op::LE || c.op == Condition::Op::GT) {
                c.threshold = jc.at("value").get<double>();
            } else {
                auto idx = s.feature(c.feature).category_index(jc.at("value").get<std::string>());
                if (!idx) throw DataError("unknown category in rule condition");
                c.category = *idx;
            }
            rule.conditions.push_back(c);
        }
        rule.prediction = label_from_json(s, j.at("rule").at("prediction"));
        rule.support = j.at("rule").at("support").get<std::size_t>();
        rule.purity = j.at("rule").at("purity").get<double>();
        const auto& ts = j.at("tree_stats");
        const auto& nb = j.at("neighborhood");
        return Explanation{schema,
                           instance_from_json(s, j.at("query")),
                           label_from_json(s, j.at("oracle_label")),
                           label_from_json(s, j.at("tree_prediction")),
                           std::move(rule),
                           tree_from_json(j.at("tree"), schema),
                           {ts.at("depth").get<std::size_t>(), ts.at("leaf_count").get<std::size_t>(),
                            ts.at("node_count").get<std::size_t>()},
                           j.at("faithful").get<bool>(),
                           {nb.at("size").get<std::size_t>(), nb.at("max_distance").get<double>(),
                            nb.at("mean_distance").get<double>(), nb.at("synthetic").get<std::size_t>(),
                            nb.at("explainer_set_size").get<std::size_t>()},
                           j.at("config"),
                           j.at("seed").get<std::uint64_t>(),
                           j.at("warnings").get<std::vector<std::string>>()};
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed explanation: ") + e.what());
    }
}

/// Thresholds print with 10 significant digits; the JSON form keeps them exact.
inline std::string render_condition(const Schema& s, const Condition& c) {
    const auto& f = s.feature(c.feature);
    std::string v;
    if (c.op == Condition::Op::LE || c.op == Condition::Op::GT) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", c.threshold);
        v = buf;
    } else {
        v = f.categories.at(c.category);
    }
    return f.name + " " + to_string(c.op) + " " + v;
}

inline std::string render_explanation(const Explanation& e, RenderFormat format) {
    if (format == RenderFormat::Json) return explanation_to_json(e).dump(2) + "\n";
    const Schema& s = *e.schema;
    std::string out = "IF ";
    if (e.rule.conditions.empty()) {
        out += "(always)";
    } else {
        for (std::size_t i = 0; i < e.rule.conditions.size(); ++i) {
            if (i) out += " AND ";
            out += render_condition(s, e.rule.conditions[i]);
        }
    }
    char purity[32];
    std::snprintf(purity, sizeof purity, "%.3f", e.rule.purity);
    out += " THEN " + label_to_string(s, e.rule.prediction) + " (support=" + std::to_string(e.rule.support) +
           ", purity=" + purity + ", faithful=" + (e.faithful ? "true" : "false") + ")\n";
    out += "oracle: " + label_to_string(s, e.oracle_label) + "\n";
    out += "tree: depth=" + std::to_string(e.tree_stats.depth) + " leaves=" + std::to_string(e.tree_stats.leaf_count) +
           " nodes=" + std::to_string(e.tree_stats.node_count) + "\n";
    out += "explainer set: " + std::to_string(e.neighborhood.size) + " neighbors + query + " +
           std::to_string(e.neighborhood.synthetic) + " synthetic\n";
    out += "config: " + e.config.dump() + "\n";
    for (const auto& w : e.warnings) out += "warning: " + w + "\n";
    return out;
}

}  // namespace araucana

#endif
