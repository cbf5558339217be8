#ifndef ARAUCANA_ORACLE_HPP
#define ARAUCANA_ORACLE_HPP

// The black box: a deterministic batch map from instances to labels, plus the
// built-in reference models (random forest, k-NN) and their model files.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "araucana/cart.hpp"
#include "araucana/error.hpp"
#include "araucana/gower.hpp"
#include "araucana/random.hpp"
#include "araucana/tabular.hpp"

namespace araucana {

class PredictionOracle {
public:
    virtual ~PredictionOracle() = default;

    /// One label per row, order preserved. Throws OracleError on failure.
    virtual std::vector<Label> predict_batch(std::span<const Instance> rows) const = 0;
    virtual const Schema& schema() const = 0;
    /// False for backends that only know labels of dataset rows.
    virtual bool can_label_synthetic() const { return true; }
    virtual std::string describe() const = 0;

    Task task() const { return schema().task(); }

    Label predict(const Instance& row) const { return predict_batch(std::span<const Instance>(&row, 1)).front(); }
};

/// Majority vote with ties to the lowest class index.
inline Label majority_label(std::span<const Label> labels, std::size_t n_classes) {
    std::vector<std::size_t> votes(n_classes, 0);
    for (Label l : labels) ++votes.at(static_cast<std::size_t>(l));
    return static_cast<Label>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

// ---------------------------------------------------------------------------
// Random forest

struct ForestConfig {
    std::size_t n_trees = 100;
    bool bootstrap = true;
    /// Features drawn per node; nullopt = ceil(sqrt(feature count)).
    std::optional<std::size_t> max_features;
    std::size_t min_samples_split = 2;
    std::optional<std::size_t> max_depth;
    std::uint64_t seed = 0;
};

class ForestModel {
public:
    ForestModel(SchemaPtr schema, std::vector<ExplainerTree> trees, std::vector<std::uint64_t> seeds,
                std::size_t feature_subsample, bool bootstrap)
        : schema_(std::move(schema)), trees_(std::move(trees)), seeds_(std::move(seeds)),
          feature_subsample_(feature_subsample), bootstrap_(bootstrap) {
        if (trees_.empty()) throw ValidationError("forest without trees");
        for (const auto& t : trees_)
            if (t.schema() != *schema_) throw ValidationError("forest trees do not share one schema");
    }

    const Schema& schema() const { return *schema_; }
    const SchemaPtr& schema_ptr() const { return schema_; }
    const std::vector<ExplainerTree>& trees() const { return trees_; }
    const std::vector<std::uint64_t>& seeds() const { return seeds_; }
    std::size_t feature_subsample() const { return feature_subsample_; }
    bool bootstrap() const { return bootstrap_; }

    Label predict(const Instance& inst) const {
        validate_instance(*schema_, inst);
        if (schema_->task() == Task::Classification) {
            std::vector<std::size_t> votes(schema_->class_count(), 0);
            for (const auto& t : trees_) ++votes[static_cast<std::size_t>(t.node(t.leaf_index(inst)).prediction)];
            return static_cast<Label>(std::max_element(votes.begin(), votes.end()) - votes.begin());
        }
        double sum = 0.0;
        for (const auto& t : trees_) sum += t.node(t.leaf_index(inst)).prediction;
        return sum / static_cast<double>(trees_.size());
    }

private:
    SchemaPtr schema_;
    std::vector<ExplainerTree> trees_;
    std::vector<std::uint64_t> seeds_;
    std::size_t feature_subsample_;
    bool bootstrap_;
};

/// Each tree sees a same-size bootstrap resample (when enabled) and draws
/// `max_features` candidate features per node. Deterministic in cfg.seed.
inline ForestModel train_forest(const Dataset& data, const ForestConfig& cfg = {}) {
    if (!data.has_targets())
        throw DataError("cannot train: dataset has no target column" +
                        (data.schema().target() ? " '" + data.schema().target()->name + "'" : std::string()));
    if (cfg.n_trees == 0) throw ValidationError("n_trees must be positive");
    if (data.size() == 0) throw ValidationError("cannot train on an empty dataset");
    const std::size_t p = data.schema().size();
    const std::size_t m = cfg.max_features
                              ? std::min(*cfg.max_features, p)
                              : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));
    std::vector<ExplainerTree> trees;
    std::vector<std::uint64_t> seeds;
    trees.reserve(cfg.n_trees);
    const auto& rows = data.rows();
    const auto& labels = data.targets();
    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        const std::uint64_t seed = derive_seed(cfg.seed, SeedStream::Forest, t);
        Rng rng(seed);
        std::vector<std::size_t> idx(rows.size());
        if (cfg.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
            for (auto& i : idx) i = pick(rng);
        } else {
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        }
        CartConfig cart;
        cart.min_samples_split = cfg.min_samples_split;
        cart.max_depth = cfg.max_depth;
        cart.seed = rng();
        if (m < p) cart.feature_subsample = m;
        trees.push_back(fit_tree_on(rows, labels, std::move(idx), data.schema_ptr(), cart));
        seeds.push_back(seed);
    }
    return ForestModel(data.schema_ptr(), std::move(trees), std::move(seeds), m, cfg.bootstrap);
}

// ---------------------------------------------------------------------------
// k nearest neighbours

class KnnModel {
public:
    KnnModel(SchemaPtr schema, std::size_t k, DistanceKind metric, std::vector<Instance> rows, std::vector<Label> labels)
        : schema_(std::move(schema)), k_(k), metric_(metric, schema_), rows_(std::move(rows)), labels_(std::move(labels)) {
        if (k_ < 1) throw ValidationError("k must be >= 1");
        if (rows_.empty()) throw ValidationError("k-NN needs at least one training row");
        if (rows_.size() != labels_.size()) throw ValidationError("rows/labels length mismatch");
        for (const auto& r : rows_) validate_instance(*schema_, r);
        schema_->task();
    }

    const Schema& schema() const { return *schema_; }
    const SchemaPtr& schema_ptr() const { return schema_; }
    std::size_t k() const { return k_; }
    DistanceKind metric() const { return metric_.kind(); }
    const std::vector<Instance>& rows() const { return rows_; }
    const std::vector<Label>& labels() const { return labels_; }

    /// Distance ties go to the lower row index; vote ties to the lower class.
    Label predict(const Instance& inst) const {
        validate_instance(*schema_, inst);
        std::vector<std::pair<double, std::size_t>> d;
        d.reserve(rows_.size());
        for (std::size_t i = 0; i < rows_.size(); ++i) d.emplace_back(metric_.unchecked(inst, rows_[i]), i);
        const std::size_t k = std::min(k_, d.size());
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
        std::vector<Label> near;
        for (std::size_t i = 0; i < k; ++i) near.push_back(labels_[d[i].second]);
        if (schema_->task() == Task::Classification) return majority_label(near, schema_->class_count());
        double sum = 0.0;
        for (Label l : near) sum += l;
        return sum / static_cast<double>(k);
    }

private:
    SchemaPtr schema_;
    std::size_t k_;
    DistanceMetric metric_;
    std::vector<Instance> rows_;
    std::vector<Label> labels_;
};

inline KnnModel train_knn(const Dataset& data, std::size_t k = 5, DistanceKind metric = DistanceKind::Gower) {
    if (!data.has_targets())
        throw DataError("cannot train: dataset has no target column" +
                        (data.schema().target() ? " '" + data.schema().target()->name + "'" : std::string()));
    return KnnModel(data.schema_ptr(), k, metric, data.rows(), data.targets());
}

// ---------------------------------------------------------------------------
// Model files

using Model = std::variant<ForestModel, KnnModel>;

inline const Schema& model_schema(const Model& m) {
    return std::visit([](const auto& x) -> const Schema& { return x.schema(); }, m);
}

inline Label model_predict(const Model& m, const Instance& inst) {
    return std::visit([&](const auto& x) { return x.predict(inst); }, m);
}

inline json model_to_json(const Model& model) {
    json j;
    if (const auto* f = std::get_if<ForestModel>(&model)) {
        j["type"] = "forest";
        j["schema"] = schema_to_json(f->schema());
        j["bootstrap"] = f->bootstrap();
        j["feature_subsample"] = f->feature_subsample();
        j["seeds"] = f->seeds();
        json trees = json::array();
        for (const auto& t : f->trees()) trees.push_back(tree_to_json(t));
        j["trees"] = std::move(trees);
    } else {
        const auto& k = std::get<KnnModel>(model);
        j["type"] = "knn";
        j["schema"] = schema_to_json(k.schema());
        j["k"] = k.k();
        j["metric"] = to_string(k.metric());
        json rows = json::array();
        for (const auto& r : k.rows()) rows.push_back(instance_to_json(k.schema(), r));
        j["rows"] = std::move(rows);
        j["labels"] = k.labels();
    }
    return j;
}

inline Model model_from_json(const json& j) {
    try {
        auto schema = std::make_shared<const Schema>(schema_from_json(j.at("schema")));
        const auto type = j.at("type").get<std::string>();
        if (type == "forest") {
            std::vector<ExplainerTree> trees;
            for (const auto& jt : j.at("trees")) trees.push_back(tree_from_json(jt, schema));
            return ForestModel(schema, std::move(trees), j.at("seeds").get<std::vector<std::uint64_t>>(),
                               j.at("feature_subsample").get<std::size_t>(), j.at("bootstrap").get<bool>());
        }
        if (type == "knn") {
            std::vector<Instance> rows;
            for (const auto& jr : j.at("rows")) rows.push_back(instance_from_json(*schema, jr));
            return KnnModel(schema, j.at("k").get<std::size_t>(), parse_distance_kind(j.at("metric").get<std::string>()),
                            std::move(rows), j.at("labels").get<std::vector<Label>>());
        }
        throw DataError("unknown model type '" + type + "'");
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    } catch (const ValidationError& e) {
        throw DataError(std::string("invalid model file: ") + e.what());
    } catch (const UsageError& e) {
        throw DataError(std::string("invalid model file: ") + e.what());
    }
}

inline void save_model(const Model& model, const std::string& path) { write_text_file(path, model_to_json(model).dump() + "\n"); }

inline Model load_model(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw DataError("malformed model file " + path + ": " + e.what());
    }
    return model_from_json(j);
}

// ---------------------------------------------------------------------------
// Backends

/// In-process model. Rejects use against a dataset with a different schema.
class BuiltInOracle final : public PredictionOracle {
public:
    explicit BuiltInOracle(Model model) : model_(std::make_shared<const Model>(std::move(model))) {}
    BuiltInOracle(Model model, const Schema& expected) : BuiltInOracle(std::move(model)) {
        if (model_schema(*model_) != expected)
            throw ValidationError("schema mismatch: model was trained on a different schema than the dataset");
    }

    std::vector<Label> predict_batch(std::span<const Instance> rows) const override {
        std::vector<Label> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(model_predict(*model_, r));
        return out;
    }
    const Schema& schema() const override { return model_schema(*model_); }
    std::string describe() const override {
        return std::holds_alternative<ForestModel>(*model_) ? "builtin:forest" : "builtin:knn";
    }
    const Model& model() const { return *model_; }

private:
    std::shared_ptr<const Model> model_;
};

/// Labels from a prediction column of the original data. Only dataset rows
/// can be labeled.
class PrecomputedOracle final : public PredictionOracle {
public:
    PrecomputedOracle(SchemaPtr schema, std::string column) : schema_(std::move(schema)), column_(std::move(column)) {
        schema_->task();
    }

    /// Registers (row -> prediction) pairs; the first occurrence of a feature vector wins.
    void add(std::span<const Instance> rows, std::span<const Label> predictions) {
        if (rows.size() != predictions.size()) throw ValidationError("rows/predictions length mismatch");
        for (std::size_t i = 0; i < rows.size(); ++i) table_.emplace(rows[i], predictions[i]);
    }

    std::vector<Label> predict_batch(std::span<const Instance> rows) const override {
        std::vector<Label> out;
        out.reserve(rows.size());
        for (const auto& r : rows) {
            auto it = table_.find(r);
            if (it == table_.end())
                throw OracleError("precomputed oracle cannot label synthetic instances (use --smote-policy off)");
            out.push_back(it->second);
        }
        return out;
    }
    const Schema& schema() const override { return *schema_; }
    bool can_label_synthetic() const override { return false; }
    std::string describe() const override { return "precomputed:" + column_; }

private:
    SchemaPtr schema_;
    std::string column_;
    std::unordered_map<Instance, Label, InstanceHash> table_;
};

/// Parses a prediction column of a CSV table into labels under `schema`.
inline std::vector<Label> parse_prediction_column(const CsvTable& table, std::string_view column, const Schema& schema) {
    auto col = table.column(column);
    if (!col) throw DataError("prediction column '" + std::string(column) + "' not found");
    std::vector<Label> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cell = table.rows[r][*col];
        if (schema.task() == Task::Classification) {
            auto idx = schema.target()->class_index(cell);
            if (!idx) throw DataError("unknown class '" + cell + "' in prediction column at row " + std::to_string(r));
            out.push_back(static_cast<Label>(*idx));
        } else {
            auto v = parse_real(cell);
            if (!v) throw DataError("unparseable prediction '" + cell + "' at row " + std::to_string(r));
            out.push_back(*v);
        }
    }
    return out;
}

}  // namespace araucana

#endif
