#ifndef ARAUCANA_SYNTH_HPP
#define ARAUCANA_SYNTH_HPP

// Seeded synthetic data generators for desk-scale experiments.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "araucana/error.hpp"
#include "araucana/random.hpp"
#include "araucana/tabular.hpp"

namespace araucana {

struct SynthSpec {
    /// One of xor_mixed, moons2d, imbalanced_mixed.
    std::string generator;
    std::size_t rows = 0;
    /// Fraction of rows in class "1". Defaults: 0.14 for imbalanced_mixed,
    /// 0.5 for moons2d; xor_mixed labels are a function of the features.
    std::optional<double> minority_fraction;
    std::size_t numeric_features = 2;
    std::size_t categorical_features = 2;
    /// Regression replaces the class label by a smooth non-linear score.
    Task task = Task::Classification;
};

inline const std::vector<std::string>& synth_generators() {
    static const std::vector<std::string> names{"xor_mixed", "moons2d", "imbalanced_mixed"};
    return names;
}

namespace detail {

inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

struct RawRow {
    std::vector<double> numerics;
    std::vector<std::size_t> categories;
    int label = 0;
};

inline std::size_t category_levels(const std::string& gen) { return gen == "imbalanced_mixed" ? 3 : 2; }

inline RawRow draw_row(const SynthSpec& spec, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t levels = category_levels(spec.generator);
    std::uniform_int_distribution<std::size_t> any_level(0, levels - 1);
    RawRow row;
    row.numerics.resize(spec.numeric_features);
    row.categories.resize(spec.categorical_features);

    if (spec.generator == "xor_mixed") {
        for (auto& x : row.numerics) x = round6(unit(rng));
        for (auto& c : row.categories) c = any_level(rng);
        // XOR operands: two numerics (thresholded at 0.5) when available,
        // else one numeric and one categorical, else two categoricals.
        std::vector<int> bits;
        for (std::size_t j = 0; j < row.numerics.size() && bits.size() < 2; ++j) bits.push_back(row.numerics[j] > 0.5);
        for (std::size_t j = 0; j < row.categories.size() && bits.size() < 2; ++j) bits.push_back(row.categories[j] == 1);
        row.label = bits[0] ^ bits[1];
    } else if (spec.generator == "moons2d") {
        std::bernoulli_distribution pick(spec.minority_fraction.value_or(0.5));
        row.label = pick(rng) ? 1 : 0;
        double t = unit(rng) * std::numbers::pi;
        double x = row.label ? 1.0 - std::cos(t) : std::cos(t);
        double y = row.label ? 0.5 - std::sin(t) : std::sin(t);
        row.numerics[0] = round6(x + 0.15 * gauss(rng));
        row.numerics[1] = round6(y + 0.15 * gauss(rng));
        for (std::size_t j = 2; j < row.numerics.size(); ++j) row.numerics[j] = round6(unit(rng));
        for (auto& c : row.categories) c = any_level(rng);
    } else {  // imbalanced_mixed
        std::bernoulli_distribution pick(spec.minority_fraction.value_or(0.14));
        row.label = pick(rng) ? 1 : 0;
        for (std::size_t j = 0; j < row.numerics.size(); ++j) {
            double z = gauss(rng);
            if (row.label == 0) row.numerics[j] = round6(z);
            else if (j % 2 == 0) row.numerics[j] = round6(z + 1.2);
            else row.numerics[j] = round6(1.6 * z);
        }
        static constexpr double kMajority[3] = {0.5, 0.3, 0.2};
        static constexpr double kMinority[3] = {0.2, 0.3, 0.5};
        for (auto& c : row.categories) {
            std::discrete_distribution<std::size_t> d(row.label ? std::begin(kMinority) : std::begin(kMajority),
                                                      row.label ? std::end(kMinority) : std::end(kMajority));
            c = d(rng);
        }
    }
    return row;
}

inline double regression_score(const RawRow& row) {
    double s = 0.0;
    for (double x : row.numerics) s += std::sin(2.5 * x);
    for (std::size_t c : row.categories) s += 0.5 * static_cast<double>(c);
    if (row.numerics.size() >= 2) s += row.numerics[0] * row.numerics[1];
    return round6(s);
}

inline void check_spec(const SynthSpec& spec) {
    bool known = false;
    for (const auto& g : synth_generators()) known = known || g == spec.generator;
    if (!known) throw ValidationError("unknown generator '" + spec.generator + "'");
    if (spec.rows == 0) throw ValidationError("row count must be positive");
    if (spec.minority_fraction && !(*spec.minority_fraction > 0.0 && *spec.minority_fraction < 1.0))
        throw ValidationError("minority fraction must lie in (0, 1)");
    if (spec.generator == "xor_mixed" && spec.numeric_features + spec.categorical_features < 2)
        throw ValidationError("xor_mixed needs at least 2 features");
    if (spec.generator == "moons2d" && spec.numeric_features < 2)
        throw ValidationError("moons2d needs at least 2 numeric features");
    if (spec.generator == "imbalanced_mixed" && spec.numeric_features + spec.categorical_features < 1)
        throw ValidationError("imbalanced_mixed needs at least 1 feature");
}

inline std::vector<RawRow> draw_rows(const SynthSpec& spec, std::size_t n, Rng& rng) {
    std::vector<RawRow> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(draw_row(spec, rng));
    return out;
}

inline SchemaPtr synth_schema(const SynthSpec& spec, const std::vector<RawRow>& rows) {
    std::vector<FeatureSpec> features;
    for (std::size_t j = 0; j < spec.numeric_features; ++j) {
        double lo = rows.front().numerics[j], hi = lo;
        for (const auto& r : rows) {
            lo = std::min(lo, r.numerics[j]);
            hi = std::max(hi, r.numerics[j]);
        }
        features.push_back(FeatureSpec::numeric("x" + std::to_string(j), lo, hi));
    }
    static const std::vector<std::string> kLevels{"a", "b", "c"};
    const std::size_t levels = category_levels(spec.generator);
    for (std::size_t j = 0; j < spec.categorical_features; ++j)
        features.push_back(FeatureSpec::categorical("c" + std::to_string(j),
                                                    std::vector<std::string>(kLevels.begin(), kLevels.begin() + levels)));
    TargetSpec target;
    target.name = "label";
    target.task = spec.task;
    if (spec.task == Task::Classification) target.classes = {"0", "1"};
    return std::make_shared<const Schema>(std::move(features), std::move(target));
}

inline Dataset to_dataset(const SynthSpec& spec, SchemaPtr schema, const std::vector<RawRow>& raw) {
    std::vector<Instance> rows;
    std::vector<Label> targets;
    for (const auto& r : raw) {
        Instance inst;
        for (double x : r.numerics) inst.values.emplace_back(x);
        for (std::size_t c : r.categories) inst.values.emplace_back(CategoryIndex{c});
        rows.push_back(std::move(inst));
        targets.push_back(spec.task == Task::Classification ? static_cast<Label>(r.label) : regression_score(r));
    }
    return Dataset(std::move(schema), std::move(rows), std::move(targets));
}

}  // namespace detail

/// Deterministic in (spec, seed). Numeric ranges are the observed min/max.
inline Dataset synth_dataset(const SynthSpec& spec, std::uint64_t seed) {
    detail::check_spec(spec);
    Rng rng(derive_seed(seed, SeedStream::SynthTrain));
    auto raw = detail::draw_rows(spec, spec.rows, rng);
    return detail::to_dataset(spec, detail::synth_schema(spec, raw), raw);
}

/// A training set as synth_dataset(spec, seed) plus an independent test set
/// from the same generator that shares the training schema (ranges frozen).
inline std::pair<Dataset, Dataset> synth_train_test(const SynthSpec& spec, std::size_t test_rows, std::uint64_t seed) {
    Dataset train = synth_dataset(spec, seed);
    Rng rng(derive_seed(seed, SeedStream::SynthTest));
    auto raw = detail::draw_rows(spec, test_rows, rng);
    Dataset test = detail::to_dataset(spec, train.schema_ptr(), raw);
    return {std::move(train), std::move(test)};
}

}  // namespace araucana

#endif
