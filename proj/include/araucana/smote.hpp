#ifndef ARAUCANA_SMOTE_HPP
#define ARAUCANA_SMOTE_HPP

// SMOTE-NC oversampling for mixed numeric/categorical data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "araucana/error.hpp"
#include "araucana/gower.hpp"
#include "araucana/random.hpp"
#include "araucana/tabular.hpp"

namespace araucana {

enum class SmotePolicy { BalanceToMajority, FixedTotal };

struct SmoteConfig {
    std::size_t k_neighbors = 5;
    SmotePolicy policy = SmotePolicy::BalanceToMajority;
    /// Total synthetic samples for FixedTotal.
    std::size_t fixed_total = 0;
    std::uint64_t seed = 0;
};

struct SmoteResult {
    std::vector<Instance> rows;
    /// Class of the seed each sample was interpolated from.
    std::vector<Label> labels;
    /// Indices (into the input rows) of each sample's seed and chosen neighbor.
    std::vector<std::size_t> seeds;
    std::vector<std::size_t> neighbors;
    std::vector<std::string> warnings;
};

namespace detail {

/// Squared SMOTE-NC distance for one class: squared Euclidean over
/// range-normalized numerics plus a fixed penalty per categorical mismatch.
/// The penalty is (median of per-feature std within the class / 2)^2, or 1
/// when there are no numeric features.
class SmoteNcDistance {
public:
    SmoteNcDistance(const Schema& schema, std::span<const Instance> rows, std::span<const std::size_t> members)
        : schema_(&schema) {
        std::vector<double> stds;
        for (std::size_t i = 0; i < schema.size(); ++i) {
            const auto& f = schema.feature(i);
            if (!f.is_numeric()) continue;
            double mean = 0.0;
            for (std::size_t m : members) mean += normalized_position(f, rows[m].numeric(i));
            mean /= static_cast<double>(members.size());
            double var = 0.0;
            for (std::size_t m : members) {
                double d = normalized_position(f, rows[m].numeric(i)) - mean;
                var += d * d;
            }
            stds.push_back(std::sqrt(var / static_cast<double>(members.size())));
        }
        if (stds.empty()) {
            penalty_sq_ = 1.0;
        } else {
            std::sort(stds.begin(), stds.end());
            std::size_t n = stds.size();
            double median = n % 2 ? stds[n / 2] : 0.5 * (stds[n / 2 - 1] + stds[n / 2]);
            penalty_sq_ = 0.25 * median * median;
        }
    }

    double penalty_sq() const { return penalty_sq_; }

    double squared(const Instance& a, const Instance& b) const {
        double s = 0.0;
        for (std::size_t i = 0; i < schema_->size(); ++i) {
            const auto& f = schema_->feature(i);
            if (f.is_numeric()) {
                double d = normalized_position(f, a.numeric(i)) - normalized_position(f, b.numeric(i));
                s += d * d;
            } else if (a.category(i) != b.category(i)) {
                s += penalty_sq_;
            }
        }
        return s;
    }

private:
    const Schema* schema_;
    double penalty_sq_ = 1.0;
};

inline std::vector<std::size_t> class_members(std::span<const Label> labels, Label cls) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == cls) out.push_back(i);
    return out;
}

inline std::vector<std::size_t> nearest_in(const SmoteNcDistance& dist, std::span<const Instance> rows,
                                           std::span<const std::size_t> members, std::size_t index, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t m : members)
        if (m != index) cand.emplace_back(dist.squared(rows[index], rows[m]), m);
    k = std::min(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(cand[i].second);
    return out;
}

inline void require_classification(const Schema& schema) {
    if (!schema.target() || schema.target()->task != Task::Classification)
        throw ValidationError("SMOTE-NC requires classification labels");
}

}  // namespace detail

/// Indices of the k same-class rows nearest to rows[index] under the SMOTE-NC
/// distance, excluding index itself. Ties go to the lower index; k is reduced
/// to the number of available peers.
inline std::vector<std::size_t> nearest_same_class(std::span<const Instance> rows, std::span<const Label> labels,
                                                   std::size_t index, std::size_t k, const Schema& schema) {
    if (rows.size() != labels.size()) throw ValidationError("rows/labels length mismatch");
    if (index >= rows.size()) throw ValidationError("index out of range");
    auto members = detail::class_members(labels, labels[index]);
    if (members.size() < 2) throw ValidationError("row " + std::to_string(index) + " has no same-class peer");
    detail::SmoteNcDistance dist(schema, rows, members);
    return detail::nearest_in(dist, rows, members, index, k);
}

/// Synthetic samples only. Classes are processed in ascending index order from
/// a single seeded stream.
inline SmoteResult smote_nc(std::span<const Instance> rows, std::span<const Label> labels, const Schema& schema,
                            const SmoteConfig& cfg) {
    detail::require_classification(schema);
    if (rows.size() != labels.size()) throw ValidationError("rows/labels length mismatch");
    if (cfg.k_neighbors < 1) throw ValidationError("k_neighbors must be >= 1");
    for (const auto& r : rows) validate_instance(schema, r);

    SmoteResult out;
    std::map<Label, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    if (by_class.empty()) return out;

    std::size_t majority = 0;
    for (const auto& [cls, members] : by_class) majority = std::max(majority, members.size());

    std::vector<Label> eligible;
    for (const auto& [cls, members] : by_class) {
        if (members.size() >= 2) {
            eligible.push_back(cls);
        } else if (members.size() < majority || cfg.policy == SmotePolicy::FixedTotal) {
            out.warnings.push_back("class " + format_real(cls) + " has a single member; not oversampled");
        }
    }

    std::map<Label, std::size_t> quota;
    if (cfg.policy == SmotePolicy::BalanceToMajority) {
        for (Label c : eligible) quota[c] = majority - by_class[c].size();
    } else if (!eligible.empty()) {
        std::size_t total_deficit = 0;
        for (Label c : eligible) total_deficit += majority - by_class[c].size();
        std::vector<std::pair<std::size_t, Label>> order;  // (weight, class)
        std::size_t assigned = 0;
        for (Label c : eligible) {
            std::size_t w = total_deficit ? majority - by_class[c].size() : 1;
            std::size_t denom = total_deficit ? total_deficit : eligible.size();
            quota[c] = cfg.fixed_total * w / denom;
            assigned += quota[c];
            order.emplace_back(w, c);
        }
        std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t i = 0; assigned < cfg.fixed_total; ++i, ++assigned) ++quota[order[i % order.size()].second];
    }

    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Label cls : eligible) {
        const std::size_t need = quota[cls];
        if (need == 0) continue;
        const auto& members = by_class[cls];
        std::size_t k = cfg.k_neighbors;
        if (k >= members.size()) {
            out.warnings.push_back("k_neighbors reduced to " + std::to_string(members.size() - 1) + " for class " +
                                   format_real(cls));
            k = members.size() - 1;
        }
        detail::SmoteNcDistance dist(schema, rows, members);
        std::map<std::size_t, std::vector<std::size_t>> knn_cache;
        std::uniform_int_distribution<std::size_t> pick_seed(0, members.size() - 1);
        std::uniform_int_distribution<std::size_t> pick_nn(0, k - 1);
        for (std::size_t s = 0; s < need; ++s) {
            const std::size_t seed = members[pick_seed(rng)];
            auto it = knn_cache.find(seed);
            if (it == knn_cache.end()) it = knn_cache.emplace(seed, detail::nearest_in(dist, rows, members, seed, k)).first;
            const auto& nn = it->second;
            const std::size_t other = nn[pick_nn(rng)];
            const double lambda = unit(rng);

            const Instance& r = rows[seed];
            const Instance& n = rows[other];
            Instance synth;
            synth.values.reserve(schema.size());
            for (std::size_t i = 0; i < schema.size(); ++i) {
                const auto& f = schema.feature(i);
                if (f.is_numeric()) {
                    double a = r.numeric(i), b = n.numeric(i);
                    double v = std::clamp(a + lambda * (b - a), std::min(a, b), std::max(a, b));
                    synth.values.emplace_back(v);
                } else {
                    std::vector<std::size_t> votes(f.categories.size(), 0);
                    for (std::size_t j : nn) ++votes[rows[j].category(i)];
                    auto best = std::max_element(votes.begin(), votes.end());  // first maximum = lowest index
                    synth.values.emplace_back(CategoryIndex{static_cast<std::size_t>(best - votes.begin())});
                }
            }
            out.rows.push_back(std::move(synth));
            out.labels.push_back(cls);
            out.seeds.push_back(seed);
            out.neighbors.push_back(other);
        }
    }
    return out;
}

}  // namespace araucana

#endif
