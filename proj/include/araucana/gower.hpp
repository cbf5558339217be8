#ifndef ARAUCANA_GOWER_HPP
#define ARAUCANA_GOWER_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "araucana/error.hpp"
#include "araucana/tabular.hpp"

namespace araucana {

enum class DistanceKind { Gower, EuclideanNormalized };

inline std::string to_string(DistanceKind k) { return k == DistanceKind::Gower ? "gower" : "euclidean"; }

inline DistanceKind parse_distance_kind(std::string_view s) {
    if (s == "gower") return DistanceKind::Gower;
    if (s == "euclidean") return DistanceKind::EuclideanNormalized;
    throw UsageError("unknown distance '" + std::string(s) + "' (expected gower|euclidean)");
}

/// Range-normalized position of a numeric value, clamped into [0, 1].
/// Constant features map to 0.
inline double normalized_position(const FeatureSpec& f, double v) {
    if (f.range.constant()) return 0.0;
    double c = std::clamp(v, f.range.min, f.range.max);
    return (c - f.range.min) / f.range.width();
}

/// Mixed-type dissimilarity bounded in [0, 1].
///
/// Gower: mean over features of |a_i - b_i| / range_i for numerics (values
/// clamped to the schema range, constant features contribute 0) and of 0/1
/// mismatch for categoricals.
///
/// EuclideanNormalized: Euclidean norm over range-normalized numerics and
/// one-hot categoricals scaled by 1/sqrt(2) (a mismatch contributes 1), divided
/// by sqrt(feature count).
class DistanceMetric {
public:
    DistanceMetric(DistanceKind kind, SchemaPtr schema) : kind_(kind), schema_(std::move(schema)) {
        if (!schema_) throw ValidationError("distance metric without schema");
    }

    DistanceKind kind() const { return kind_; }
    const Schema& schema() const { return *schema_; }

    double operator()(const Instance& a, const Instance& b) const {
        validate_instance(*schema_, a);
        validate_instance(*schema_, b);
        return unchecked(a, b);
    }

    /// Skips validation; callers guarantee conformance.
    double unchecked(const Instance& a, const Instance& b) const {
        const auto& features = schema_->features();
        if (features.empty()) return 0.0;
        double sum = 0.0;
        for (std::size_t i = 0; i < features.size(); ++i) {
            const auto& f = features[i];
            double d;
            if (f.is_numeric()) {
                d = std::abs(normalized_position(f, a.numeric(i)) - normalized_position(f, b.numeric(i)));
            } else {
                d = a.category(i) == b.category(i) ? 0.0 : 1.0;
            }
            sum += kind_ == DistanceKind::Gower ? d : d * d;
        }
        const double n = static_cast<double>(features.size());
        return kind_ == DistanceKind::Gower ? sum / n : std::sqrt(sum / n);
    }

private:
    DistanceKind kind_;
    SchemaPtr schema_;
};

inline double distance(const DistanceMetric& metric, const Instance& a, const Instance& b) { return metric(a, b); }

/// Element i is distance(metric, x, rows[i]).
inline std::vector<double> distances_to(const DistanceMetric& metric, const Instance& x, std::span<const Instance> rows) {
    validate_instance(metric.schema(), x);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        validate_instance(metric.schema(), r);
        out.push_back(metric.unchecked(x, r));
    }
    return out;
}

}  // namespace araucana

#endif
