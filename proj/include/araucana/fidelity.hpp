#ifndef ARAUCANA_FIDELITY_HPP
#define ARAUCANA_FIDELITY_HPP

// Fidelity evaluation: how often an explainer's prediction at x agrees with
// the black box's prediction at x. Includes a distance-weighted linear
// surrogate as the comparison baseline.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "araucana/error.hpp"
#include "araucana/explain.hpp"
#include "araucana/gower.hpp"
#include "araucana/oracle.hpp"
#include "araucana/tabular.hpp"

namespace araucana {

/// Range-normalized numerics (clamped) followed by one-hot categoricals.
inline std::vector<double> encode_instance(const Schema& schema, const Instance& inst) {
    std::vector<double> out;
    out.reserve(schema.encoded_dimension());
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const auto& f = schema.feature(i);
        if (f.is_numeric()) {
            out.push_back(normalized_position(f, inst.numeric(i)));
        } else {
            for (std::size_t c = 0; c < f.categories.size(); ++c) out.push_back(inst.category(i) == c ? 1.0 : 0.0);
        }
    }
    return out;
}

struct LinearConfig {
    /// nullopt = 0.75 * sqrt(encoded dimension).
    std::optional<double> kernel_width;
    double ridge = 1e-3;
};

/// Weighted ridge regression on the encoded neighborhood. Classification fits
/// one 0/1 indicator per class and predicts the largest score (ties to the
/// lowest class); regression fits the raw oracle outputs.
class LinearExplainer {
public:
    LinearExplainer(SchemaPtr schema, Task task, std::vector<std::vector<double>> weights, std::vector<double> intercepts,
                    double kernel_width, std::optional<Label> constant)
        : schema_(std::move(schema)), task_(task), weights_(std::move(weights)), intercepts_(std::move(intercepts)),
          kernel_width_(kernel_width), constant_(constant) {
        for (const auto& w : weights_)
            if (w.size() != schema_->encoded_dimension()) throw ValidationError("weight vector length mismatch");
    }

    const std::vector<std::vector<double>>& weights() const { return weights_; }
    const std::vector<double>& intercepts() const { return intercepts_; }
    double kernel_width() const { return kernel_width_; }
    bool is_constant() const { return constant_.has_value(); }

    std::vector<double> scores(const Instance& inst) const {
        const auto z = encode_instance(*schema_, inst);
        std::vector<double> out;
        for (std::size_t k = 0; k < weights_.size(); ++k) {
            double s = intercepts_[k];
            for (std::size_t i = 0; i < z.size(); ++i) s += weights_[k][i] * z[i];
            out.push_back(s);
        }
        return out;
    }

    Label predict(const Instance& inst) const {
        validate_instance(*schema_, inst);
        if (constant_) return *constant_;
        auto s = scores(inst);
        if (task_ == Task::Regression) return s.front();
        return static_cast<Label>(std::max_element(s.begin(), s.end()) - s.begin());
    }

private:
    SchemaPtr schema_;
    Task task_;
    std::vector<std::vector<double>> weights_;
    std::vector<double> intercepts_;
    double kernel_width_;
    std::optional<Label> constant_;
};

/// Sample weights exp(-d^2 / w^2) with d the Gower distance to x.
inline LinearExplainer fit_linear_explainer(const Dataset& train, const Neighborhood& nbh, const Instance& x,
                                            const LinearConfig& cfg = {}) {
    const Schema& schema = train.schema();
    validate_instance(schema, x);
    const Task task = schema.task();
    const std::size_t dim = schema.encoded_dimension();
    const double width = cfg.kernel_width.value_or(0.75 * std::sqrt(static_cast<double>(dim)));
    if (nbh.indices.empty()) throw ValidationError("empty neighborhood");

    if (task == Task::Classification) {
        const bool constant = std::all_of(nbh.relabels.begin(), nbh.relabels.end(),
                                          [&](Label l) { return l == nbh.relabels.front(); });
        if (constant) return LinearExplainer(train.schema_ptr(), task, {}, {}, width, nbh.relabels.front());
    }

    const std::size_t n = nbh.indices.size();
    const DistanceMetric gower(DistanceKind::Gower, train.schema_ptr());
    Eigen::MatrixXd Z(n, dim + 1);
    Eigen::VectorXd w(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = train.row(nbh.indices[r]);
        const auto z = encode_instance(schema, row);
        Z(r, 0) = 1.0;
        for (std::size_t i = 0; i < dim; ++i) Z(r, i + 1) = z[i];
        const double d = gower.unchecked(x, row);
        w(r) = std::exp(-(d * d) / (width * width));
    }
    Eigen::MatrixXd A = Z.transpose() * w.asDiagonal() * Z;
    for (std::size_t i = 1; i <= dim; ++i) A(i, i) += cfg.ridge;
    A(0, 0) += 1e-12;
    const auto solver = A.ldlt();

    const std::size_t outputs = task == Task::Classification ? schema.class_count() : 1;
    std::vector<std::vector<double>> weights;
    std::vector<double> intercepts;
    for (std::size_t k = 0; k < outputs; ++k) {
        Eigen::VectorXd y(n);
        for (std::size_t r = 0; r < n; ++r)
            y(r) = task == Task::Classification ? (nbh.relabels[r] == static_cast<Label>(k) ? 1.0 : 0.0) : nbh.relabels[r];
        Eigen::VectorXd beta = solver.solve(Z.transpose() * w.asDiagonal() * y);
        intercepts.push_back(beta(0));
        weights.emplace_back(beta.data() + 1, beta.data() + 1 + dim);
    }
    return LinearExplainer(train.schema_ptr(), task, std::move(weights), std::move(intercepts), width, std::nullopt);
}

// ---------------------------------------------------------------------------
// Explainers under evaluation

struct ExplainContext {
    const Dataset& train;
    const Instance& x;
    const PredictionOracle& oracle;
    const Neighborhood& neighborhood;
    const ExplainConfig& config;
};

class Explainer {
public:
    virtual ~Explainer() = default;
    virtual std::string name() const = 0;
    /// The surrogate's prediction at x.
    virtual Label predict(const ExplainContext& ctx) const = 0;
};

class AraucanaExplainer final : public Explainer {
public:
    std::string name() const override { return "araucana"; }
    Label predict(const ExplainContext& ctx) const override {
        return explain_with_neighborhood(ctx.train, ctx.x, ctx.oracle, ctx.neighborhood, ctx.config).tree_prediction;
    }
};

class LinearBaselineExplainer final : public Explainer {
public:
    explicit LinearBaselineExplainer(LinearConfig cfg = {}) : cfg_(cfg) {}
    std::string name() const override { return "linear"; }
    Label predict(const ExplainContext& ctx) const override {
        return fit_linear_explainer(ctx.train, ctx.neighborhood, ctx.x, cfg_).predict(ctx.x);
    }

private:
    LinearConfig cfg_;
};

inline const std::vector<std::string>& explainer_names() {
    static const std::vector<std::string> names{"araucana", "linear"};
    return names;
}

inline std::shared_ptr<const Explainer> make_explainer(std::string_view name) {
    if (name == "araucana") return std::make_shared<AraucanaExplainer>();
    if (name == "linear") return std::make_shared<LinearBaselineExplainer>();
    throw UsageError("unknown explainer '" + std::string(name) + "' (valid: araucana, linear)");
}

// ---------------------------------------------------------------------------
// Report

struct ExplainerSummary {
    std::string explainer;
    std::size_t agreements = 0;
    std::size_t total = 0;     // successful evaluations
    std::size_t failures = 0;  // excluded from total
    double fidelity() const { return total ? static_cast<double>(agreements) / static_cast<double>(total) : std::nan(""); }
    bool operator==(const ExplainerSummary&) const = default;
};

struct InstanceRecord {
    std::size_t index = 0;
    std::string explainer;
    Label oracle_label = 0.0;
    std::optional<Label> prediction;  // nullopt on failure
    bool agree = false;
    std::string error;
    bool operator==(const InstanceRecord&) const = default;
};

struct FidelityReport {
    SchemaPtr schema;
    std::vector<ExplainerSummary> summaries;
    std::vector<InstanceRecord> records;
    json config;
    std::uint64_t seed = 0;

    bool operator==(const FidelityReport& o) const {
        return summaries == o.summaries && records == o.records && config == o.config && seed == o.seed;
    }
    const ExplainerSummary& summary(std::string_view name) const {
        for (const auto& s : summaries)
            if (s.explainer == name) return s;
        throw ValidationError("no summary for explainer '" + std::string(name) + "'");
    }
};

struct EvaluateConfig {
    ExplainConfig explain;
    /// Worker threads; results do not depend on it.
    std::size_t jobs = 1;
};

/// Runs every explainer on every test instance against a shared neighborhood
/// and records agreement with the oracle. Oracle failures abort the run; other
/// per-instance failures are recorded and excluded from the denominator.
inline FidelityReport evaluate_fidelity(const Dataset& train, const Dataset& test, const PredictionOracle& oracle,
                                        const std::vector<std::shared_ptr<const Explainer>>& explainers,
                                        const EvaluateConfig& cfg = {}) {
    if (train.schema() != test.schema()) throw ValidationError("train and test schemas differ");
    detail::check_oracle(train, oracle);
    const Task task = train.schema().task();
    const std::vector<Label> oracle_labels = oracle.predict_batch(test.rows());
    if (oracle_labels.size() != test.size()) throw OracleError("oracle returned a wrong number of predictions");

    const std::size_t ne = explainers.size();
    std::vector<InstanceRecord> records(test.size() * ne);
    std::exception_ptr fatal;
    std::mutex fatal_mutex;

    auto run_one = [&](std::size_t t) {
        const Instance& x = test.row(t);
        std::optional<Neighborhood> nbh;
        std::string nbh_error;
        try {
            nbh = select_neighborhood(train, x, oracle, cfg.explain);
        } catch (const OracleError&) {
            throw;
        } catch (const std::exception& e) {
            nbh_error = e.what();
        }
        for (std::size_t e = 0; e < ne; ++e) {
            InstanceRecord& rec = records[t * ne + e];
            rec.index = t;
            rec.explainer = explainers[e]->name();
            rec.oracle_label = oracle_labels[t];
            if (!nbh) {
                rec.error = nbh_error;
                continue;
            }
            try {
                const Label p = explainers[e]->predict({train, x, oracle, *nbh, cfg.explain});
                rec.prediction = p;
                rec.agree = labels_agree(task, p, oracle_labels[t], cfg.explain);
            } catch (const OracleError&) {
                throw;
            } catch (const std::exception& ex) {
                rec.error = ex.what();
            }
        }
    };

    const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, test.size()));
    if (jobs == 1) {
        for (std::size_t t = 0; t < test.size(); ++t) run_one(t);
    } else {
        std::vector<std::thread> workers;
        for (std::size_t j = 0; j < jobs; ++j) {
            workers.emplace_back([&, j] {
                for (std::size_t t = j; t < test.size(); t += jobs) {
                    {
                        std::lock_guard lock(fatal_mutex);
                        if (fatal) return;
                    }
                    try {
                        run_one(t);
                    } catch (...) {
                        std::lock_guard lock(fatal_mutex);
                        if (!fatal) fatal = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& w : workers) w.join();
        if (fatal) std::rethrow_exception(fatal);
    }

    FidelityReport report;
    report.schema = train.schema_ptr();
    for (const auto& e : explainers) report.summaries.push_back({e->name(), 0, 0, 0});
    for (const auto& rec : records) {
        auto& s = *std::find_if(report.summaries.begin(), report.summaries.end(),
                                [&](const auto& x) { return x.explainer == rec.explainer; });
        if (!rec.prediction) {
            ++s.failures;
            continue;
        }
        ++s.total;
        if (rec.agree) ++s.agreements;
    }
    report.records = std::move(records);
    report.seed = cfg.explain.seed;
    report.config = detail::config_echo(cfg.explain, cfg.explain.n_neighbors,
                                        task == Task::Classification && cfg.explain.smote.has_value(), task);
    json names = json::array();
    for (const auto& e : explainers) names.push_back(e->name());
    report.config["explainers"] = std::move(names);
    report.config["test_size"] = test.size();
    return report;
}

inline std::string format_fidelity(double f) {
    if (std::isnan(f)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", f);
    return buf;
}

struct ReportCsv {
    std::string summary;
    std::string per_instance;
};

inline ReportCsv report_to_csv(const FidelityReport& report) {
    ReportCsv out;
    out.summary = "explainer,agreements,total,failures,fidelity\n";
    for (const auto& s : report.summaries) {
        std::vector<std::string> f{s.explainer, std::to_string(s.agreements), std::to_string(s.total),
                                   std::to_string(s.failures), format_fidelity(s.fidelity())};
        out.summary += csv_line(f);
    }
    out.per_instance = "index,explainer,oracle_label,prediction,agree,error\n";
    for (const auto& r : report.records) {
        std::vector<std::string> f{std::to_string(r.index), r.explainer,
                                   report.schema ? label_to_string(*report.schema, r.oracle_label) : format_real(r.oracle_label),
                                   r.prediction ? (report.schema ? label_to_string(*report.schema, *r.prediction)
                                                                 : format_real(*r.prediction))
                                                : "",
                                   r.prediction ? (r.agree ? "1" : "0") : "", r.error};
        out.per_instance += csv_line(f);
    }
    return out;
}

}  // namespace araucana

#endif
