#ifndef ARAUCANA_CLI_HPP
#define ARAUCANA_CLI_HPP

// `araucana` command line: synth, train, explain, evaluate.
// Exit codes: 0 success, 1 runtime / I/O / oracle failure, 2 usage error.

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "araucana/error.hpp"
#include "araucana/explain.hpp"
#include "araucana/fidelity.hpp"
#include "araucana/oracle.hpp"
#include "araucana/random.hpp"
#include "araucana/subprocess.hpp"
#include "araucana/synth.hpp"
#include "araucana/tabular.hpp"

namespace araucana::cli {

namespace fs = std::filesystem;

inline std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
    std::ostringstream ss;
    for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return ss.str();
}

/// Records one command invocation; written as manifest.json next to its artifacts.
class RunManifest {
public:
    RunManifest(std::string command, const CLI::App& app, std::uint64_t seed)
        : command_(std::move(command)), seed_(seed), start_(std::chrono::steady_clock::now()) {
        for (const CLI::Option* opt : app.get_options()) {
            const auto& names = opt->get_lnames();
            if (names.empty() || names.front() == "help") continue;
            if (opt->count() > 0) {
                const auto& res = opt->results();
                flags_[names.front()] = res.size() == 1 ? json(res.front()) : json(res);
            } else {
                flags_[names.front()] = opt->get_default_str();
            }
        }
    }

    void input(const std::string& path) { inputs_[path] = sha256_hex(read_text_file(path)); }
    void output(const std::string& name, const std::string& path) { outputs_[name] = path; }

    void write(const fs::path& dir) const {
        json j;
        j["command"] = command_;
        j["flags"] = flags_;
        j["seed"] = seed_;
        j["inputs"] = inputs_;
        j["outputs"] = outputs_;
        j["duration_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        j["timestamp"] = static_cast<std::int64_t>(std::time(nullptr));
        write_text_file((dir / "manifest.json").string(), j.dump(2) + "\n");
    }

private:
    std::string command_;
    std::uint64_t seed_;
    std::chrono::steady_clock::time_point start_;
    json flags_ = json::object();
    json inputs_ = json::object();
    json outputs_ = json::object();
};

struct DataFlags {
    std::string data;
    std::string schema;
    std::string target = "label";
    std::string task = "auto";
};

inline void add_data_flags(CLI::App* cmd, DataFlags& f) {
    cmd->add_option("--data", f.data, "Training CSV (header row required)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--schema", f.schema, "Schema JSON; inferred from the CSV when absent");
    cmd->add_option("--target", f.target, "Target column name (when inferring)")->capture_default_str();
    cmd->add_option("--task", f.task, "Target task when inferring")
        ->check(CLI::IsMember({"auto", "classification", "regression"}))
        ->capture_default_str();
}

inline LoadOptions load_options(const DataFlags& f, std::vector<std::string> ignore = {}) {
    LoadOptions opt;
    opt.target = f.target;
    if (f.task == "classification") opt.task = Task::Classification;
    if (f.task == "regression") opt.task = Task::Regression;
    opt.ignore_columns = std::move(ignore);
    return opt;
}

inline std::optional<std::string> opt_path(const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<std::string>(s);
}

/// Schema with numeric ranges recomputed over `rows`; categories unchanged.
inline SchemaPtr refit_ranges(const Schema& schema, std::span<const Instance> rows) {
    std::vector<FeatureSpec> features = schema.features();
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (!features[i].is_numeric() || rows.empty()) continue;
        double lo = rows.front().numeric(i), hi = lo;
        for (const auto& r : rows) {
            lo = std::min(lo, r.numeric(i));
            hi = std::max(hi, r.numeric(i));
        }
        features[i].range = {lo, hi};
    }
    return std::make_shared<const Schema>(std::move(features), schema.target());
}

struct OracleFlags {
    std::string spec = "builtin:forest";
    std::string model;
    std::size_t n_trees = 100;
    std::size_t k = 5;
    double timeout = 30.0;
};

inline void add_oracle_flags(CLI::App* cmd, OracleFlags& f) {
    cmd->add_option("--oracle", f.spec, "builtin:forest | builtin:knn | cmd:\"...\" | precomputed:<column>")
        ->capture_default_str();
    cmd->add_option("--model", f.model, "Model JSON for builtin oracles; trained on --data when absent");
    cmd->add_option("--n-trees", f.n_trees, "Trees when training a builtin forest")->capture_default_str();
    cmd->add_option("--k", f.k, "Neighbors when training a builtin k-NN")->capture_default_str();
    cmd->add_option("--timeout", f.timeout, "Subprocess oracle timeout per batch, seconds")->capture_default_str();
}

inline std::optional<std::string> precomputed_column(const OracleFlags& f) {
    if (f.spec.rfind("precomputed:", 0) == 0) {
        std::string col = f.spec.substr(12);
        if (col.empty()) throw UsageError("precomputed oracle needs a column name");
        return col;
    }
    return std::nullopt;
}

/// Builds the oracle. `tables` holds the raw CSVs whose prediction column
/// feeds a precomputed oracle, paired with their datasets.
inline std::shared_ptr<const PredictionOracle> make_oracle(const OracleFlags& f, const Dataset& train,
                                                           const std::vector<std::pair<const CsvTable*, const Dataset*>>& tables,
                                                           std::uint64_t seed, RunManifest& manifest) {
    const std::string& spec = f.spec;
    if (spec == "builtin:forest" || spec == "builtin:knn") {
        if (!f.model.empty()) {
            manifest.input(f.model);
            Model m = load_model(f.model);
            const bool forest = std::holds_alternative<ForestModel>(m);
            if (forest != (spec == "builtin:forest"))
                throw UsageError("model file " + f.model + " does not hold a " + spec.substr(8) + " model");
            return std::make_shared<BuiltInOracle>(std::move(m), train.schema());
        }
        if (spec == "builtin:forest") {
            ForestConfig cfg;
            cfg.n_trees = f.n_trees;
            cfg.seed = seed;
            return std::make_shared<BuiltInOracle>(train_forest(train, cfg));
        }
        return std::make_shared<BuiltInOracle>(train_knn(train, f.k));
    }
    if (spec.rfind("cmd:", 0) == 0) {
        std::string cmd = spec.substr(4);
        if (cmd.size() >= 2 && cmd.front() == '"' && cmd.back() == '"') cmd = cmd.substr(1, cmd.size() - 2);
        if (cmd.empty()) throw UsageError("cmd oracle needs a command line");
        return std::make_shared<SubprocessOracle>(train.schema_ptr(), cmd,
                                                  std::chrono::milliseconds(static_cast<long>(f.timeout * 1000)));
    }
    if (auto col = precomputed_column(f)) {
        auto oracle = std::make_shared<PrecomputedOracle>(train.schema_ptr(), *col);
        for (const auto& [table, data] : tables)
            oracle->add(data->rows(), parse_prediction_column(*table, *col, train.schema()));
        return oracle;
    }
    throw UsageError("unknown oracle '" + spec + "' (expected builtin:forest, builtin:knn, cmd:\"...\" or precomputed:<column>)");
}

struct ExplainFlags {
    std::size_t n_neighbors = 100;
    std::string distance = "gower";
    std::string smote_policy = "balance";
    std::size_t smote_k = 5;
};

inline void add_explain_flags(CLI::App* cmd, ExplainFlags& f) {
    cmd->add_option("--n-neighbors", f.n_neighbors, "Neighborhood size N")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--distance", f.distance, "Distance for neighborhood selection")
        ->check(CLI::IsMember({"gower", "euclidean"}))
        ->capture_default_str();
    cmd->add_option("--smote-policy", f.smote_policy, "balance | fixed:N | off")->capture_default_str();
    cmd->add_option("--smote-k", f.smote_k, "SMOTE-NC neighbors")->capture_default_str()->check(CLI::PositiveNumber);
}

inline ExplainConfig explain_config(const ExplainFlags& f, std::uint64_t seed) {
    ExplainConfig cfg;
    cfg.n_neighbors = f.n_neighbors;
    cfg.distance = parse_distance_kind(f.distance);
    cfg.seed = seed;
    if (f.smote_policy == "off") {
        cfg.smote.reset();
    } else {
        SmoteConfig s;
        s.k_neighbors = f.smote_k;
        if (f.smote_policy == "balance") {
            s.policy = SmotePolicy::BalanceToMajority;
        } else if (f.smote_policy.rfind("fixed:", 0) == 0) {
            s.policy = SmotePolicy::FixedTotal;
            const auto n = parse_real(f.smote_policy.substr(6));
            if (!n || *n < 0 || *n != std::floor(*n)) throw UsageError("invalid --smote-policy '" + f.smote_policy + "'");
            s.fixed_total = static_cast<std::size_t>(*n);
        } else {
            throw UsageError("invalid --smote-policy '" + f.smote_policy + "' (expected balance|fixed:N|off)");
        }
        cfg.smote = s;
    }
    return cfg;
}

// ---------------------------------------------------------------------------

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

inline int cmd_synth(const CLI::App& app, const SynthSpec& spec, std::size_t test_rows, std::uint64_t seed,
                     const std::string& out_dir, Streams io) {
    RunManifest manifest("synth", app, seed);
    auto [train, test] = synth_train_test(spec, test_rows, seed);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_dataset(train, (dir / "data.csv").string(), (dir / "schema.json").string());
    manifest.output("data", (dir / "data.csv").string());
    manifest.output("schema", (dir / "schema.json").string());
    if (test_rows > 0) {
        write_dataset(test, (dir / "test.csv").string(), std::nullopt);
        manifest.output("test", (dir / "test.csv").string());
    }
    manifest.write(dir);
    io.out << "wrote " << train.size() << " rows to " << (dir / "data.csv").string();
    if (test_rows > 0) io.out << " and " << test.size() << " rows to " << (dir / "test.csv").string();
    io.out << "\n";
    return 0;
}

inline int cmd_train(const CLI::App& app, const DataFlags& data_flags, const std::string& model_kind, std::size_t n_trees,
                     std::size_t k, const std::string& distance, std::uint64_t seed, const std::string& out_dir, Streams io) {
    RunManifest manifest("train", app, seed);
    Dataset data = load_dataset(data_flags.data, opt_path(data_flags.schema), load_options(data_flags));
    manifest.input(data_flags.data);
    if (!data_flags.schema.empty()) manifest.input(data_flags.schema);
    if (!data.has_targets()) {
        std::string name = data.schema().target() ? data.schema().target()->name : data_flags.target;
        throw DataError("target column '" + name + "' not found in " + data_flags.data);
    }
    std::optional<Model> model;
    if (model_kind == "forest") {
        ForestConfig cfg;
        cfg.n_trees = n_trees;
        cfg.seed = seed;
        model = train_forest(data, cfg);
    } else {
        model = train_knn(data, k, parse_distance_kind(distance));
    }
    const auto& y = data.targets();
    std::string metric;
    if (data.schema().task() == Task::Classification) {
        std::size_t ok = 0;
        for (std::size_t i = 0; i < data.size(); ++i) ok += model_predict(*model, data.row(i)) == y[i];
        char buf[64];
        std::snprintf(buf, sizeof buf, "training accuracy: %.4f", static_cast<double>(ok) / static_cast<double>(data.size()));
        metric = buf;
    } else {
        double se = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            double d = model_predict(*model, data.row(i)) - y[i];
            se += d * d;
        }
        char buf[64];
        std::snprintf(buf, sizeof buf, "training rmse: %.6f", std::sqrt(se / static_cast<double>(data.size())));
        metric = buf;
    }
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    save_model(*model, (dir / "model.json").string());
    manifest.output("model", (dir / "model.json").string());
    manifest.write(dir);
    io.out << metric << "\n";
    return 0;
}

struct ExplainTarget {
    std::optional<std::size_t> index;
    std::string instance_json;
};

inline int cmd_explain(const CLI::App& app, const DataFlags& data_flags, const OracleFlags& oracle_flags,
                       const ExplainFlags& explain_flags, const ExplainTarget& target, const std::string& format,
                       std::uint64_t seed, const std::string& out_dir, Streams io) {
    RunManifest manifest("explain", app, seed);
    const ExplainConfig cfg = explain_config(explain_flags, seed);
    std::vector<std::string> ignore;
    if (auto col = precomputed_column(oracle_flags)) ignore.push_back(*col);
    const CsvTable table = read_csv_file(data_flags.data);
    SchemaPtr schema;
    if (!data_flags.schema.empty()) {
        schema = std::make_shared<const Schema>(schema_from_json(json::parse(read_text_file(data_flags.schema))));
        manifest.input(data_flags.schema);
    } else {
        schema = std::make_shared<const Schema>(infer_schema(table, load_options(data_flags, ignore)));
    }
    const Dataset train = dataset_from_table(table, schema, load_options(data_flags, ignore));
    manifest.input(data_flags.data);
    if (!schema->target()) throw DataError("no target column; pass --target or a schema with a target");

    Instance x;
    if (target.index) {
        if (*target.index >= train.size())
            throw ValidationError("--index " + std::to_string(*target.index) + " out of range (dataset has " +
                                  std::to_string(train.size()) + " rows)");
        x = train.row(*target.index);
    } else {
        json j;
        try {
            j = json::parse(target.instance_json);
        } catch (const json::parse_error& e) {
            throw ValidationError(std::string("--instance is not valid JSON: ") + e.what());
        }
        x = instance_from_json(*schema, j);
    }
    auto oracle = make_oracle(oracle_flags, train, {{&table, &train}}, seed, manifest);
    Explanation e = explain_instance(train, x, *oracle, cfg);
    const RenderFormat fmt = format == "json" ? RenderFormat::Json : RenderFormat::Text;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        const fs::path dir(out_dir);
        write_text_file((dir / "explanation.json").string(), render_explanation(e, RenderFormat::Json));
        manifest.output("explanation", (dir / "explanation.json").string());
        manifest.write(dir);
    }
    io.out << render_explanation(e, fmt);
    return 0;
}

struct EvaluateFlags {
    std::string test;
    std::optional<double> test_frac;
    std::string explainers = "araucana,linear";
    std::size_t jobs = 1;
};

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

inline int cmd_evaluate(const CLI::App& app, const DataFlags& data_flags, const OracleFlags& oracle_flags,
                        const ExplainFlags& explain_flags, const EvaluateFlags& ev, std::uint64_t seed,
                        const std::string& out_dir, Streams io) {
    RunManifest manifest("evaluate", app, seed);
    std::vector<std::shared_ptr<const Explainer>> explainers;
    for (const auto& name : split_list(ev.explainers)) explainers.push_back(make_explainer(name));
    if (explainers.empty()) throw UsageError("--explainers is empty (valid: araucana, linear)");
    if (ev.test.empty() == !ev.test_frac) throw UsageError("exactly one of --test or --test-frac is required");
    EvaluateConfig cfg;
    cfg.explain = explain_config(explain_flags, seed);
    cfg.jobs = ev.jobs;

    std::vector<std::string> ignore;
    if (auto col = precomputed_column(oracle_flags)) ignore.push_back(*col);
    const LoadOptions opt = load_options(data_flags, ignore);
    const CsvTable table = read_csv_file(data_flags.data);
    manifest.input(data_flags.data);
    SchemaPtr schema;
    if (!data_flags.schema.empty()) {
        schema = std::make_shared<const Schema>(schema_from_json(json::parse(read_text_file(data_flags.schema))));
        manifest.input(data_flags.schema);
    } else {
        schema = std::make_shared<const Schema>(infer_schema(table, opt));
    }
    if (!schema->target()) throw DataError("no target column; pass --target or a schema with a target");

    std::optional<Dataset> train, test;
    std::optional<CsvTable> test_table;
    std::vector<std::pair<const CsvTable*, const Dataset*>> tables;
    std::optional<Dataset> full;
    if (!ev.test.empty()) {
        train = dataset_from_table(table, schema, opt);
        test_table = read_csv_file(ev.test);
        manifest.input(ev.test);
        test = dataset_from_table(*test_table, schema, opt);
        tables = {{&table, &*train}, {&*test_table, &*test}};
    } else {
        if (!(*ev.test_frac > 0.0 && *ev.test_frac < 1.0)) throw UsageError("--test-frac must lie in (0, 1)");
        full = dataset_from_table(table, schema, opt);
        std::vector<std::size_t> order(full->size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(seed, SeedStream::Split));
        std::shuffle(order.begin(), order.end(), rng);
        const auto n_test = static_cast<std::size_t>(std::llround(*ev.test_frac * static_cast<double>(full->size())));
        if (n_test == 0 || n_test >= full->size()) throw UsageError("--test-frac leaves an empty train or test split");
        std::vector<std::size_t> test_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
        std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
        std::sort(test_idx.begin(), test_idx.end());
        std::sort(train_idx.begin(), train_idx.end());
        Dataset tr = full->subset(train_idx), te = full->subset(test_idx);
        // Ranges are frozen from the training split unless a schema file fixed them.
        SchemaPtr frozen = data_flags.schema.empty() ? refit_ranges(*schema, tr.rows()) : schema;
        train = Dataset(frozen, tr.rows(), tr.has_targets() ? std::optional(tr.targets()) : std::nullopt);
        test = Dataset(frozen, te.rows(), te.has_targets() ? std::optional(te.targets()) : std::nullopt);
        tables = {{&table, &*full}};
    }

    auto oracle = make_oracle(oracle_flags, *train, tables, seed, manifest);
    FidelityReport report = evaluate_fidelity(*train, *test, *oracle, explainers, cfg);
    const ReportCsv csv = report_to_csv(report);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_text_file((dir / "summary.csv").string(), csv.summary);
    write_text_file((dir / "per_instance.csv").string(), csv.per_instance);
    manifest.output("summary", (dir / "summary.csv").string());
    manifest.output("per_instance", (dir / "per_instance.csv").string());
    manifest.write(dir);

    char line[160];
    std::snprintf(line, sizeof line, "%-10s %10s %8s %8s %9s\n", "explainer", "agreements", "total", "failed", "fidelity");
    io.out << line;
    for (const auto& s : report.summaries) {
        char fid[32];
        std::snprintf(fid, sizeof fid, "%.3f", s.fidelity());
        std::snprintf(line, sizeof line, "%-10s %10zu %8zu %8zu %9s\n", s.explainer.c_str(), s.agreements, s.total,
                      s.failures, std::isnan(s.fidelity()) ? "nan" : fid);
        io.out << line;
    }
    for (const auto& s : report.summaries)
        if (s.failures) io.err << "warning: " << s.failures << " instance(s) failed for " << s.explainer << " and were excluded\n";
    return 0;
}

// ---------------------------------------------------------------------------

/// Entry point shared by the binary and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Local tree-based explanations of black-box predictions", "araucana"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_dir;
    std::size_t jobs = 1;

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset (data.csv, schema.json, manifest.json)");
    SynthSpec spec;
    std::string synth_task = "classification";
    std::size_t test_rows = 0;
    double minority = 0.0;
    synth->add_option("--gen", spec.generator, "xor_mixed | moons2d | imbalanced_mixed")->required();
    synth->add_option("--rows", spec.rows, "Training rows")->required();
    synth->add_option("--test-rows", test_rows, "Rows for an additional test.csv sharing the schema")->capture_default_str();
    synth->add_option("--minority", minority, "Fraction of class 1 (imbalanced_mixed default 0.14)");
    synth->add_option("--numeric", spec.numeric_features, "Numeric features")->capture_default_str();
    synth->add_option("--categorical", spec.categorical_features, "Categorical features")->capture_default_str();
    synth->add_option("--task", synth_task, "Target kind")
        ->check(CLI::IsMember({"classification", "regression"}))
        ->capture_default_str();
    synth->add_option("--seed", seed, "Random seed")->capture_default_str();
    synth->add_option("--out", out_dir, "Output directory")->required();

    // train
    auto* train = app.add_subcommand("train", "Train a built-in black box (model.json, manifest.json)");
    DataFlags train_data;
    std::string model_kind = "forest", train_distance = "gower";
    std::size_t n_trees = 100, k = 5;
    add_data_flags(train, train_data);
    train->add_option("--model", model_kind, "forest | knn")->check(CLI::IsMember({"forest", "knn"}))->capture_default_str();
    train->add_option("--n-trees", n_trees, "Forest size")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--k", k, "k-NN neighbors")->capture_default_str()->check(CLI::PositiveNumber);
    train->add_option("--distance", train_distance, "k-NN distance")
        ->check(CLI::IsMember({"gower", "euclidean"}))
        ->capture_default_str();
    train->add_option("--seed", seed, "Random seed")->capture_default_str();
    train->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
    train->add_option("--out", out_dir, "Output directory")->required();

    // explain
    auto* explain = app.add_subcommand("explain", "Explain one prediction with a local CART tree");
    DataFlags explain_data;
    OracleFlags explain_oracle;
    ExplainFlags explain_flags;
    ExplainTarget target;
    std::size_t index = 0;
    std::string format = "text";
    add_data_flags(explain, explain_data);
    add_oracle_flags(explain, explain_oracle);
    add_explain_flags(explain, explain_flags);
    auto* idx_opt = explain->add_option("--index", index, "Row of --data to explain");
    auto* inst_opt = explain->add_option("--instance", target.instance_json, "JSON array instance to explain");
    idx_opt->excludes(inst_opt);
    explain->add_option("--format", format, "text | json")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
    explain->add_option("--seed", seed, "Random seed")->capture_default_str();
    explain->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
    explain->add_option("--out", out_dir, "Directory for explanation.json and manifest.json");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Measure explainer fidelity over a test set");
    DataFlags eval_data;
    OracleFlags eval_oracle;
    ExplainFlags eval_flags;
    EvaluateFlags ev;
    double test_frac = 0.0;
    add_data_flags(evaluate, eval_data);
    add_oracle_flags(evaluate, eval_oracle);
    add_explain_flags(evaluate, eval_flags);
    auto* test_opt = evaluate->add_option("--test", ev.test, "Test CSV (loaded against the training schema)");
    auto* frac_opt = evaluate->add_option("--test-frac", test_frac, "Hold out this fraction of --data as the test set");
    test_opt->excludes(frac_opt);
    evaluate->add_option("--explainers", ev.explainers, "Comma-separated: araucana,linear")->capture_default_str();
    evaluate->add_option("--seed", seed, "Random seed")->capture_default_str();
    evaluate->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
    evaluate->add_option("--out", out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const Streams io{out, err};
    try {
        if (*synth) {
            if (synth->count("--minority")) spec.minority_fraction = minority;
            spec.task = synth_task == "regression" ? Task::Regression : Task::Classification;
            return cmd_synth(*synth, spec, test_rows, seed, out_dir, io);
        }
        if (*train) return cmd_train(*train, train_data, model_kind, n_trees, k, train_distance, seed, out_dir, io);
        if (*explain) {
            if (idx_opt->count()) target.index = index;
            else if (!inst_opt->count()) throw UsageError("one of --index or --instance is required");
            return cmd_explain(*explain, explain_data, explain_oracle, explain_flags, target, format, seed, out_dir, io);
        }
        if (*evaluate) {
            if (frac_opt->count()) ev.test_frac = test_frac;
            ev.jobs = jobs;
            return cmd_evaluate(*evaluate, eval_data, eval_oracle, eval_flags, ev, seed, out_dir, io);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace araucana::cli

#endif
