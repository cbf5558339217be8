#ifndef ARAUCANA_TABULAR_HPP
#define ARAUCANA_TABULAR_HPP

// Mixed-type tabular data: schema, instances, datasets, CSV and schema-file I/O.

#include <algorithm>
#include <compare>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "araucana/error.hpp"
#include "json.hpp"

namespace araucana {

using json = nlohmann::json;

enum class FeatureKind { Numeric, Categorical };
enum class Task { Classification, Regression };

/// A class index (classification) or a real target (regression). Class labels
/// are stored as exact small integers.
using Label = double;

struct NumericRange {
    double min = 0.0;
    double max = 0.0;

    bool constant() const { return min == max; }
    double width() const { return max - min; }
    bool operator==(const NumericRange&) const = default;
};

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Numeric;
    NumericRange range;                   // Numeric only
    std::vector<std::string> categories;  // Categorical only

    static FeatureSpec numeric(std::string name, double min, double max) {
        return FeatureSpec{std::move(name), FeatureKind::Numeric, {min, max}, {}};
    }
    static FeatureSpec categorical(std::string name, std::vector<std::string> categories) {
        return FeatureSpec{std::move(name), FeatureKind::Categorical, {}, std::move(categories)};
    }

    bool is_numeric() const { return kind == FeatureKind::Numeric; }
    bool is_categorical() const { return kind == FeatureKind::Categorical; }

    std::optional<std::size_t> category_index(std::string_view value) const {
        auto it = std::find(categories.begin(), categories.end(), value);
        if (it == categories.end()) return std::nullopt;
        return static_cast<std::size_t>(it - categories.begin());
    }

    bool operator==(const FeatureSpec&) const = default;
};

struct TargetSpec {
    std::string name;
    Task task = Task::Classification;
    std::vector<std::string> classes;  // Classification only

    std::optional<std::size_t> class_index(std::string_view value) const {
        auto it = std::find(classes.begin(), classes.end(), value);
        if (it == classes.end()) return std::nullopt;
        return static_cast<std::size_t>(it - classes.begin());
    }

    bool operator==(const TargetSpec&) const = default;
};

/// Ordered feature declarations plus an optional target. Validated on
/// construction and immutable afterwards.
class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<FeatureSpec> features, std::optional<TargetSpec> target = std::nullopt)
        : features_(std::move(features)), target_(std::move(target)) {
        std::set<std::string> names;
        for (const auto& f : features_) {
            if (f.name.empty()) throw ValidationError("feature with empty name");
            if (!names.insert(f.name).second) throw ValidationError("duplicate feature name '" + f.name + "'");
            if (f.is_numeric()) {
                if (!(f.range.min <= f.range.max))
                    throw ValidationError("feature '" + f.name + "': range min > max");
            } else {
                if (f.categories.empty())
                    throw ValidationError("feature '" + f.name + "': empty category set");
                std::set<std::string> cats(f.categories.begin(), f.categories.end());
                if (cats.size() != f.categories.size())
                    throw ValidationError("feature '" + f.name + "': duplicate categories");
            }
        }
        if (target_) {
            if (names.count(target_->name)) throw ValidationError("target '" + target_->name + "' is also a feature");
            if (target_->task == Task::Classification) {
                if (target_->classes.size() < 2)
                    throw ValidationError("classification target '" + target_->name + "' needs at least 2 classes");
                std::set<std::string> cls(target_->classes.begin(), target_->classes.end());
                if (cls.size() != target_->classes.size()) throw ValidationError("duplicate target classes");
            }
        }
    }

    const std::vector<FeatureSpec>& features() const { return features_; }
    const FeatureSpec& feature(std::size_t i) const { return features_.at(i); }
    std::size_t size() const { return features_.size(); }
    const std::optional<TargetSpec>& target() const { return target_; }

    std::optional<std::size_t> feature_index(std::string_view name) const {
        for (std::size_t i = 0; i < features_.size(); ++i)
            if (features_[i].name == name) return i;
        return std::nullopt;
    }

    std::size_t numeric_count() const {
        return static_cast<std::size_t>(
            std::count_if(features_.begin(), features_.end(), [](const auto& f) { return f.is_numeric(); }));
    }

    /// Number of columns after range-normalizing numerics and one-hot encoding categoricals.
    std::size_t encoded_dimension() const {
        std::size_t d = 0;
        for (const auto& f : features_) d += f.is_numeric() ? 1 : f.categories.size();
        return d;
    }

    Task task() const {
        if (!target_) throw ValidationError("schema has no target");
        return target_->task;
    }
    std::size_t class_count() const {
        return target_ && target_->task == Task::Classification ? target_->classes.size() : 0;
    }

    bool operator==(const Schema&) const = default;

private:
    std::vector<FeatureSpec> features_;
    std::optional<TargetSpec> target_;
};

using SchemaPtr = std::shared_ptr<const Schema>;

struct CategoryIndex {
    std::size_t index = 0;
    auto operator<=>(const CategoryIndex&) const = default;
};

using Value = std::variant<double, CategoryIndex>;

struct Instance {
    std::vector<Value> values;

    std::size_t size() const { return values.size(); }
    double numeric(std::size_t i) const { return std::get<double>(values[i]); }
    std::size_t category(std::size_t i) const { return std::get<CategoryIndex>(values[i]).index; }
    bool operator==(const Instance&) const = default;
};

struct InstanceHash {
    std::size_t operator()(const Instance& inst) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (const auto& v : inst.values) {
            std::size_t x = std::holds_alternative<double>(v) ? std::hash<double>{}(std::get<double>(v))
                                                               : std::get<CategoryIndex>(v).index * 31 + 7;
            h = (h ^ x) * 1099511628211ull;
        }
        return h;
    }
};

/// Throws ValidationError unless `inst` conforms to `schema`.
inline void validate_instance(const Schema& schema, const Instance& inst) {
    if (inst.size() != schema.size())
        throw ValidationError("arity mismatch: instance has " + std::to_string(inst.size()) + " values, schema has " +
                              std::to_string(schema.size()) + " features");
    for (std::size_t i = 0; i < inst.size(); ++i) {
        const auto& f = schema.feature(i);
        if (f.is_numeric()) {
            const double* v = std::get_if<double>(&inst.values[i]);
            if (!v) throw ValidationError("type mismatch at feature " + std::to_string(i) + " ('" + f.name + "'): expected numeric");
            if (!std::isfinite(*v)) throw ValidationError("non-finite value at feature " + std::to_string(i) + " ('" + f.name + "')");
        } else {
            const auto* c = std::get_if<CategoryIndex>(&inst.values[i]);
            if (!c) throw ValidationError("type mismatch at feature " + std::to_string(i) + " ('" + f.name + "'): expected categorical");
            if (c->index >= f.categories.size())
                throw ValidationError("out-of-vocabulary category at feature " + std::to_string(i) + " ('" + f.name + "')");
        }
    }
}

/// Row-oriented data conforming to a schema, with optional targets.
class Dataset {
public:
    Dataset() = default;
    Dataset(SchemaPtr schema, std::vector<Instance> rows, std::optional<std::vector<Label>> targets = std::nullopt)
        : schema_(std::move(schema)), rows_(std::move(rows)), targets_(std::move(targets)) {
        if (!schema_) throw ValidationError("dataset without schema");
        for (const auto& r : rows_) validate_instance(*schema_, r);
        if (targets_) {
            if (targets_->size() != rows_.size()) throw ValidationError("targets length differs from row count");
            if (!schema_->target()) throw ValidationError("targets given but schema has no target");
            for (Label t : *targets_) {
                if (!std::isfinite(t)) throw ValidationError("non-finite target");
                if (schema_->task() == Task::Classification &&
                    (t < 0 || t != std::floor(t) || t >= static_cast<double>(schema_->class_count())))
                    throw ValidationError("target is not a valid class index");
            }
        }
    }

    const Schema& schema() const { return *schema_; }
    const SchemaPtr& schema_ptr() const { return schema_; }
    const std::vector<Instance>& rows() const { return rows_; }
    const Instance& row(std::size_t i) const { return rows_.at(i); }
    std::size_t size() const { return rows_.size(); }
    bool has_targets() const { return targets_.has_value(); }
    const std::vector<Label>& targets() const {
        if (!targets_) throw DataError("dataset has no target column");
        return *targets_;
    }

    /// Subset by row indices, sharing the schema.
    Dataset subset(std::span<const std::size_t> indices) const {
        std::vector<Instance> rows;
        std::optional<std::vector<Label>> targets;
        if (targets_) targets.emplace();
        for (std::size_t i : indices) {
            rows.push_back(rows_.at(i));
            if (targets_) targets->push_back((*targets_)[i]);
        }
        return Dataset(schema_, std::move(rows), std::move(targets));
    }

    bool operator==(const Dataset& o) const {
        return *schema_ == *o.schema_ && rows_ == o.rows_ && targets_ == o.targets_;
    }

private:
    SchemaPtr schema_;
    std::vector<Instance> rows_;
    std::optional<std::vector<Label>> targets_;
};

// ---------------------------------------------------------------------------
// Formatting helpers

/// Shortest decimal representation that parses back to the same double.
inline std::string format_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_real(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::string label_to_string(const Schema& schema, Label label) {
    const auto& t = schema.target();
    if (t && t->task == Task::Classification) {
        auto idx = static_cast<std::size_t>(label);
        if (idx < t->classes.size()) return t->classes[idx];
    }
    return format_real(label);
}

inline json label_to_json(const Schema& schema, Label label) {
    const auto& t = schema.target();
    if (t && t->task == Task::Classification) return label_to_string(schema, label);
    return label;
}

inline Label label_from_json(const Schema& schema, const json& j) {
    const auto& t = schema.target();
    if (!t) throw ValidationError("schema has no target");
    if (t->task == Task::Regression) {
        if (!j.is_number()) throw ValidationError("regression prediction must be a number");
        return j.get<double>();
    }
    std::string name;
    if (j.is_string()) {
        name = j.get<std::string>();
    } else if (j.is_number()) {
        name = format_real(j.get<double>());
    } else {
        throw ValidationError("class prediction must be a string");
    }
    auto idx = t->class_index(name);
    if (!idx) throw ValidationError("unknown class '" + name + "'");
    return static_cast<Label>(*idx);
}

/// Numerics as numbers, categoricals as their category strings.
inline json instance_to_json(const Schema& schema, const Instance& inst) {
    json arr = json::array();
    for (std::size_t i = 0; i < inst.size(); ++i) {
        if (schema.feature(i).is_numeric())
            arr.push_back(inst.numeric(i));
        else
            arr.push_back(schema.feature(i).categories[inst.category(i)]);
    }
    return arr;
}

inline Instance instance_from_json(const Schema& schema, const json& j) {
    if (!j.is_array()) throw ValidationError("instance must be a JSON array");
    if (j.size() != schema.size())
        throw ValidationError("arity mismatch: instance has " + std::to_string(j.size()) + " values, schema has " +
                              std::to_string(schema.size()) + " features");
    Instance inst;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& f = schema.feature(i);
        if (f.is_numeric()) {
            if (!j[i].is_number()) throw ValidationError("type mismatch at feature " + std::to_string(i) + " ('" + f.name + "')");
            inst.values.emplace_back(j[i].get<double>());
        } else {
            if (!j[i].is_string()) throw ValidationError("type mismatch at feature " + std::to_string(i) + " ('" + f.name + "')");
            auto idx = f.category_index(j[i].get<std::string>());
            if (!idx) throw ValidationError("out-of-vocabulary category at feature " + std::to_string(i) + " ('" + f.name + "')");
            inst.values.emplace_back(CategoryIndex{*idx});
        }
    }
    validate_instance(schema, inst);
    return inst;
}

// ---------------------------------------------------------------------------
// Schema file

inline json schema_to_json(const Schema& schema) {
    json features = json::array();
    for (const auto& f : schema.features()) {
        json jf;
        jf["name"] = f.name;
        if (f.is_numeric()) {
            jf["kind"] = "numeric";
            jf["range"] = json::array({f.range.min, f.range.max});
        } else {
            jf["kind"] = "categorical";
            jf["categories"] = f.categories;
        }
        features.push_back(std::move(jf));
    }
    json j;
    j["features"] = std::move(features);
    if (const auto& t = schema.target()) {
        json jt;
        jt["name"] = t->name;
        if (t->task == Task::Classification) {
            jt["kind"] = "classification";
            jt["classes"] = t->classes;
        } else {
            jt["kind"] = "regression";
        }
        j["target"] = std::move(jt);
    } else {
        j["target"] = nullptr;
    }
    return j;
}

inline Schema schema_from_json(const json& j) {
    try {
        std::vector<FeatureSpec> features;
        for (const auto& jf : j.at("features")) {
            std::string kind = jf.at("kind").get<std::string>();
            std::string name = jf.at("name").get<std::string>();
            if (kind == "numeric") {
                const auto& r = jf.at("range");
                if (!r.is_array() || r.size() != 2) throw DataError("feature '" + name + "': range must be [min, max]");
                features.push_back(FeatureSpec::numeric(name, r[0].get<double>(), r[1].get<double>()));
            } else if (kind == "categorical") {
                features.push_back(FeatureSpec::categorical(name, jf.at("categories").get<std::vector<std::string>>()));
            } else {
                throw DataError("feature '" + name + "': unknown kind '" + kind + "'");
            }
        }
        std::optional<TargetSpec> target;
        if (j.contains("target") && !j["target"].is_null()) {
            const auto& jt = j["target"];
            TargetSpec t;
            t.name = jt.at("name").get<std::string>();
            std::string kind = jt.at("kind").get<std::string>();
            if (kind == "classification") {
                t.task = Task::Classification;
                t.classes = jt.at("classes").get<std::vector<std::string>>();
            } else if (kind == "regression") {
                t.task = Task::Regression;
            } else {
                throw DataError("target: unknown kind '" + kind + "'");
            }
            target = std::move(t);
        }
        return Schema(std::move(features), std::move(target));
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed schema: ") + e.what());
    } catch (const ValidationError& e) {
        throw DataError(std::string("invalid schema: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    }
};

/// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
inline CsvTable parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t i = 0;
    auto end_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        records.push_back(std::move(record));
        record.clear();
        field_started = false;
    };
    while (i < text.size()) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            field_started = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_record();
        } else {
            field.push_back(c);
            field_started = true;
        }
        ++i;
    }
    if (in_quotes) throw DataError("CSV: unterminated quoted field");
    if (field_started || !field.empty() || !record.empty()) end_record();

    CsvTable table;
    if (records.empty()) throw DataError("CSV: missing header row");
    table.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() == 1 && records[r][0].empty()) continue;  // blank line
        if (records[r].size() != table.header.size())
            throw DataError("CSV: row " + std::to_string(r - 1) + " has " + std::to_string(records[r].size()) +
                            " fields, header has " + std::to_string(table.header.size()));
        table.rows.push_back(std::move(records[r]));
    }
    return table;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("file not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed: " + path);
}

inline CsvTable read_csv_file(const std::string& path) { return parse_csv(read_text_file(path)); }

inline std::string csv_escape(std::string_view s) {
    bool quote = s.find_first_of(",\"\r\n") != std::string_view::npos ||
                 (!s.empty() && (s.front() == ' ' || s.back() == ' '));
    if (!quote) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

inline std::string csv_line(std::span<const std::string> fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += csv_escape(fields[i]);
    }
    line += '\n';
    return line;
}

// ---------------------------------------------------------------------------
// Dataset loading

struct LoadOptions {
    /// Target column name when inferring; ignored when a schema file names the target.
    std::optional<std::string> target;
    /// Target task when inferring; nullopt means infer from the column contents.
    std::optional<Task> task;
    /// Columns that are neither features nor target (e.g. a precomputed prediction column).
    std::vector<std::string> ignore_columns;
};

namespace detail {

inline bool all_numeric(const CsvTable& t, std::size_t col) {
    return std::all_of(t.rows.begin(), t.rows.end(), [&](const auto& r) { return parse_real(r[col]).has_value(); });
}

/// Numeric-looking class names sort numerically, others lexicographically.
inline std::vector<std::string> sorted_levels(const CsvTable& t, std::size_t col) {
    std::set<std::string> levels;
    for (const auto& r : t.rows) levels.insert(r[col]);
    std::vector<std::string> out(levels.begin(), levels.end());
    bool numeric = std::all_of(out.begin(), out.end(), [](const auto& s) { return parse_real(s).has_value(); });
    if (numeric)
        std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return *parse_real(a) < *parse_real(b); });
    return out;
}

inline void check_no_empty_cells(const CsvTable& t, std::span<const std::size_t> columns) {
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t c : columns)
            if (t.rows[r][c].empty())
                throw DataError("empty cell at row " + std::to_string(r) + ", column '" + t.header[c] + "'");
}

inline bool is_ignored(const LoadOptions& opt, std::string_view name) {
    return std::find(opt.ignore_columns.begin(), opt.ignore_columns.end(), name) != opt.ignore_columns.end();
}

}  // namespace detail

/// Infers a schema: a column is Numeric iff every cell parses as a real number.
inline Schema infer_schema(const CsvTable& table, const LoadOptions& opt = {}) {
    std::vector<std::size_t> used;
    for (std::size_t c = 0; c < table.header.size(); ++c)
        if (!detail::is_ignored(opt, table.header[c])) used.push_back(c);
    detail::check_no_empty_cells(table, used);
    if (table.rows.empty()) throw DataError("CSV has no data rows; cannot infer schema");

    std::optional<std::size_t> target_col;
    if (opt.target) {
        target_col = table.column(*opt.target);
        if (!target_col) throw DataError("target column '" + *opt.target + "' not found in CSV header");
    }
    std::vector<FeatureSpec> features;
    for (std::size_t c : used) {
        if (c == target_col) continue;
        const auto& name = table.header[c];
        if (detail::all_numeric(table, c)) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto& r : table.rows) {
                double v = *parse_real(r[c]);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            features.push_back(FeatureSpec::numeric(name, lo, hi));
        } else {
            features.push_back(FeatureSpec::categorical(name, detail::sorted_levels(table, c)));
        }
    }
    std::optional<TargetSpec> target;
    if (target_col) {
        TargetSpec t;
        t.name = table.header[*target_col];
        bool numeric = detail::all_numeric(table, *target_col);
        Task task;
        if (opt.task) {
            task = *opt.task;
        } else if (!numeric) {
            task = Task::Classification;
        } else {
            std::set<double> distinct;
            bool integral = true;
            for (const auto& r : table.rows) {
                double v = *parse_real(r[*target_col]);
                integral = integral && v == std::floor(v);
                distinct.insert(v);
            }
            task = integral && distinct.size() <= 20 ? Task::Classification : Task::Regression;
        }
        t.task = task;
        if (task == Task::Classification) {
            t.classes = detail::sorted_levels(table, *target_col);
            if (t.classes.size() < 2)
                throw DataError("classification target '" + t.name + "' has fewer than 2 distinct classes");
        } else if (!numeric) {
            throw DataError("regression target '" + t.name + "' has non-numeric cells");
        }
        target = std::move(t);
    }
    return Schema(std::move(features), std::move(target));
}

/// Builds a dataset from a parsed table against `schema`. Numeric ranges stay
/// as declared in the schema (values outside are stored unclamped).
inline Dataset dataset_from_table(const CsvTable& table, SchemaPtr schema, const LoadOptions& opt = {}) {
    const Schema& s = *schema;
    std::vector<std::size_t> feature_cols;
    for (const auto& f : s.features()) {
        auto c = table.column(f.name);
        if (!c) throw DataError("header/schema mismatch: feature '" + f.name + "' missing from CSV header");
        feature_cols.push_back(*c);
    }
    std::optional<std::size_t> target_col;
    if (s.target()) target_col = table.column(s.target()->name);
    for (const auto& h : table.header) {
        bool known = s.feature_index(h) || (s.target() && s.target()->name == h) || detail::is_ignored(opt, h);
        if (!known) throw DataError("header/schema mismatch: column '" + h + "' is not in the schema");
    }
    std::vector<std::size_t> checked = feature_cols;
    if (target_col) checked.push_back(*target_col);
    detail::check_no_empty_cells(table, checked);

    std::vector<Instance> rows;
    rows.reserve(table.rows.size());
    std::optional<std::vector<Label>> targets;
    if (target_col) targets.emplace();
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& rec = table.rows[r];
        Instance inst;
        inst.values.reserve(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto& f = s.feature(i);
            const auto& cell = rec[feature_cols[i]];
            if (f.is_numeric()) {
                auto v = parse_real(cell);
                if (!v) throw DataError("unparseable number '" + cell + "' at row " + std::to_string(r) + ", column '" + f.name + "'");
                inst.values.emplace_back(*v);
            } else {
                auto idx = f.category_index(cell);
                if (!idx) throw DataError("unknown category '" + cell + "' at row " + std::to_string(r) + ", column '" + f.name + "'");
                inst.values.emplace_back(CategoryIndex{*idx});
            }
        }
        rows.push_back(std::move(inst));
        if (target_col) {
            const auto& cell = rec[*target_col];
            if (s.task() == Task::Regression) {
                auto v = parse_real(cell);
                if (!v) throw DataError("unparseable target '" + cell + "' at row " + std::to_string(r));
                targets->push_back(*v);
            } else {
                auto idx = s.target()->class_index(cell);
                if (!idx) throw DataError("unknown class '" + cell + "' at row " + std::to_string(r));
                targets->push_back(static_cast<Label>(*idx));
            }
        }
    }
    return Dataset(std::move(schema), std::move(rows), std::move(targets));
}

inline Dataset load_dataset(const std::string& csv_path, const std::optional<std::string>& schema_path = std::nullopt,
                            const LoadOptions& opt = {}) {
    CsvTable table = read_csv_file(csv_path);
    SchemaPtr schema;
    if (schema_path) {
        json j;
        try {
            j = json::parse(read_text_file(*schema_path));
        } catch (const json::parse_error& e) {
            throw DataError("malformed schema file " + *schema_path + ": " + e.what());
        }
        schema = std::make_shared<const Schema>(schema_from_json(j));
    } else {
        schema = std::make_shared<const Schema>(infer_schema(table, opt));
    }
    return dataset_from_table(table, std::move(schema), opt);
}

inline std::string dataset_to_csv(const Dataset& data) {
    const Schema& s = data.schema();
    std::vector<std::string> header;
    for (const auto& f : s.features()) header.push_back(f.name);
    bool with_target = data.has_targets() && s.target();
    if (with_target) header.push_back(s.target()->name);
    std::string out = csv_line(header);
    for (std::size_t r = 0; r < data.size(); ++r) {
        std::vector<std::string> fields;
        const auto& inst = data.row(r);
        for (std::size_t i = 0; i < s.size(); ++i)
            fields.push_back(s.feature(i).is_numeric() ? format_real(inst.numeric(i))
                                                      : s.feature(i).categories[inst.category(i)]);
        if (with_target) fields.push_back(label_to_string(s, data.targets()[r]));
        out += csv_line(fields);
    }
    return out;
}

inline void write_dataset(const Dataset& data, const std::string& csv_path, const std::optional<std::string>& schema_path) {
    write_text_file(csv_path, dataset_to_csv(data));
    if (schema_path) write_text_file(*schema_path, schema_to_json(data.schema()).dump(2) + "\n");
}

}  // namespace araucana

#endif
