#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xcsge/members.hpp"
#include "xcsge/types.hpp"

namespace xcsge {

/// Day-ahead style leadtime framing: a sample issued at row n has its
/// leadtime-t truth at row n + k_min + t*delta, t in {0, ..., K} with
/// K = (k_max - k_min) / delta.
struct LeadtimeFrame {
    int k_min = 0;
    int k_max = 0;
    int delta = 1;

    int horizon() const { return (k_max - k_min) / delta; }
};

struct DatasetSchema {
    std::vector<std::string> feature_columns;
    std::vector<std::string> target_columns;
    std::string timestamp_column;
    std::optional<std::string> group_column;
    std::optional<std::string> persistence_column;
    std::optional<LeadtimeFrame> leadtime;
    std::optional<double> target_max;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["features"] = feature_columns;
        j["targets"] = target_columns;
        j["timestamp"] = timestamp_column;
        if (group_column) j["group"] = *group_column;
        if (persistence_column) j["persistence_feature"] = *persistence_column;
        if (leadtime)
            j["leadtime"] = {{"k_min", leadtime->k_min},
                             {"k_max", leadtime->k_max},
                             {"delta", leadtime->delta}};
        if (target_max) j["target_max"] = *target_max;
        return j;
    }

    static DatasetSchema from_json(const nlohmann::json& j) {
        DatasetSchema s;
        try {
            s.feature_columns = j.at("features").get<std::vector<std::string>>();
            s.target_columns = j.at("targets").get<std::vector<std::string>>();
            s.timestamp_column = j.at("timestamp").get<std::string>();
            if (j.contains("group")) s.group_column = j.at("group").get<std::string>();
            if (j.contains("persistence_feature"))
                s.persistence_column = j.at("persistence_feature").get<std::string>();
            if (j.contains("leadtime")) {
                LeadtimeFrame f;
                f.k_min = j.at("leadtime").at("k_min").get<int>();
                f.k_max = j.at("leadtime").at("k_max").get<int>();
                f.delta = j.at("leadtime").at("delta").get<int>();
                if (f.delta <= 0 || f.k_max < f.k_min ||
                    (f.k_max - f.k_min) % f.delta != 0)
                    throw SchemaMismatch("schema: invalid leadtime frame");
                s.leadtime = f;
            }
            if (j.contains("target_max")) s.target_max = j.at("target_max").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw SchemaMismatch(std::string("schema: ") + e.what());
        }
        if (s.feature_columns.empty() || s.target_columns.empty())
            throw SchemaMismatch("schema: features and targets must be non-empty");
        return s;
    }

    static DatasetSchema load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open schema file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("schema parse: ") + e.what());
        }
        return from_json(j);
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw ParseError("cannot write schema file: " + path);
        out << to_json().dump(2) << "\n";
    }
};

/// Stored feature standardization, fitted on a designated row set.
struct StandardizeTransform {
    Vector mean;
    Vector stddev;              ///< constant columns carry stddev 1
    std::vector<int> constant;  ///< indices of zero-variance columns
};

class Dataset {
public:
    Matrix features;                    ///< N x F
    Matrix targets;                     ///< N x M
    std::vector<std::string> timestamps;
    std::vector<std::string> groups;    ///< empty or length N
    std::vector<std::string> feature_names;
    std::vector<std::string> target_names;
    std::optional<LeadtimeFrame> frame;
    std::optional<std::string> persistence_feature;
    std::optional<StandardizeTransform> transform;
    std::optional<double> target_max;
    Index dropped_rows = 0;             ///< rows rejected at ingestion

    Index rows() const { return features.rows(); }
    Index feature_count() const { return features.cols(); }
    Index target_count() const { return targets.cols(); }

    /// Leadtime steps covered by one sample (1 without framing).
    Index leadtimes() const { return frame ? frame->horizon() + 1 : 1; }

    Index target_row(Index issue, Index t) const {
        if (t < 0 || t >= leadtimes())
            throw LeadtimeOutOfRange("dataset: leadtime out of range");
        return frame ? issue + frame->k_min + t * frame->delta : issue;
    }

    /// Rows usable as issue points: enough history for `min_history` frames
    /// and the full horizon inside the dataset.
    std::vector<Index> issue_rows(int min_history = 1) const {
        std::vector<Index> out;
        const Index last_offset = frame ? frame->k_min + (leadtimes() - 1) * frame->delta : 0;
        for (Index n = min_history - 1; n + last_offset < rows(); ++n)
            out.push_back(n);
        return out;
    }

    /// Subset of `candidate` usable as issue points.
    std::vector<Index> filter_issue_rows(const std::vector<Index>& candidate,
                                         int min_history = 1) const {
        const Index last_offset = frame ? frame->k_min + (leadtimes() - 1) * frame->delta : 0;
        std::vector<Index> out;
        for (Index n : candidate)
            if (n >= min_history - 1 && n + last_offset < rows()) out.push_back(n);
        return out;
    }

    Vector truth(Index issue, Index t) const {
        return targets.row(target_row(issue, t)).transpose();
    }

    /// Builds a query for issue row n with `depth` history frames.
    Query query(Index n, int depth = 1) const {
        if (n - (depth - 1) < 0)
            throw MissingHistory("dataset: not enough history at row " + std::to_string(n));
        std::vector<Vector> frames;
        frames.reserve(static_cast<std::size_t>(depth));
        for (int l = 0; l < depth; ++l)
            frames.push_back(features.row(n - l).transpose());
        Query q(std::move(frames));
        q.set_sample_id(std::to_string(n));
        return q;
    }

    Index persistence_column_index() const {
        if (!persistence_feature)
            throw SchemaMismatch("dataset: no persistence feature declared");
        for (std::size_t i = 0; i < feature_names.size(); ++i)
            if (feature_names[i] == *persistence_feature) return static_cast<Index>(i);
        throw SchemaMismatch("dataset: persistence feature not found: " + *persistence_feature);
    }

    Dataset select_rows(const std::vector<Index>& idx) const {
        Dataset d = *this;
        d.features.resize(static_cast<Index>(idx.size()), features.cols());
        d.targets.resize(static_cast<Index>(idx.size()), targets.cols());
        d.timestamps.clear();
        d.groups.clear();
        for (std::size_t i = 0; i < idx.size(); ++i) {
            d.features.row(static_cast<Index>(i)) = features.row(idx[i]);
            d.targets.row(static_cast<Index>(i)) = targets.row(idx[i]);
            d.timestamps.push_back(timestamps[static_cast<std::size_t>(idx[i])]);
            if (!groups.empty()) d.groups.push_back(groups[static_cast<std::size_t>(idx[i])]);
        }
        return d;
    }

    void save_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw ParseError("cannot write csv: " + path);
        out << "timestamp";
        for (const auto& f : feature_names) out << "," << f;
        for (const auto& t : target_names) out << "," << t;
        if (!groups.empty()) out << ",group";
        out << "\n";
        char buf[64];
        for (Index n = 0; n < rows(); ++n) {
            out << timestamps[static_cast<std::size_t>(n)];
            for (Index f = 0; f < features.cols(); ++f) {
                std::snprintf(buf, sizeof buf, "%.17g", features(n, f));
                out << "," << buf;
            }
            for (Index m = 0; m < targets.cols(); ++m) {
                std::snprintf(buf, sizeof buf, "%.17g", targets(n, m));
                out << "," << buf;
            }
            if (!groups.empty()) out << "," << groups[static_cast<std::size_t>(n)];
            out << "\n";
        }
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

inline bool is_missing(const std::string& cell) {
    if (cell.empty()) return true;
    std::string low;
    for (char c : cell) low.push_back(static_cast<char>(std::tolower(c)));
    return low == "nan" || low == "na" || low == "null";
}

inline bool parse_double(const std::string& cell, double& out) {
    const char* first = cell.data();
    const char* last = first + cell.size();
    while (first != last && *first == ' ') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

inline bool timestamps_nondecreasing(const std::vector<std::string>& ts) {
    bool all_numeric = true;
    std::vector<double> num(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (!parse_double(ts[i], num[i])) { all_numeric = false; break; }
    for (std::size_t i = 1; i < ts.size(); ++i) {
        if (all_numeric ? num[i] < num[i - 1] : ts[i] < ts[i - 1]) return false;
    }
    return true;
}

} // namespace detail

/// Loads a schema-described CSV. Rows with missing values are dropped and
/// counted; non-numeric cells in declared numeric columns are an error.
inline Dataset load_csv(const std::string& path, const DatasetSchema& schema) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open csv: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty csv: " + path);
    const auto header = detail::split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;

    auto require_col = [&](const std::string& name) {
        auto it = col.find(name);
        if (it == col.end())
            throw SchemaMismatch("csv missing column: " + name);
        return it->second;
    };

    std::vector<std::size_t> fcols, tcols;
    for (const auto& f : schema.feature_columns) fcols.push_back(require_col(f));
    for (const auto& t : schema.target_columns) tcols.push_back(require_col(t));
    const std::size_t tscol = require_col(schema.timestamp_column);
    std::optional<std::size_t> gcol;
    if (schema.group_column) gcol = require_col(*schema.group_column);

    std::vector<std::vector<double>> feat_rows, targ_rows;
    std::vector<std::string> timestamps, groups;
    Index dropped = 0;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("csv line " + std::to_string(lineno) + ": expected " +
                             std::to_string(header.size()) + " cells, got " +
                             std::to_string(cells.size()));
        bool missing = false;
        for (std::size_t c : fcols) missing = missing || detail::is_missing(cells[c]);
        for (std::size_t c : tcols) missing = missing || detail::is_missing(cells[c]);
        if (missing) { ++dropped; continue; }

        std::vector<double> fr, tr;
        auto parse_cell = [&](std::size_t c) {
            double v;
            if (!detail::parse_double(cells[c], v))
                throw ParseError("csv line " + std::to_string(lineno) + ", column '" +
                                 header[c] + "': not a number: '" + cells[c] + "'");
            return v;
        };
        for (std::size_t c : fcols) fr.push_back(parse_cell(c));
        for (std::size_t c : tcols) tr.push_back(parse_cell(c));
        feat_rows.push_back(std::move(fr));
        targ_rows.push_back(std::move(tr));
        timestamps.push_back(cells[tscol]);
        if (gcol) groups.push_back(cells[*gcol]);
    }

    if (!detail::timestamps_nondecreasing(timestamps))
        throw TimestampOrderError("csv: timestamps must be non-decreasing");

    Dataset d;
    d.feature_names = schema.feature_columns;
    d.target_names = schema.target_columns;
    d.frame = schema.leadtime;
    d.persistence_feature = schema.persistence_column;
    d.target_max = schema.target_max;
    d.dropped_rows = dropped;
    d.features.resize(static_cast<Index>(feat_rows.size()), static_cast<Index>(fcols.size()));
    d.targets.resize(static_cast<Index>(targ_rows.size()), static_cast<Index>(tcols.size()));
    for (std::size_t n = 0; n < feat_rows.size(); ++n) {
        for (std::size_t f = 0; f < fcols.size(); ++f)
            d.features(static_cast<Index>(n), static_cast<Index>(f)) = feat_rows[n][f];
        for (std::size_t m = 0; m < tcols.size(); ++m)
            d.targets(static_cast<Index>(n), static_cast<Index>(m)) = targ_rows[n][m];
    }
    d.timestamps = std::move(timestamps);
    d.groups = std::move(groups);
    return d;
}

/// Standardizes every feature with mean/stddev fitted on `fit_on`, applied
/// to all rows. Zero-variance columns pass through and are flagged.
inline Dataset standardize(const Dataset& ds, const std::vector<Index>& fit_on) {
    if (fit_on.empty()) throw EmptyFitSet("standardize: empty fit set");
    const Index f_count = ds.feature_count();
    StandardizeTransform tr;
    tr.mean = Vector::Zero(f_count);
    tr.stddev = Vector::Ones(f_count);
    for (Index f = 0; f < f_count; ++f) {
        double sum = 0.0;
        for (Index n : fit_on) sum += ds.features(n, f);
        const double mu = sum / static_cast<double>(fit_on.size());
        double ss = 0.0;
        for (Index n : fit_on) {
            const double d = ds.features(n, f) - mu;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(fit_on.size()));
        tr.mean(f) = mu;
        if (sd > 0.0) {
            tr.stddev(f) = sd;
        } else {
            tr.constant.push_back(static_cast<int>(f));
            tr.mean(f) = 0.0;  // constant columns pass through unchanged
        }
    }
    Dataset out = ds;
    for (Index f = 0; f < f_count; ++f)
        out.features.col(f) = (ds.features.col(f).array() - tr.mean(f)) / tr.stddev(f);
    out.transform = tr;
    return out;
}

/// Applies a stored transform to a raw feature vector.
inline Vector apply_transform(const StandardizeTransform& tr, const Vector& x) {
    if (x.size() != tr.mean.size())
        throw DimensionMismatch("apply_transform: feature dimensionality mismatch");
    return (x.array() - tr.mean.array()) / tr.stddev.array();
}

inline Dataset normalize_target_max(const Dataset& ds, double max_value) {
    if (!(max_value > 0.0)) throw NonPositiveMax("normalize_target_max: max must be > 0");
    Dataset out = ds;
    out.targets = ds.targets / max_value;
    out.target_max = max_value;
    return out;
}

/// Adds time-shifted copies of the named columns; shift +s takes the value
/// s rows ahead, -s the value s rows back. Boundary rows without a source
/// are dropped; the count is reported via `dropped_rows`.
inline Dataset lag_features(const Dataset& ds, const std::vector<std::string>& columns,
                            const std::vector<int>& shifts) {
    const Index n_rows = ds.rows();
    int max_fwd = 0, max_back = 0;
    for (int s : shifts) {
        if (std::abs(s) >= n_rows) throw ShiftTooLarge("lag_features: |shift| >= row count");
        max_fwd = std::max(max_fwd, s);
        max_back = std::max(max_back, -s);
    }
    std::vector<Index> src_cols;
    for (const auto& c : columns) {
        auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(), c);
        if (it == ds.feature_names.end())
            throw SchemaMismatch("lag_features: unknown column " + c);
        src_cols.push_back(static_cast<Index>(it - ds.feature_names.begin()));
    }

    std::vector<std::pair<Index, int>> added;  // (source column, shift)
    Dataset out = ds;
    for (std::size_t ci = 0; ci < src_cols.size(); ++ci)
        for (int s : shifts) {
            if (s == 0) continue;  // shift 0 is the column itself
            added.emplace_back(src_cols[ci], s);
            const char sign = s > 0 ? '+' : '-';
            out.feature_names.push_back(columns[ci] + "_t" + sign +
                                        std::to_string(std::abs(s)));
        }

    const Index kept = n_rows - max_fwd - max_back;
    Matrix feat(kept, ds.feature_count() + static_cast<Index>(added.size()));
    Matrix targ(kept, ds.target_count());
    std::vector<std::string> ts, gr;
    for (Index i = 0; i < kept; ++i) {
        const Index n = i + max_back;
        feat.block(i, 0, 1, ds.feature_count()) = ds.features.row(n);
        for (std::size_t a = 0; a < added.size(); ++a)
            feat(i, ds.feature_count() + static_cast<Index>(a)) =
                ds.features(n + added[a].second, added[a].first);
        targ.row(i) = ds.targets.row(n);
        ts.push_back(ds.timestamps[static_cast<std::size_t>(n)]);
        if (!ds.groups.empty()) gr.push_back(ds.groups[static_cast<std::size_t>(n)]);
    }
    out.features = std::move(feat);
    out.targets = std::move(targ);
    out.timestamps = std::move(ts);
    out.groups = std::move(gr);
    out.dropped_rows = ds.dropped_rows + (n_rows - kept);
    return out;
}

struct SplitPlan {
    int folds = 10;
    double base_fraction = 0.7;  ///< of the training part; rest is the ensemble set
    bool shuffle_train = false;  ///< test blocks stay contiguous and unshuffled
    unsigned long seed = 0;
    bool by_group = false;
};

struct FoldSplit {
    std::vector<Index> base;
    std::vector<Index> ensemble;
    std::vector<Index> test;
};

namespace detail {

inline std::vector<std::vector<Index>> contiguous_blocks(Index n, int k) {
    std::vector<std::vector<Index>> blocks(static_cast<std::size_t>(k));
    for (Index i = 0; i < n; ++i)
        blocks[static_cast<std::size_t>(i * k / n)].push_back(i);
    return blocks;
}

} // namespace detail

/// K-fold splits with contiguous, unshuffled test blocks; the remaining
/// rows are split base/ensemble by `base_fraction`. With `by_group`, whole
/// groups are assigned to one side only.
inline std::vector<FoldSplit> kfold_splits(const Dataset& ds, const SplitPlan& plan) {
    if (plan.folds < 2) throw DegenerateShape("kfold_splits: need at least 2 folds");
    const Index n = ds.rows();

    std::vector<std::vector<Index>> units;  // each unit ends up wholly on one side
    if (plan.by_group) {
        if (ds.groups.empty()) throw SchemaMismatch("kfold_splits: dataset has no groups");
        std::vector<std::string> order;
        std::map<std::string, std::vector<Index>> members;
        for (Index i = 0; i < n; ++i) {
            const auto& g = ds.groups[static_cast<std::size_t>(i)];
            if (members.find(g) == members.end()) order.push_back(g);
            members[g].push_back(i);
        }
        if (static_cast<int>(order.size()) < plan.folds)
            throw TooFewGroups("kfold_splits: fewer groups than folds");
        for (const auto& g : order) units.push_back(members[g]);
    } else {
        if (n < plan.folds * 3)
            throw TooFewSamples("kfold_splits: too few samples for fold plan");
        for (Index i = 0; i < n; ++i) units.push_back({i});
    }

    const auto blocks = detail::contiguous_blocks(static_cast<Index>(units.size()), plan.folds);
    std::vector<FoldSplit> out;
    for (int f = 0; f < plan.folds; ++f) {
        FoldSplit split;
        std::vector<std::size_t> train_units;
        for (int b = 0; b < plan.folds; ++b)
            for (Index u : blocks[static_cast<std::size_t>(b)]) {
                if (b == f)
                    for (Index row : units[static_cast<std::size_t>(u)])
                        split.test.push_back(row);
                else
                    train_units.push_back(static_cast<std::size_t>(u));
            }
        if (plan.shuffle_train) {
            std::mt19937_64 rng(plan.seed + static_cast<unsigned long>(f));
            std::shuffle(train_units.begin(), train_units.end(), rng);
        }
        const std::size_t n_base = static_cast<std::size_t>(
            plan.base_fraction * static_cast<double>(train_units.size()) + 0.5);
        for (std::size_t i = 0; i < train_units.size(); ++i) {
            auto& dst = i < n_base ? split.base : split.ensemble;
            for (Index row : units[train_units[i]]) dst.push_back(row);
        }
        if (split.base.empty() || split.ensemble.empty())
            throw TooFewSamples("kfold_splits: base/ensemble split is empty");
        out.push_back(std::move(split));
    }
    return out;
}

/// Configuration of the synthetic regime benchmark. The feature space is
/// split into two regions (regime A: x0 < 0); each region follows a
/// different functional form, and the target carries an AR(1) component so
/// predictability decays over the forecast horizon.
struct SynthConfig {
    unsigned long seed = 1;
    Index n = 1000;
    int block_len = 50;          ///< regime persists for this many rows
    double regime_a_fraction = 0.5;
    double amp = 1.0;            ///< scale of the regime component
    double ar_phi = 0.9;         ///< AR(1) coefficient of the target noise
    double ar_sigma = 0.1;       ///< AR(1) innovation stddev
    double walk_step = 0.05;     ///< step of the reflected x1 random walk
    int horizon = 0;             ///< K; frame (k_min=0, k_max=K, delta=1)
};

/// Regime component of the synthetic target: linear in x1 inside regime A,
/// a step function inside regime B.
inline double synth_regime_component(double x0, double x1) {
    return x0 < 0.0 ? 1.5 * x1 : (x1 > 0.0 ? 1.0 : -1.0);
}

inline Dataset synth_regime_dataset(const SynthConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const Index total = cfg.n + 1;  // one warmup row for y_prev
    std::vector<double> x0(static_cast<std::size_t>(total)), x1(static_cast<std::size_t>(total)),
        y(static_cast<std::size_t>(total));
    double walk = 2.0 * unit(rng) - 1.0;
    double z = gauss(rng) * cfg.ar_sigma / std::sqrt(1.0 - cfg.ar_phi * cfg.ar_phi);
    long a_blocks = 0;
    bool regime_a = false;
    for (Index i = 0; i < total; ++i) {
        if (i % cfg.block_len == 0) {
            const long block = i / cfg.block_len;
            // block is regime A iff the running fraction of A blocks stays below target
            regime_a = static_cast<double>(a_blocks) <
                       cfg.regime_a_fraction * static_cast<double>(block + 1);
            if (regime_a) ++a_blocks;
        }
        const double center = regime_a ? -0.5 : 0.5;
        x0[static_cast<std::size_t>(i)] = center + 0.4 * (2.0 * unit(rng) - 1.0);

        walk += cfg.walk_step * (2.0 * unit(rng) - 1.0);
        if (walk > 1.0) walk = 2.0 - walk;
        if (walk < -1.0) walk = -2.0 - walk;
        x1[static_cast<std::size_t>(i)] = walk;

        z = cfg.ar_phi * z + cfg.ar_sigma * gauss(rng);
        y[static_cast<std::size_t>(i)] =
            cfg.amp * synth_regime_component(x0[static_cast<std::size_t>(i)],
                                             x1[static_cast<std::size_t>(i)]) +
            z;
    }

    Dataset d;
    d.feature_names = {"x0", "x1", "y_prev"};
    d.target_names = {"y"};
    d.persistence_feature = "y_prev";
    if (cfg.horizon > 0) d.frame = LeadtimeFrame{0, cfg.horizon, 1};
    d.features.resize(cfg.n, 3);
    d.targets.resize(cfg.n, 1);
    for (Index i = 0; i < cfg.n; ++i) {
        const std::size_t s = static_cast<std::size_t>(i + 1);
        d.features(i, 0) = x0[s];
        d.features(i, 1) = x1[s];
        d.features(i, 2) = y[s - 1];
        d.targets(i, 0) = y[s];
        d.timestamps.push_back(std::to_string(i));
    }
    return d;
}

inline DatasetSchema synth_schema(const SynthConfig& cfg) {
    DatasetSchema s;
    s.feature_columns = {"x0", "x1", "y_prev"};
    s.target_columns = {"y"};
    s.timestamp_column = "timestamp";
    s.persistence_column = "y_prev";
    if (cfg.horizon > 0) s.leadtime = LeadtimeFrame{0, cfg.horizon, 1};
    return s;
}

} // namespace xcsge
