// Command-line front end: wires datasets, learners, the ensemble, metrics
// and the rank tests into reproducible experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "xcsge/xcsge.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace xcsge;

namespace {

// exit codes: 0 success, 2 config/IO, 3 data validation, 4 numeric failure
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string dataset_path;
    std::string schema_path;
    unsigned long seed = 0;
    int threads = 1;
    SplitPlan split;
    json members = json::array();
    std::string score = "squared_error";
    std::string metric = "rmse";
    bool classification = false;
    bool renormalize_proba = true;
    std::vector<double> eta_grid = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    double regularization = 0.0;
    bool coordinate_refine = false;
    int local_knn_k = 9;
    int lag_expansion = 1;
    bool standardize_features = true;
    std::string target_max = "none";  // "none", "auto", or a number
    std::vector<std::string> lag_columns;
    std::vector<int> lag_shifts;

    static json defaults() {
        return json{
            {"dataset", "dataset.csv"},
            {"schema", "schema.json"},
            {"seed", 0},
            {"threads", 1},
            {"split",
             {{"folds", 10}, {"base_fraction", 0.7}, {"shuffle_train", false}, {"by_group", false}}},
            {"members",
             json::array({json{{"type", "ridge"}, {"id", "ridge"}, {"lambda", 1.0}},
                          json{{"type", "knn"}, {"id", "knn"}, {"k", 9}},
                          json{{"type", "persistence"}, {"id", "persistence"}}})},
            {"score", "squared_error"},
            {"metric", "rmse"},
            {"classification", false},
            {"renormalize_proba", true},
            {"eta_grid", {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}},
            {"regularization", 0.0},
            {"coordinate_refine", false},
            {"local", {{"knn_k", 9}}},
            {"lag_expansion", 1},
            {"standardize", true},
            {"target_max", "none"},
            {"lag_features", {{"columns", json::array()}, {"shifts", json::array()}}}};
    }

    static ExperimentConfig load(const std::string& path) {
        if (!fs::exists(path)) throw ConfigError("config not found: " + path);
        std::ifstream in(path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError("config parse: " + std::string(e.what()));
        }
        ExperimentConfig c;
        try {
            c.dataset_path = j.at("dataset").get<std::string>();
            c.schema_path = j.at("schema").get<std::string>();
            c.seed = j.at("seed").get<unsigned long>();
            if (j.contains("threads")) c.threads = j.at("threads").get<int>();
            if (j.contains("split")) {
                const auto& s = j.at("split");
                if (s.contains("folds")) c.split.folds = s.at("folds").get<int>();
                if (s.contains("base_fraction"))
                    c.split.base_fraction = s.at("base_fraction").get<double>();
                if (s.contains("shuffle_train"))
                    c.split.shuffle_train = s.at("shuffle_train").get<bool>();
                if (s.contains("by_group")) c.split.by_group = s.at("by_group").get<bool>();
            }
            c.split.seed = c.seed;
            if (j.contains("members")) c.members = j.at("members");
            if (j.contains("score")) c.score = j.at("score").get<std::string>();
            if (j.contains("metric")) c.metric = j.at("metric").get<std::string>();
            if (j.contains("classification"))
                c.classification = j.at("classification").get<bool>();
            if (j.contains("renormalize_proba"))
                c.renormalize_proba = j.at("renormalize_proba").get<bool>();
            if (j.contains("eta_grid"))
                c.eta_grid = j.at("eta_grid").get<std::vector<double>>();
            if (j.contains("regularization"))
                c.regularization = j.at("regularization").get<double>();
            if (j.contains("coordinate_refine"))
                c.coordinate_refine = j.at("coordinate_refine").get<bool>();
            if (j.contains("local") && j.at("local").contains("knn_k"))
                c.local_knn_k = j.at("local").at("knn_k").get<int>();
            if (j.contains("lag_expansion"))
                c.lag_expansion = j.at("lag_expansion").get<int>();
            if (j.contains("standardize"))
                c.standardize_features = j.at("standardize").get<bool>();
            if (j.contains("target_max")) {
                if (j.at("target_max").is_number())
                    c.target_max = j.at("target_max").dump();
                else
                    c.target_max = j.at("target_max").get<std::string>();
            }
            if (j.contains("lag_features")) {
                const auto& lf = j.at("lag_features");
                if (lf.contains("columns"))
                    c.lag_columns = lf.at("columns").get<std::vector<std::string>>();
                if (lf.contains("shifts"))
                    c.lag_shifts = lf.at("shifts").get<std::vector<int>>();
            }
        } catch (const json::exception& e) {
            throw ConfigError("config: " + std::string(e.what()));
        }
        if (c.members.empty()) throw ConfigError("config: no members declared");
        return c;
    }

    XcsgeConfig ensemble_config() const {
        XcsgeConfig xc;
        xc.score = ScoreFunction::by_name(score);
        xc.local.knn_k = local_knn_k;
        xc.search.grid = eta_grid;
        xc.search.regularization = regularization;
        xc.search.coordinate_refine = coordinate_refine;
        xc.search.threads = threads;
        xc.classification = classification;
        xc.renormalize_proba = renormalize_proba;
        return xc;
    }
};

Dataset load_dataset(const ExperimentConfig& cfg, DatasetSchema* schema_out = nullptr) {
    if (!fs::exists(cfg.dataset_path))
        throw ConfigError("dataset not found: " + cfg.dataset_path);
    if (!fs::exists(cfg.schema_path))
        throw ConfigError("schema not found: " + cfg.schema_path);
    const DatasetSchema schema = DatasetSchema::load(cfg.schema_path);
    if (schema_out) *schema_out = schema;
    Dataset ds = load_csv(cfg.dataset_path, schema);
    if (!cfg.lag_columns.empty())
        ds = lag_features(ds, cfg.lag_columns, cfg.lag_shifts);
    return ds;
}

/// Fold-local preprocessing: standardization and target normalization are
/// fitted on the training rows only, applied everywhere.
Dataset preprocess_fold(const Dataset& raw, const ExperimentConfig& cfg,
                        const std::vector<Index>& fit_rows) {
    Dataset ds = raw;
    if (cfg.standardize_features) ds = standardize(ds, fit_rows);
    if (cfg.target_max == "auto") {
        double mx = 0.0;
        for (Index n : fit_rows) mx = std::max(mx, ds.targets.row(n).cwiseAbs().maxCoeff());
        if (!(mx > 0.0)) throw NonPositiveMax("target_max auto: training targets are all zero");
        ds = normalize_target_max(ds, mx);
    } else if (cfg.target_max != "none") {
        ds = normalize_target_max(ds, std::stod(cfg.target_max));
    }
    return ds;
}

std::vector<MemberPtr> build_members(const ExperimentConfig& cfg, const Dataset& ds,
                                     const std::vector<Index>& base_rows) {
    std::vector<MemberPtr> members;
    for (const auto& m : cfg.members) {
        const std::string type = m.at("type").get<std::string>();
        const std::string id = m.value("id", type);
        if (type == "ridge") {
            members.push_back(RidgeMember::fit(id, ds, base_rows, m.value("lambda", 1.0)));
        } else if (type == "knn") {
            const KnnMode mode = m.value("mode", std::string("regress")) == "classify"
                                     ? KnnMode::Classify
                                     : KnnMode::Regress;
            members.push_back(KnnMember::fit(id, ds, base_rows, m.value("k", 9), mode));
        } else if (type == "persistence") {
            members.push_back(std::make_shared<PersistenceMember>(
                id, ds.persistence_column_index(), ds.target_count()));
        } else if (type == "precomputed") {
            const std::string path = m.at("path").get<std::string>();
            if (!fs::exists(path)) throw ConfigError("precomputed file not found: " + path);
            members.push_back(load_precomputed(path, id, m.value("validate_proba", false)));
        } else {
            throw ConfigError("unknown member type: " + type);
        }
    }
    if (cfg.lag_expansion > 1) members = expand_time_lagged(members, cfg.lag_expansion);
    return members;
}

int max_member_lag(const std::vector<MemberPtr>& members) {
    int lag = 0;
    for (const auto& m : members) lag = std::max(lag, m->lag());
    return lag;
}

/// Pooled test metric of one predictor over all (sample, leadtime) pairs.
template <typename Predict>
double evaluate_metric(const Dataset& ds, const std::vector<Index>& rows, int history,
                       const std::string& metric, Predict&& predict) {
    std::vector<Vector> preds, truths;
    for (Index n : rows) {
        const Query q = ds.query(n, history);
        for (Index t = 0; t < ds.leadtimes(); ++t) {
            preds.push_back(predict(q, t));
            truths.push_back(ds.truth(n, t));
        }
    }
    if (preds.empty()) throw EmptySet("evaluate: no test samples");
    Matrix p(static_cast<Index>(preds.size()), preds.front().size());
    Matrix y(static_cast<Index>(truths.size()), truths.front().size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        p.row(static_cast<Index>(i)) = preds[i].transpose();
        y.row(static_cast<Index>(i)) = truths[i].transpose();
    }
    if (metric == "rmse") return std::sqrt((p - y).array().square().mean());
    if (metric == "r2") return r2(p, y).mean();
    if (metric == "log_loss") {
        std::vector<int> labels;
        for (Index i = 0; i < y.rows(); ++i) {
            Index best = 0;
            y.row(i).maxCoeff(&best);
            labels.push_back(static_cast<int>(best));
        }
        return log_loss(p, labels);
    }
    if (metric == "macro_f1") {
        std::vector<int> pl, tl;
        for (Index i = 0; i < y.rows(); ++i) {
            Index bp = 0, bt = 0;
            p.row(i).maxCoeff(&bp);
            y.row(i).maxCoeff(&bt);
            pl.push_back(static_cast<int>(bp));
            tl.push_back(static_cast<int>(bt));
        }
        return macro_f1(pl, tl, y.cols());
    }
    throw ConfigError("unknown metric: " + metric);
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write: " + path.string());
    out << content;
}

json preprocess_to_json(const Dataset& ds) {
    json j;
    if (ds.transform) {
        j["feature_mean"] = std::vector<double>(ds.transform->mean.data(),
                                                ds.transform->mean.data() + ds.transform->mean.size());
        j["feature_stddev"] = std::vector<double>(
            ds.transform->stddev.data(), ds.transform->stddev.data() + ds.transform->stddev.size());
    }
    if (ds.target_max) j["target_max"] = *ds.target_max;
    return j;
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              std::optional<unsigned long> seed_override, std::optional<int> threads_override) {
    ExperimentConfig cfg = ExperimentConfig::load(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (threads_override) cfg.threads = *threads_override;
    fs::create_directories(out_dir);

    Dataset raw = load_dataset(cfg);
    std::vector<Index> all_rows(static_cast<std::size_t>(raw.rows()));
    std::iota(all_rows.begin(), all_rows.end(), Index{0});
    Dataset ds = preprocess_fold(raw, cfg, all_rows);

    // single split: first base_fraction of the rows trains the members,
    // the remainder trains the ensemble
    const Index n_base = static_cast<Index>(cfg.split.base_fraction *
                                            static_cast<double>(ds.rows()));
    std::vector<Index> base_rows, ensemble_rows;
    for (Index i = 0; i < ds.rows(); ++i)
        (i < n_base ? base_rows : ensemble_rows).push_back(i);

    auto members = build_members(cfg, ds, ds.filter_issue_rows(base_rows));
    FitResult fit = fit_xcsge(members, ds, cfg.ensemble_config(), &ensemble_rows);

    json bundle;
    bundle["bundle_version"] = 1;
    bundle["seed"] = cfg.seed;
    bundle["preprocess"] = preprocess_to_json(ds);
    bundle["model"] = model_to_json(fit.model);
    write_text_file(fs::path(out_dir) / "model.json", bundle.dump() + "\n");

    std::ostringstream report;
    report << "seed: " << cfg.seed << "\n";
    report << "eta_global: " << fit.model.eta().global.value << "\n";
    report << "eta_local: " << fit.model.eta().local.value << "\n";
    report << "eta_time: " << fit.model.eta().time.value << "\n";
    report << "global weights (member x target dimension):\n";
    const WeightMatrix wg = fit.model.global_weights_at();
    for (Index j = 0; j < wg.rows(); ++j) {
        report << "  " << fit.model.members()[static_cast<std::size_t>(j)]->id() << ":";
        for (Index m = 0; m < wg.cols(); ++m) report << " " << wg(j, m);
        report << "\n";
    }
    write_text_file(fs::path(out_dir) / "training_report.txt", report.str());
    std::cout << "model written to " << (fs::path(out_dir) / "model.json").string() << "\n";
    return 0;
}

int cmd_crossval(const std::string& config_path, const std::string& out_dir,
                 const std::string& reference_model,
                 std::optional<unsigned long> seed_override,
                 std::optional<int> threads_override) {
    ExperimentConfig cfg = ExperimentConfig::load(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (threads_override) cfg.threads = *threads_override;
    cfg.split.seed = cfg.seed;
    fs::create_directories(out_dir);

    Dataset raw = load_dataset(cfg);
    const auto folds = kfold_splits(raw, cfg.split);

    MetricReport report;
    report.metric_name = cfg.metric;
    report.orientation = (cfg.metric == "r2" || cfg.metric == "macro_f1")
                             ? MetricOrientation::HigherBetter
                             : MetricOrientation::LowerBetter;

    bool names_set = false;
    for (const auto& fold : folds) {
        std::vector<Index> train_rows = fold.base;
        train_rows.insert(train_rows.end(), fold.ensemble.begin(), fold.ensemble.end());
        std::sort(train_rows.begin(), train_rows.end());
        Dataset ds = preprocess_fold(raw, cfg, train_rows);

        auto members = build_members(cfg, ds, ds.filter_issue_rows(fold.base));
        FitResult fit = fit_xcsge(members, ds, cfg.ensemble_config(), &fold.ensemble);
        const int history = max_member_lag(members) + 1;
        const auto test_rows = ds.filter_issue_rows(fold.test, history);

        std::vector<std::string> names;
        std::vector<double> values;
        for (const auto& member : members) {
            names.push_back(member->id());
            values.push_back(evaluate_metric(ds, test_rows, history, cfg.metric,
                                             [&](const Query& q, Index t) {
                                                 return member->predict(q, t);
                                             }));
        }
        names.push_back("xcsge");
        values.push_back(evaluate_metric(ds, test_rows, history, cfg.metric,
                                         [&](const Query& q, Index t) {
                                             return fit.model.predict(q, t);
                                         }));

        if (!names_set) {
            report.model_names = names;
            report.per_entity.assign(names.size(), {});
            names_set = true;
        }
        for (std::size_t i = 0; i < names.size(); ++i)
            report.per_entity[i].push_back(values[i]);
    }

    if (reference_model.empty())
        report.use_worst_as_reference();
    else
        report.reference_model = reference_model;

    std::ostringstream csv;
    csv << "seed," << cfg.seed << "\n";
    report.write_csv(csv);
    write_text_file(fs::path(out_dir) / "crossval_report.csv", csv.str());

    std::ostringstream perfold;
    perfold << "model";
    for (int f = 0; f < cfg.split.folds; ++f) perfold << ",fold_" << f;
    perfold << "\n";
    char buf[64];
    for (std::size_t i = 0; i < report.model_names.size(); ++i) {
        perfold << report.model_names[i];
        for (double v : report.per_entity[i]) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            perfold << "," << buf;
        }
        perfold << "\n";
    }
    write_text_file(fs::path(out_dir) / "crossval_per_fold.csv", perfold.str());

    std::ostringstream table;
    report.write_table(table);
    write_text_file(fs::path(out_dir) / "crossval_report.txt", table.str());
    std::cout << table.str();
    return 0;
}

int cmd_ranktest(const std::string& scores_path, double alpha, const std::string& orientation,
                 const std::string& out_path) {
    if (!fs::exists(scores_path)) throw ConfigError("scores file not found: " + scores_path);
    std::ifstream in(scores_path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty scores file");
    auto header = detail::split_csv_line(line);
    bool has_id_column = !header.empty() && (header[0] == "dataset" || header[0] == "entity");
    std::vector<std::string> names(header.begin() + (has_id_column ? 1 : 0), header.end());
    if (names.size() < 2) throw DegenerateShape("ranktest: need at least 2 model columns");

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("scores line " + std::to_string(lineno) + ": wrong cell count");
        std::vector<double> row;
        for (std::size_t c = has_id_column ? 1 : 0; c < cells.size(); ++c) {
            double v;
            if (!detail::parse_double(cells[c], v))
                throw ParseError("scores line " + std::to_string(lineno) +
                                 ": not a number: " + cells[c]);
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }

    Matrix scores(static_cast<Index>(rows.size()), static_cast<Index>(names.size()));
    for (std::size_t d = 0; d < rows.size(); ++d)
        for (std::size_t a = 0; a < names.size(); ++a)
            scores(static_cast<Index>(d), static_cast<Index>(a)) = rows[d][a];

    const auto orient = orientation == "higher" ? MetricOrientation::HigherBetter
                                                : MetricOrientation::LowerBetter;
    const RankMatrix ranks = rank_models(scores, orient);
    const FriedmanResult friedman = friedman_test(ranks);
    const NemenyiResult nemenyi = nemenyi_critical_difference(ranks, alpha);

    std::ostringstream out;
    write_cd_diagram_csv(out, names, nemenyi, friedman);
    out << "pair,significant\n";
    for (Index i = 0; i < nemenyi.significant.rows(); ++i)
        for (Index j = i + 1; j < nemenyi.significant.cols(); ++j)
            out << names[static_cast<std::size_t>(i)] << "|"
                << names[static_cast<std::size_t>(j)] << ","
                << (nemenyi.significant(i, j) ? 1 : 0) << "\n";
    write_text_file(out_path, out.str());

    std::cout << "friedman statistic " << friedman.statistic << ", p " << friedman.p_value
              << ", CD " << nemenyi.critical_difference << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& input_path,
                const std::string& schema_path, const std::string& leadtime_arg,
                bool explain, const std::string& out_path) {
    if (!fs::exists(model_path)) throw ConfigError("model not found: " + model_path);
    if (!fs::exists(input_path)) throw ConfigError("input not found: " + input_path);
    if (!fs::exists(schema_path)) throw ConfigError("schema not found: " + schema_path);

    std::ifstream in(model_path);
    json bundle;
    try {
        in >> bundle;
    } catch (const json::exception& e) {
        throw SerializationError("model parse: " + std::string(e.what()));
    }
    const XcsgeModel model = model_from_json(bundle.at("model"));

    const DatasetSchema schema = DatasetSchema::load(schema_path);
    Dataset ds = load_csv(input_path, schema);
    double target_scale = 1.0;
    if (bundle.contains("preprocess")) {
        const auto& pre = bundle.at("preprocess");
        if (pre.contains("feature_mean")) {
            StandardizeTransform tr;
            tr.mean = detail::vector_from_json(pre.at("feature_mean"));
            tr.stddev = detail::vector_from_json(pre.at("feature_stddev"));
            for (Index f = 0; f < ds.feature_count(); ++f)
                ds.features.col(f) =
                    (ds.features.col(f).array() - tr.mean(f)) / tr.stddev(f);
        }
        if (pre.contains("target_max")) target_scale = pre.at("target_max").get<double>();
    }

    int history = 1;
    for (const auto& m : model.members()) history = std::max(history, m->lag() + 1);
    const auto rows = ds.issue_rows(history);

    std::vector<Index> leadtimes;
    if (leadtime_arg == "all") {
        for (Index t = 0; t < model.leadtimes(); ++t) leadtimes.push_back(t);
    } else {
        leadtimes.push_back(static_cast<Index>(std::stol(leadtime_arg)));
    }

    std::ostringstream out;
    out << "sample_id,leadtime";
    for (Index m = 0; m < model.target_count(); ++m) out << ",p_" << m;
    if (explain)
        for (const auto& member : model.members())
            for (Index m = 0; m < model.target_count(); ++m)
                out << ",w_" << member->id() << "_" << m;
    out << "\n";
    char buf[64];
    for (Index n : rows) {
        const Query q = ds.query(n, history);
        for (Index t : leadtimes) {
            const Prediction pred = model.predict_explain(q, t);
            out << *q.sample_id() << "," << t;
            for (Index m = 0; m < model.target_count(); ++m) {
                std::snprintf(buf, sizeof buf, "%.17g", pred.value(m) * target_scale);
                out << "," << buf;
            }
            if (explain)
                for (Index j = 0; j < model.member_count(); ++j)
                    for (Index m = 0; m < model.target_count(); ++m) {
                        std::snprintf(buf, sizeof buf, "%.17g", pred.weights(j, m));
                        out << "," << buf;
                    }
            out << "\n";
        }
    }
    write_text_file(out_path, out.str());
    std::cout << "predictions written to " << out_path << "\n";
    return 0;
}

int cmd_synth(unsigned long seed, long n, int horizon, int block_len, double regime_a_fraction,
              double amp, double ar_phi, double ar_sigma, double walk_step,
              const std::string& out_dir) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.n = static_cast<Index>(n);
    cfg.horizon = horizon;
    cfg.block_len = block_len;
    cfg.regime_a_fraction = regime_a_fraction;
    cfg.amp = amp;
    cfg.ar_phi = ar_phi;
    cfg.ar_sigma = ar_sigma;
    cfg.walk_step = walk_step;

    fs::create_directories(out_dir);
    const Dataset ds = synth_regime_dataset(cfg);
    ds.save_csv((fs::path(out_dir) / "dataset.csv").string());
    synth_schema(cfg).save((fs::path(out_dir) / "schema.json").string());
    std::cout << "synthetic dataset (" << ds.rows() << " rows) written to " << out_dir << "\n";
    return 0;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Extended coopetitive soft-gating ensemble toolkit"};
    app.require_subcommand(0, 1);

    bool print_defaults = false;
    app.add_flag("--print-defaults", print_defaults, "print the default experiment config");

    std::string config_path, out_dir = "out", reference_model;
    std::optional<unsigned long> seed_override;
    std::optional<int> threads_override;
    if (const char* env = std::getenv("XCSGE_THREADS")) threads_override = std::atoi(env);

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config (json)")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option_function<unsigned long>(
            "--seed", [&](unsigned long s) { seed_override = s; }, "seed override");
        cmd->add_option_function<int>(
            "--threads", [&](int t) { threads_override = t; }, "worker thread count");
    };

    auto* train = app.add_subcommand("train", "fit members and the ensemble, write a model file");
    add_common(train);

    auto* crossval = app.add_subcommand("crossval", "k-fold evaluation with skill scores");
    add_common(crossval);
    crossval->add_option("--reference-model", reference_model,
                         "skill reference (default: worst mean)");

    std::string scores_path, rank_out = "ranktest.csv", orientation = "lower";
    double alpha = 0.05;
    auto* ranktest = app.add_subcommand("ranktest", "Friedman + Nemenyi ranked analysis");
    ranktest->add_option("--scores", scores_path, "scores csv (rows: datasets, cols: models)")
        ->required();
    ranktest->add_option("--alpha", alpha, "significance level (0.05 or 0.10)");
    ranktest->add_option("--orientation", orientation, "lower|higher is better");
    ranktest->add_option("--out", rank_out, "output csv");

    std::string model_path, input_path, schema_path, leadtime_arg = "all",
                predict_out = "predictions.csv";
    bool explain = false;
    auto* predict = app.add_subcommand("predict", "predict from a saved model");
    predict->add_option("--model", model_path, "model file from train")->required();
    predict->add_option("--input", input_path, "input csv")->required();
    predict->add_option("--schema", schema_path, "dataset schema")->required();
    predict->add_option("--leadtime", leadtime_arg, "leadtime index or 'all'");
    predict->add_flag("--explain", explain, "emit per-member weight columns");
    predict->add_option("--out", predict_out, "output csv");

    unsigned long synth_seed = 1;
    long synth_n = 1000;
    int synth_horizon = 4, synth_block = 50;
    double synth_frac = 0.5, synth_amp = 1.0, synth_phi = 0.9, synth_sigma = 0.1,
           synth_walk = 0.05;
    std::string synth_out = "synth";
    auto* synth = app.add_subcommand("synth", "generate a synthetic regime dataset");
    synth->add_option("--seed", synth_seed, "rng seed");
    synth->add_option("--n", synth_n, "sample count");
    synth->add_option("--horizon", synth_horizon, "leadtime horizon K");
    synth->add_option("--block-len", synth_block, "regime block length");
    synth->add_option("--regime-a-fraction", synth_frac, "fraction of regime-A blocks");
    synth->add_option("--amp", synth_amp, "regime component amplitude");
    synth->add_option("--ar-phi", synth_phi, "AR(1) coefficient");
    synth->add_option("--ar-sigma", synth_sigma, "AR(1) innovation stddev");
    synth->add_option("--walk-step", synth_walk, "x1 random-walk step");
    synth->add_option("--out", synth_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    if (print_defaults) {
        std::cout << ExperimentConfig::defaults().dump(2) << "\n";
        return 0;
    }
    if (train->parsed())
        return cmd_train(config_path, out_dir, seed_override, threads_override);
    if (crossval->parsed())
        return cmd_crossval(config_path, out_dir, reference_model, seed_override,
                            threads_override);
    if (ranktest->parsed()) return cmd_ranktest(scores_path, alpha, orientation, rank_out);
    if (predict->parsed())
        return cmd_predict(model_path, input_path, schema_path, leadtime_arg, explain,
                           predict_out);
    if (synth->parsed())
        return cmd_synth(synth_seed, synth_n, synth_horizon, synth_block, synth_frac,
                         synth_amp, synth_phi, synth_sigma, synth_walk, synth_out);
    std::cout << app.help();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const SchemaMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const TimestampOrderError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const IncompleteCoverage& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ShiftTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const TooFewSamples& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const TooFewGroups& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
