#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <set>

#include "xcsge/data.hpp"

using namespace xcsge;

namespace {

struct TempCsv {
    std::string path;
    TempCsv(const std::string& name, const std::string& content) : path(name) {
        std::ofstream out(path);
        out << content;
    }
    ~TempCsv() { std::remove(path.c_str()); }
};

DatasetSchema basic_schema() {
    DatasetSchema s;
    s.feature_columns = {"x0", "x1"};
    s.target_columns = {"y"};
    s.timestamp_column = "ts";
    return s;
}

} // namespace

TEST_CASE("csv ingestion drops missing rows and counts them") {
    TempCsv csv("data_test1.csv",
                "ts,x0,x1,y\n"
                "0,1.0,2.0,3.0\n"
                "1,NaN,2.0,3.0\n"
                "2,1.5,,4.0\n"
                "3,2.0,2.5,5.0\n");
    const Dataset ds = load_csv(csv.path, basic_schema());
    CHECK(ds.rows() == 2);
    CHECK(ds.dropped_rows == 2);
    CHECK(ds.features(1, 0) == 2.0);
    CHECK(ds.timestamps[1] == "3");
}

TEST_CASE("non-numeric cells name the line and column") {
    TempCsv csv("data_test2.csv",
                "ts,x0,x1,y\n"
                "0,1.0,2.0,3.0\n"
                "1,oops,2.0,3.0\n");
    try {
        load_csv(csv.path, basic_schema());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("x0") != std::string::npos);
        CHECK(msg.find("oops") != std::string::npos);
    }
}

TEST_CASE("csv validation errors") {
    TempCsv bad_order("data_test3.csv",
                      "ts,x0,x1,y\n"
                      "5,1.0,2.0,3.0\n"
                      "2,1.0,2.0,3.0\n");
    CHECK_THROWS_AS(load_csv(bad_order.path, basic_schema()), TimestampOrderError);

    TempCsv short_row("data_test4.csv",
                      "ts,x0,x1,y\n"
                      "0,1.0,2.0\n");
    CHECK_THROWS_AS(load_csv(short_row.path, basic_schema()), ParseError);

    TempCsv missing_col("data_test5.csv", "ts,x0,y\n0,1.0,3.0\n");
    CHECK_THROWS_AS(load_csv(missing_col.path, basic_schema()), SchemaMismatch);
    CHECK_THROWS_AS(load_csv("no_such_file.csv", basic_schema()), ParseError);
}

TEST_CASE("schema json round trip") {
    DatasetSchema s = basic_schema();
    s.persistence_column = "x1";
    s.leadtime = LeadtimeFrame{1, 5, 2};
    s.target_max = 8.5;
    const DatasetSchema back = DatasetSchema::from_json(s.to_json());
    CHECK(back.feature_columns == s.feature_columns);
    CHECK(*back.persistence_column == "x1");
    CHECK(back.leadtime->k_min == 1);
    CHECK(back.leadtime->horizon() == 2);
    CHECK(*back.target_max == 8.5);

    nlohmann::json bad = s.to_json();
    bad["leadtime"]["delta"] = 0;
    CHECK_THROWS_AS(DatasetSchema::from_json(bad), SchemaMismatch);
    bad = s.to_json();
    bad.erase("targets");
    CHECK_THROWS_AS(DatasetSchema::from_json(bad), SchemaMismatch);
}

TEST_CASE("leadtime framing maps issue rows to truth rows") {
    Dataset ds;
    ds.feature_names = {"x"};
    ds.target_names = {"y"};
    ds.features = Matrix::Zero(10, 1);
    ds.targets.resize(10, 1);
    for (Index n = 0; n < 10; ++n) {
        ds.targets(n, 0) = static_cast<double>(n);
        ds.timestamps.push_back(std::to_string(n));
    }
    ds.frame = LeadtimeFrame{1, 5, 2};

    CHECK(ds.leadtimes() == 3);
    CHECK(ds.target_row(2, 0) == 3);
    CHECK(ds.target_row(2, 2) == 7);
    CHECK(ds.truth(2, 1)(0) == 5.0);
    CHECK_THROWS_AS(ds.target_row(2, 3), LeadtimeOutOfRange);

    const auto rows = ds.issue_rows();
    CHECK(rows.front() == 0);
    CHECK(rows.back() == 4);  // row 4 + offset 5 = last row

    const auto filtered = ds.filter_issue_rows({0, 1, 4, 5, 9}, 2);
    CHECK(filtered == std::vector<Index>{1, 4});

    const Query q = ds.query(3, 2);
    CHECK(q.history_depth() == 2);
    CHECK(*q.sample_id() == "3");
    CHECK_THROWS_AS(ds.query(0, 2), MissingHistory);
}

TEST_CASE("standardization fits on the designated rows only") {
    Dataset ds;
    ds.feature_names = {"a", "b"};
    ds.target_names = {"y"};
    ds.features.resize(4, 2);
    ds.features << 0.0, 7.0, 2.0, 7.0, 4.0, 7.0, 100.0, 7.0;
    ds.targets = Matrix::Zero(4, 1);
    for (int i = 0; i < 4; ++i) ds.timestamps.push_back(std::to_string(i));

    const Dataset out = standardize(ds, {0, 1, 2});
    REQUIRE(out.transform.has_value());
    CHECK_THAT(out.transform->mean(0), Catch::Matchers::WithinAbs(2.0, 1e-12));
    CHECK_THAT(out.features(1, 0), Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK(out.features(3, 0) > 10.0);  // row outside the fit set transformed too

    // constant column passes through, flagged
    CHECK(out.transform->constant == std::vector<int>{1});
    CHECK(out.features(0, 1) == 7.0);

    Vector raw(2);
    raw << 4.0, 7.0;
    const Vector tr = apply_transform(*out.transform, raw);
    CHECK_THAT(tr(0), Catch::Matchers::WithinAbs(out.features(2, 0), 1e-12));
    CHECK_THROWS_AS(standardize(ds, {}), EmptyFitSet);
}

TEST_CASE("target normalization by a maximum value") {
    Dataset ds;
    ds.feature_names = {"x"};
    ds.target_names = {"y"};
    ds.features = Matrix::Zero(2, 1);
    ds.targets.resize(2, 1);
    ds.targets << 4.0, 8.0;
    ds.timestamps = {"0", "1"};
    const Dataset out = normalize_target_max(ds, 8.0);
    CHECK(out.targets(0, 0) == 0.5);
    CHECK(*out.target_max == 8.0);
    CHECK_THROWS_AS(normalize_target_max(ds, 0.0), NonPositiveMax);
}

TEST_CASE("lag features shift values and drop boundary rows") {
    Dataset ds;
    ds.feature_names = {"x"};
    ds.target_names = {"y"};
    ds.features.resize(5, 1);
    ds.features << 0.0, 1.0, 2.0, 3.0, 4.0;
    ds.targets = ds.features;
    for (int i = 0; i < 5; ++i) ds.timestamps.push_back(std::to_string(i));

    const Dataset out = lag_features(ds, {"x"}, {-1, 1});
    CHECK(out.rows() == 3);
    CHECK(out.dropped_rows == 2);
    CHECK(out.feature_names == std::vector<std::string>{"x", "x_t-1", "x_t+1"});
    // kept row 1: current 1, back 0, ahead 2
    CHECK(out.features(0, 0) == 1.0);
    CHECK(out.features(0, 1) == 0.0);
    CHECK(out.features(0, 2) == 2.0);
    CHECK(out.targets(0, 0) == 1.0);

    CHECK_THROWS_AS(lag_features(ds, {"nope"}, {1}), SchemaMismatch);
    CHECK_THROWS_AS(lag_features(ds, {"x"}, {5}), ShiftTooLarge);
}

TEST_CASE("kfold splits partition the rows") {
    Dataset ds;
    ds.feature_names = {"x"};
    ds.target_names = {"y"};
    ds.features = Matrix::Zero(30, 1);
    ds.targets = Matrix::Zero(30, 1);
    for (int i = 0; i < 30; ++i) ds.timestamps.push_back(std::to_string(i));

    SplitPlan plan;
    plan.folds = 5;
    const auto folds = kfold_splits(ds, plan);
    REQUIRE(folds.size() == 5);

    std::set<Index> all_test;
    for (const auto& f : folds) {
        CHECK(!f.base.empty());
        CHECK(!f.ensemble.empty());
        CHECK(f.base.size() + f.ensemble.size() + f.test.size() == 30);
        std::set<Index> seen;
        for (Index r : f.base) seen.insert(r);
        for (Index r : f.ensemble) seen.insert(r);
        for (Index r : f.test) seen.insert(r);
        CHECK(seen.size() == 30);  // disjoint cover
        for (Index r : f.test) all_test.insert(r);
    }
    CHECK(all_test.size() == 30);  // every row tested exactly once

    plan.folds = 1;
    CHECK_THROWS_AS(kfold_splits(ds, plan), DegenerateShape);
    plan.folds = 20;
    CHECK_THROWS_AS(kfold_splits(ds, plan), TooFewSamples);
}

TEST_CASE("group-aware splits keep groups on one side") {
    Dataset ds;
    ds.feature_names = {"x"};
    ds.target_names = {"y"};
    ds.features = Matrix::Zero(12, 1);
    ds.targets = Matrix::Zero(12, 1);
    for (int i = 0; i < 12; ++i) {
        ds.timestamps.push_back(std::to_string(i));
        ds.groups.push_back("g" + std::to_string(i / 2));
    }
    SplitPlan plan;
    plan.folds = 3;
    plan.by_group = true;
    const auto folds = kfold_splits(ds, plan);
    for (const auto& f : folds) {
        std::set<std::string> test_groups, train_groups;
        for (Index r : f.test) test_groups.insert(ds.groups[static_cast<std::size_t>(r)]);
        for (Index r : f.base) train_groups.insert(ds.groups[static_cast<std::size_t>(r)]);
        for (Index r : f.ensemble) train_groups.insert(ds.groups[static_cast<std::size_t>(r)]);
        for (const auto& g : test_groups) CHECK(train_groups.count(g) == 0);
    }

    ds.groups.clear();
    CHECK_THROWS_AS(kfold_splits(ds, plan), SchemaMismatch);
}

TEST_CASE("synthetic dataset regime proportions and determinism") {
    SynthConfig cfg;
    cfg.seed = 99;
    cfg.n = 10000;
    const Dataset a = synth_regime_dataset(cfg);
    const Dataset b = synth_regime_dataset(cfg);
    CHECK(a.features == b.features);
    CHECK(a.targets == b.targets);

    Index in_a = 0;
    for (Index n = 0; n < a.rows(); ++n)
        if (a.features(n, 0) < 0.0) ++in_a;
    const double frac = static_cast<double>(in_a) / static_cast<double>(a.rows());
    CHECK_THAT(frac, Catch::Matchers::WithinAbs(0.5, 0.01));

    // y_prev really is the previous target
    CHECK(a.features(5, 2) == a.targets(4, 0));

    SynthConfig framed = cfg;
    framed.n = 500;
    framed.horizon = 3;
    const Dataset f = synth_regime_dataset(framed);
    CHECK(f.leadtimes() == 4);
    CHECK(f.persistence_feature == "y_prev");
    CHECK(synth_schema(framed).leadtime->k_max == 3);
}

TEST_CASE("dataset csv save and reload round trip") {
    SynthConfig cfg;
    cfg.seed = 4;
    cfg.n = 50;
    const Dataset ds = synth_regime_dataset(cfg);
    ds.save_csv("data_test_rt.csv");
    const Dataset back = load_csv("data_test_rt.csv", synth_schema(cfg));
    std::remove("data_test_rt.csv");
    CHECK(back.rows() == ds.rows());
    CHECK(back.features == ds.features);  // %.17g output is lossless
    CHECK(back.targets == ds.targets);
}
