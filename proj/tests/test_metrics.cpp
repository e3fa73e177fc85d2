#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "xcsge/metrics.hpp"

using namespace xcsge;

TEST_CASE("rmse and r2 on hand values") {
    Matrix pred(3, 1), truth(3, 1);
    pred << 1.0, 2.0, 3.0;
    truth << 1.0, 2.0, 5.0;
    CHECK_THAT(rmse(pred, truth)(0), Catch::Matchers::WithinAbs(std::sqrt(4.0 / 3.0), 1e-12));
    // ss_res = 4, ss_tot around mean 8/3
    const double ss_tot = (truth.array() - 8.0 / 3.0).square().sum();
    CHECK_THAT(r2(pred, truth)(0), Catch::Matchers::WithinAbs(1.0 - 4.0 / ss_tot, 1e-12));

    Matrix flat = Matrix::Ones(3, 1);
    CHECK_THROWS_AS(r2(pred, flat), ZeroVariance);
    CHECK_THROWS_AS(rmse(pred, Matrix::Ones(2, 1)), ShapeMismatch);
}

TEST_CASE("published skill-score values reproduce") {
    CHECK_THAT(skill_score(0.1349, 0.1516, MetricOrientation::LowerBetter),
               Catch::Matchers::WithinAbs(11.01, 0.05));
    CHECK_THAT(skill_score(0.6719, 0.6095, MetricOrientation::HigherBetter),
               Catch::Matchers::WithinAbs(10.24, 0.05));
    CHECK_THAT(skill_score(0.0579, 0.0828, MetricOrientation::LowerBetter),
               Catch::Matchers::WithinAbs(30.0, 0.1));
    CHECK_THROWS_AS(skill_score(1.0, 0.0, MetricOrientation::LowerBetter), ZeroReference);
}

TEST_CASE("log loss on a perfect and an uncertain predictor") {
    Matrix proba(2, 2);
    proba << 1.0, 0.0, 0.0, 1.0;
    CHECK(log_loss(proba, {0, 1}) <= 1e-12);

    proba << 0.5, 0.5, 0.5, 0.5;
    CHECK_THAT(log_loss(proba, {0, 1}), Catch::Matchers::WithinAbs(std::log(2.0), 1e-12));
    CHECK_THROWS_AS(log_loss(proba, {0, 5}), UnknownLabel);
    CHECK_THROWS_AS(log_loss(proba, {0}), ShapeMismatch);
}

TEST_CASE("confusion matrix and macro f1 on a hand example") {
    const std::vector<int> truth = {0, 0, 1, 1, 2, 2};
    const std::vector<int> pred = {0, 1, 1, 1, 2, 0};
    const ConfusionMatrix cm = confusion_matrix(pred, truth, 3);
    CHECK(cm.counts(0, 0) == 1.0);
    CHECK(cm.counts(0, 1) == 1.0);
    CHECK(cm.counts(1, 1) == 2.0);
    CHECK(cm.counts(2, 0) == 1.0);
    CHECK_THAT(cm.rates(0, 0), Catch::Matchers::WithinAbs(0.5, 1e-12));

    // f1 per class: 0 -> 1/2, 1 -> 4/5, 2 -> 2/3
    CHECK_THAT(macro_f1(pred, truth, 3),
               Catch::Matchers::WithinAbs((0.5 + 0.8 + 2.0 / 3.0) / 3.0, 1e-12));

    // class absent from prediction and truth scores zero
    CHECK_THAT(macro_f1({0, 0}, {0, 0}, 2), Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("metric report aggregates folds and picks references") {
    MetricReport report;
    report.metric_name = "rmse";
    report.model_names = {"a", "b"};
    report.per_entity = {{1.0, 3.0}, {4.0, 6.0}};
    report.use_worst_as_reference();
    CHECK(report.reference_model == "b");

    const auto rows = report.rows();
    CHECK_THAT(rows[0].mean, Catch::Matchers::WithinAbs(2.0, 1e-12));
    CHECK_THAT(rows[0].variance, Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK(rows[0].minimum == 1.0);
    CHECK(rows[0].maximum == 3.0);
    CHECK_THAT(rows[0].skill, Catch::Matchers::WithinAbs(60.0, 1e-9));
    CHECK_THAT(rows[1].skill, Catch::Matchers::WithinAbs(0.0, 1e-12));

    report.orientation = MetricOrientation::HigherBetter;
    report.use_worst_as_reference();
    CHECK(report.reference_model == "a");

    std::ostringstream csv;
    report.write_csv(csv);
    CHECK(csv.str().find("model,mean,variance,minimum,maximum,skill_percent") == 0);

    report.reference_model = "missing";
    CHECK_THROWS_AS(report.rows(), ZeroReference);
}
