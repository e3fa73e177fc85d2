#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>

#include "xcsge/learners.hpp"

using namespace xcsge;

namespace {

Dataset tiny_dataset(Index n, int horizon, unsigned seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.n = n;
    cfg.horizon = horizon;
    return synth_regime_dataset(cfg);
}

} // namespace

TEST_CASE("ridge recovers a noiseless linear relation") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix x(30, 2), y(30, 1);
    for (Index n = 0; n < 30; ++n) {
        x(n, 0) = dist(rng);
        x(n, 1) = dist(rng);
        y(n, 0) = 2.0 * x(n, 0) - 0.5 * x(n, 1) + 3.0;
    }
    const RidgeModel m = ridge_fit(x, y, 0.0);
    CHECK_THAT(m.coefficients(0, 0), Catch::Matchers::WithinAbs(2.0, 1e-9));
    CHECK_THAT(m.coefficients(1, 0), Catch::Matchers::WithinAbs(-0.5, 1e-9));
    CHECK_THAT(m.intercept(0), Catch::Matchers::WithinAbs(3.0, 1e-9));
    Vector q(2);
    q << 0.3, -0.2;
    CHECK_THAT(m.predict(q)(0), Catch::Matchers::WithinAbs(2.0 * 0.3 + 0.5 * 0.2 + 3.0, 1e-9));
}

TEST_CASE("ridge rejects rank-deficient designs at lambda zero") {
    Matrix x(10, 2);
    for (Index n = 0; n < 10; ++n) {
        x(n, 0) = static_cast<double>(n);
        x(n, 1) = 2.0 * static_cast<double>(n);  // collinear
    }
    Matrix y = Matrix::Ones(10, 1);
    CHECK_THROWS_AS(ridge_fit(x, y, 0.0), SingularSystem);
    CHECK_NOTHROW(ridge_fit(x, y, 1e-6));
    CHECK_THROWS_AS(ridge_fit(x, y, -1.0), NonFiniteInput);
}

TEST_CASE("larger lambda shrinks the coefficients") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix x(50, 3), y(50, 1);
    for (Index n = 0; n < 50; ++n) {
        for (Index f = 0; f < 3; ++f) x(n, f) = dist(rng);
        y(n, 0) = x(n, 0) - x(n, 2) + 0.1 * dist(rng);
    }
    const double n0 = ridge_fit(x, y, 0.0).coefficients.norm();
    const double n1 = ridge_fit(x, y, 10.0).coefficients.norm();
    const double n2 = ridge_fit(x, y, 100.0).coefficients.norm();
    CHECK(n1 < n0);
    CHECK(n2 < n1);
}

TEST_CASE("ridge member fits one model per leadtime") {
    const Dataset ds = tiny_dataset(200, 3, 21);
    const auto rows = ds.issue_rows();
    const auto member = RidgeMember::fit("ridge", ds, rows, 1.0);
    CHECK(member->models().size() == 4);
    const Query q = ds.query(rows.front());
    for (Index t = 0; t < 4; ++t) CHECK(std::isfinite(member->predict(q, t)(0)));
    CHECK_THROWS_AS(member->predict(q, 4), LeadtimeOutOfRange);
}

TEST_CASE("knn member equals the neighbor mean") {
    Matrix x(4, 1);
    x << 0.0, 1.0, 2.0, 3.0;
    Tensor3 y(4, 1, 1);
    y(0, 0, 0) = 10.0;
    y(1, 0, 0) = 20.0;
    y(2, 0, 0) = 30.0;
    y(3, 0, 0) = 40.0;
    KnnMember member("knn", x, y, 2, KnnMode::Regress);
    Vector q(1);
    q << 0.9;  // neighbors 1 and 0
    CHECK_THAT(member.predict(Query(q), 0)(0), Catch::Matchers::WithinAbs(15.0, 1e-12));
}

TEST_CASE("knn member classification emits class frequencies") {
    Matrix x(4, 1);
    x << 0.0, 0.1, 0.2, 5.0;
    Tensor3 y(4, 2, 2);  // one-hot over 2 classes, 2 leadtimes
    for (Index t = 0; t < 2; ++t) {
        y(0, t, 0) = 1.0;
        y(1, t, 0) = 1.0;
        y(2, t, 1) = 1.0;
        y(3, t, 1) = 1.0;
    }
    KnnMember member("knnc", x, y, 3, KnnMode::Classify);
    Vector q(1);
    q << 0.05;
    const Vector p = member.predict(Query(q), 1);
    CHECK_THAT(p(0), Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
    CHECK_THAT(p(1), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
    CHECK_THROWS_AS(KnnMember("bad", x, y, 5, KnnMode::Regress), InsufficientSamples);
}

TEST_CASE("persistence member echoes the designated feature") {
    PersistenceMember member("pers", 1, 2);
    Vector x(3);
    x << 0.0, 7.5, 0.0;
    const Vector p = member.predict(Query(x), 3);
    CHECK(p.size() == 2);
    CHECK(p(0) == 7.5);
    CHECK(p(1) == 7.5);
}

TEST_CASE("precomputed member round trip and coverage") {
    const std::string path = "precomputed_test.csv";
    {
        std::ofstream out(path);
        out << "sample_id,leadtime,p_0,p_1\n";
        out << "a,0,0.25,0.75\n";
        out << "a,1,0.5,0.5\n";
        out << "b,0,1.0,0.0\n";
    }
    const auto member = load_precomputed(path, "pre", true);
    Query q{std::vector<Vector>{Vector::Zero(1)}, std::string("a")};
    CHECK_THAT(member->predict(q, 0)(1), Catch::Matchers::WithinAbs(0.75, 1e-12));
    CHECK_THROWS_AS(member->predict(q, 2), MissingPrediction);
    CHECK_NOTHROW(member->validate_coverage({"a"}, 2));
    CHECK_THROWS_AS(member->validate_coverage({"a", "b"}, 2), IncompleteCoverage);

    Query no_id{std::vector<Vector>{Vector::Zero(1)}};
    CHECK_THROWS_AS(member->predict(no_id, 0), MissingPrediction);

    {
        std::ofstream out(path);
        out << "sample_id,leadtime,p_0,p_1\n";
        out << "a,0,0.9,0.3\n";  // off the simplex
    }
    CHECK_THROWS_AS(load_precomputed(path, "pre", true), ParseError);
    CHECK_NOTHROW(load_precomputed(path, "pre", false));
    std::remove(path.c_str());
}

TEST_CASE("lagged expansion produces base-major lag variants") {
    std::vector<MemberPtr> base = {
        std::make_shared<PersistenceMember>("a", 0, 1),
        std::make_shared<PersistenceMember>("b", 0, 1),
    };
    const auto expanded = expand_time_lagged(base, 3);
    REQUIRE(expanded.size() == 6);
    CHECK(expanded[0]->id() == "a");
    CHECK(expanded[1]->id() == "a@lag1");
    CHECK(expanded[2]->id() == "a@lag2");
    CHECK(expanded[5]->id() == "b@lag2");
    CHECK(expanded[2]->lag() == 2);

    // lagged member reads its shifted frame
    Vector now(1), before(1);
    now << 1.0;
    before << 2.0;
    Query q(std::vector<Vector>{now, before});
    CHECK(expanded[1]->predict(q, 0)(0) == 2.0);
    CHECK_THROWS_AS(expanded[2]->predict(q, 0), MissingHistory);
    CHECK_THROWS_AS(expand_time_lagged(base, 0), InvalidLagCount);
}
