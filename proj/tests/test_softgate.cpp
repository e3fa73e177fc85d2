#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "xcsge/softgate.hpp"

using namespace xcsge;

TEST_CASE("two-member worked example") {
    ErrorMatrix omega(2, 1);
    omega << 1.0, 2.0;

    WeightMatrix w1 = soft_gate(omega, Eta(1.0));
    CHECK_THAT(w1(0, 0), Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-9));
    CHECK_THAT(w1(1, 0), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-9));

    WeightMatrix w2 = soft_gate(omega, Eta(2.0));
    CHECK_THAT(w2(0, 0), Catch::Matchers::WithinAbs(0.8, 1e-9));
    CHECK_THAT(w2(1, 0), Catch::Matchers::WithinAbs(0.2, 1e-9));
}

TEST_CASE("raw gate decreases with the member error") {
    ErrorMatrix omega(3, 1);
    omega << 0.5, 1.0, 2.0;
    Vector lo(1), hi(1);
    lo << 0.3;
    hi << 0.9;
    CHECK(soft_gate_raw(omega, lo, Eta(1.5))(0) > soft_gate_raw(omega, hi, Eta(1.5))(0));
}

TEST_CASE("gate invariants over random instances") {
    std::mt19937_64 rng(20240817);
    std::uniform_int_distribution<int> j_dist(1, 8), m_dist(1, 4);
    std::uniform_real_distribution<double> err(0.01, 5.0), eta_dist(0.0, 8.0);

    for (int it = 0; it < 300; ++it) {
        const int j = j_dist(rng), m = m_dist(rng);
        ErrorMatrix omega(j, m);
        for (int a = 0; a < j; ++a)
            for (int b = 0; b < m; ++b) omega(a, b) = err(rng);
        const Eta eta(eta_dist(rng));
        const WeightMatrix w = soft_gate(omega, eta);

        for (int b = 0; b < m; ++b) {
            CHECK_THAT(w.col(b).sum(), Catch::Matchers::WithinAbs(1.0, 1e-9));
            // lower error never gets a smaller weight
            for (int a = 0; a < j; ++a)
                for (int c = 0; c < j; ++c)
                    if (omega(a, b) < omega(c, b)) CHECK(w(a, b) >= w(c, b));
        }
        CHECK((w.array() >= 0.0).all());

        const WeightMatrix uniform = soft_gate(omega, Eta(0.0));
        CHECK((uniform.array() - 1.0 / j).abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("best member weight grows with eta") {
    std::mt19937_64 rng(7);
    // errors stay above the epsilon-floor saturation point of the gate
    std::uniform_real_distribution<double> err(0.1, 5.0);
    for (int it = 0; it < 50; ++it) {
        ErrorMatrix omega(4, 2);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 2; ++b) omega(a, b) = err(rng);
        for (int b = 0; b < 2; ++b) {
            Index best = 0;
            omega.col(b).minCoeff(&best);
            double prev = 0.0;
            for (double eta : {0.5, 1.0, 2.0, 4.0, 8.0}) {
                const double w = soft_gate(omega, Eta(eta))(best, b);
                CHECK(w >= prev - 1e-12);
                prev = w;
            }
        }
    }
}

TEST_CASE("gate input validation") {
    CHECK_THROWS_AS(soft_gate(ErrorMatrix(0, 1), Eta(1.0)), EmptyEnsemble);
    ErrorMatrix neg(2, 1);
    neg << 1.0, -0.5;
    CHECK_THROWS_AS(soft_gate(neg, Eta(1.0)), NonFiniteInput);
    ErrorMatrix ok(2, 1);
    ok << 1.0, 2.0;
    CHECK_THROWS_AS(soft_gate(ok, Eta(1.0), 0.0), NonFiniteInput);
    CHECK_THROWS_AS(Eta(-1.0), NonFiniteInput);
    Vector wrong(2);
    wrong << 1.0, 2.0;
    CHECK_THROWS_AS(soft_gate_raw(ok, wrong, Eta(1.0)), ShapeMismatch);
}
