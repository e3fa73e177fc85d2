#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "xcsge/metrics.hpp"
#include "xcsge/types.hpp"

namespace xcsge {

/// Datasets x algorithms ranks; rank 1 is best, ties receive average ranks.
struct RankMatrix {
    Matrix ranks;          ///< D x A
    Vector average_ranks;  ///< per algorithm

    Index datasets() const { return ranks.rows(); }
    Index algorithms() const { return ranks.cols(); }
};

inline RankMatrix rank_models(const Matrix& scores, MetricOrientation orientation) {
    if (scores.rows() < 2 || scores.cols() < 2)
        throw DegenerateShape("rank_models: need at least 2 datasets and 2 algorithms");
    RankMatrix rm;
    rm.ranks.resize(scores.rows(), scores.cols());
    for (Index d = 0; d < scores.rows(); ++d) {
        std::vector<Index> order(static_cast<std::size_t>(scores.cols()));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
            return orientation == MetricOrientation::LowerBetter
                       ? scores(d, a) < scores(d, b)
                       : scores(d, a) > scores(d, b);
        });
        // ties get the average of the rank positions they span
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t j = i;
            while (j + 1 < order.size() &&
                   scores(d, order[j + 1]) == scores(d, order[i]))
                ++j;
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) rm.ranks(d, order[k]) = avg;
            i = j + 1;
        }
    }
    rm.average_ranks = rm.ranks.colwise().mean().transpose();
    return rm;
}

namespace detail {

/// Regularized upper incomplete gamma Q(a, x), series + continued fraction.
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw NonFiniteInput("gamma_q: invalid arguments");
    if (x == 0.0) return 1.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        // lower series, return 1 - P
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
    }
    // continued fraction for Q directly
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - lg) * h;
}

} // namespace detail

struct FriedmanResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Chi-square form of the Friedman statistic:
/// 12 D / (A (A+1)) * [sum_a Rbar_a^2 - A (A+1)^2 / 4], A-1 degrees of freedom.
inline FriedmanResult friedman_test(const RankMatrix& ranks) {
    const Index d = ranks.datasets();
    const Index a = ranks.algorithms();
    if (d < 2 || a < 2) throw DegenerateShape("friedman_test: degenerate shape");

    const double A = static_cast<double>(a);
    const double D = static_cast<double>(d);
    double sum_sq = 0.0;
    for (Index i = 0; i < a; ++i) sum_sq += ranks.average_ranks(i) * ranks.average_ranks(i);
    double stat = 12.0 * D / (A * (A + 1.0)) * (sum_sq - A * (A + 1.0) * (A + 1.0) / 4.0);
    if (stat < 0.0) stat = 0.0;  // guard against cancellation at all-tied ranks

    FriedmanResult r;
    r.statistic = stat;
    r.p_value = stat == 0.0 ? 1.0 : detail::gamma_q((A - 1.0) / 2.0, stat / 2.0);
    return r;
}

/// Studentized-range constants q_alpha / sqrt(2) for the Nemenyi test,
/// infinite degrees of freedom, A = 2..10 (Demsar 2006, Table 5).
inline double nemenyi_q(Index algorithms, double alpha) {
    static constexpr double q05[] = {1.960, 2.343, 2.569, 2.728, 2.850,
                                     2.949, 3.031, 3.102, 3.164};
    static constexpr double q10[] = {1.645, 2.052, 2.291, 2.460, 2.589,
                                     2.693, 2.780, 2.855, 2.920};
    if (algorithms < 2 || algorithms > 10)
        throw UnsupportedA("nemenyi: q table covers 2 <= A <= 10");
    if (alpha == 0.05) return q05[algorithms - 2];
    if (alpha == 0.10) return q10[algorithms - 2];
    throw UnsupportedAlpha("nemenyi: alpha must be 0.05 or 0.10");
}

struct NemenyiResult {
    double critical_difference = 0.0;
    Vector average_ranks;
    /// significant(a, b) != 0 iff |Rbar_a - Rbar_b| > CD; symmetric, false diagonal.
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> significant;
};

inline NemenyiResult nemenyi_critical_difference(const RankMatrix& ranks, double alpha) {
    const Index a = ranks.algorithms();
    const double A = static_cast<double>(a);
    const double D = static_cast<double>(ranks.datasets());
    NemenyiResult r;
    r.critical_difference = nemenyi_q(a, alpha) * std::sqrt(A * (A + 1.0) / (6.0 * D));
    r.average_ranks = ranks.average_ranks;
    r.significant.resize(a, a);
    for (Index i = 0; i < a; ++i)
        for (Index j = 0; j < a; ++j)
            r.significant(i, j) =
                i != j && std::abs(r.average_ranks(i) - r.average_ranks(j)) >
                              r.critical_difference;
    return r;
}

/// Critical-difference-diagram data (average ranks + CD) as CSV for
/// external plotting.
inline void write_cd_diagram_csv(std::ostream& out, const std::vector<std::string>& names,
                                 const NemenyiResult& nemenyi, const FriedmanResult& friedman) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", friedman.statistic);
    out << "friedman_statistic," << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", friedman.p_value);
    out << "friedman_p," << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", nemenyi.critical_difference);
    out << "critical_difference," << buf << "\n";
    out << "model,average_rank\n";
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", nemenyi.average_ranks(static_cast<Index>(i)));
        out << names[i] << "," << buf << "\n";
    }
}

} // namespace xcsge
