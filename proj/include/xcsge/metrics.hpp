#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "xcsge/score.hpp"
#include "xcsge/types.hpp"

namespace xcsge {

inline Vector rmse(const Matrix& pred, const Matrix& truth) {
    if (pred.rows() == 0) throw EmptySet("rmse: no samples");
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
        throw ShapeMismatch("rmse: shape mismatch");
    return ((pred - truth).array().square().colwise().mean()).sqrt().matrix().transpose();
}

inline Vector r2(const Matrix& pred, const Matrix& truth) {
    if (pred.rows() == 0) throw EmptySet("r2: no samples");
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
        throw ShapeMismatch("r2: shape mismatch");
    Vector out(pred.cols());
    for (Index m = 0; m < pred.cols(); ++m) {
        const double mean = truth.col(m).mean();
        const double ss_tot = (truth.col(m).array() - mean).square().sum();
        if (ss_tot == 0.0) throw ZeroVariance("r2: truth column has zero variance");
        const double ss_res = (pred.col(m) - truth.col(m)).array().square().sum();
        out(m) = 1.0 - ss_res / ss_tot;
    }
    return out;
}

/// Mean clipped negative log probability of the true class.
inline double log_loss(const Matrix& proba, const std::vector<int>& labels) {
    if (proba.rows() == 0) throw EmptySet("log_loss: no samples");
    if (static_cast<std::size_t>(proba.rows()) != labels.size())
        throw ShapeMismatch("log_loss: label count mismatch");
    double total = 0.0;
    for (Index n = 0; n < proba.rows(); ++n) {
        const int y = labels[static_cast<std::size_t>(n)];
        if (y < 0 || y >= proba.cols())
            throw UnknownLabel("log_loss: label out of range: " + std::to_string(y));
        const double p = std::clamp(proba(n, y), kProbClip, 1.0 - kProbClip);
        total -= std::log(p);
    }
    return total / static_cast<double>(proba.rows());
}

/// Row-major M x M counts: counts[i][j] = #(truth i, predicted j).
struct ConfusionMatrix {
    Matrix counts;
    Matrix rates;  ///< counts row-normalized; all-zero rows stay zero

    Index classes() const { return counts.rows(); }
};

inline ConfusionMatrix confusion_matrix(const std::vector<int>& pred_labels,
                                        const std::vector<int>& labels, Index classes) {
    if (pred_labels.size() != labels.size())
        throw ShapeMismatch("confusion_matrix: label count mismatch");
    ConfusionMatrix cm;
    cm.counts = Matrix::Zero(classes, classes);
    for (std::size_t n = 0; n < labels.size(); ++n) {
        const int yt = labels[n], yp = pred_labels[n];
        if (yt < 0 || yt >= classes || yp < 0 || yp >= classes)
            throw UnknownLabel("confusion_matrix: label out of range");
        cm.counts(yt, yp) += 1.0;
    }
    cm.rates = cm.counts;
    for (Index i = 0; i < classes; ++i) {
        const double row = cm.counts.row(i).sum();
        if (row > 0.0) cm.rates.row(i) /= row;
    }
    return cm;
}

/// Unweighted mean of per-class F1. A class absent from both prediction and
/// truth contributes an F1 of 0.
inline double macro_f1(const std::vector<int>& pred_labels, const std::vector<int>& labels,
                       Index classes) {
    const ConfusionMatrix cm = confusion_matrix(pred_labels, labels, classes);
    double sum = 0.0;
    for (Index k = 0; k < classes; ++k) {
        const double tp = cm.counts(k, k);
        const double fp = cm.counts.col(k).sum() - tp;
        const double fn = cm.counts.row(k).sum() - tp;
        const double denom = 2.0 * tp + fp + fn;
        sum += denom > 0.0 ? 2.0 * tp / denom : 0.0;
    }
    return sum / static_cast<double>(classes);
}

enum class MetricOrientation { LowerBetter, HigherBetter };

/// Percentage improvement over a reference value.
inline double skill_score(double value, double reference, MetricOrientation orientation) {
    if (reference == 0.0) throw ZeroReference("skill_score: reference is zero");
    const double gain = orientation == MetricOrientation::LowerBetter
                            ? (reference - value) / reference
                            : (value - reference) / reference;
    return 100.0 * gain;
}

/// Per-model summary row matching the Mean/Variance/Min/Max/Skill layout.
struct MetricReport {
    std::string metric_name;
    MetricOrientation orientation = MetricOrientation::LowerBetter;
    std::vector<std::string> model_names;
    std::vector<std::vector<double>> per_entity;  ///< [model][entity or fold]
    std::string reference_model;                  ///< skill reference

    struct Row {
        std::string model;
        double mean, variance, minimum, maximum, skill;
    };

    std::vector<Row> rows() const {
        std::vector<double> means(model_names.size());
        for (std::size_t i = 0; i < model_names.size(); ++i) {
            double s = 0.0;
            for (double v : per_entity[i]) s += v;
            means[i] = s / static_cast<double>(per_entity[i].size());
        }
        double ref_mean = 0.0;
        bool found = false;
        for (std::size_t i = 0; i < model_names.size(); ++i)
            if (model_names[i] == reference_model) {
                ref_mean = means[i];
                found = true;
            }
        if (!found) throw ZeroReference("metric report: unknown reference model");

        std::vector<Row> out;
        for (std::size_t i = 0; i < model_names.size(); ++i) {
            Row r;
            r.model = model_names[i];
            r.mean = means[i];
            double ss = 0.0;
            r.minimum = per_entity[i].front();
            r.maximum = per_entity[i].front();
            for (double v : per_entity[i]) {
                ss += (v - r.mean) * (v - r.mean);
                r.minimum = std::min(r.minimum, v);
                r.maximum = std::max(r.maximum, v);
            }
            r.variance = ss / static_cast<double>(per_entity[i].size());
            r.skill = skill_score(r.mean, ref_mean, orientation);
            out.push_back(r);
        }
        return out;
    }

    /// Picks the model with the worst mean as skill reference.
    void use_worst_as_reference() {
        std::size_t worst = 0;
        double worst_mean = 0.0;
        for (std::size_t i = 0; i < model_names.size(); ++i) {
            double s = 0.0;
            for (double v : per_entity[i]) s += v;
            const double mean = s / static_cast<double>(per_entity[i].size());
            const bool is_worse = orientation == MetricOrientation::LowerBetter
                                      ? mean > worst_mean
                                      : mean < worst_mean;
            if (i == 0 || is_worse) {
                worst = i;
                worst_mean = mean;
            }
        }
        reference_model = model_names[worst];
    }

    void write_csv(std::ostream& out) const {
        out << "model,mean,variance,minimum,maximum,skill_percent\n";
        char buf[64];
        for (const auto& r : rows()) {
            out << r.model;
            for (double v : {r.mean, r.variance, r.minimum, r.maximum, r.skill}) {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out << "," << buf;
            }
            out << "\n";
        }
    }

    void write_table(std::ostream& out) const {
        const auto rws = rows();
        out << metric_name << " (reference: " << reference_model << ")\n";
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-24s %12s %12s %12s %12s %10s\n", "model", "mean",
                      "variance", "min", "max", "skill");
        out << buf;
        for (const auto& r : rws) {
            std::snprintf(buf, sizeof buf, "%-24s %12.6f %12.6f %12.6f %12.6f %9.2f%%\n",
                          r.model.c_str(), r.mean, r.variance, r.minimum, r.maximum, r.skill);
            out << buf;
        }
    }
};

} // namespace xcsge
