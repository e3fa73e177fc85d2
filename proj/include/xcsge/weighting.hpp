#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <numeric>
#include <vector>

#include "xcsge/score.hpp"
#include "xcsge/softgate.hpp"
#include "xcsge/types.hpp"

namespace xcsge {

/// Stabilizer for the relative leadtime-score division; a member with zero
/// total error over the horizon gets a uniform relative profile.
inline constexpr double kLeadtimeEpsilon = 1e-12;

/// Truth values per (sample, leadtime, dimension). Framed datasets have a
/// distinct truth per leadtime; the unframed case repeats one truth row.
inline Tensor3 broadcast_truths(const Matrix& truths, Index leadtimes) {
    Tensor3 out(truths.rows(), leadtimes, truths.cols());
    for (Index n = 0; n < truths.rows(); ++n)
        for (Index t = 0; t < leadtimes; ++t)
            for (Index m = 0; m < truths.cols(); ++m)
                out(n, t, m) = truths(n, m);
    return out;
}

/// Per-sample error of every member, summed over leadtimes:
/// e(n, j, m) = sum_t S(p(n, j, t), y(n, t)).
inline Tensor3 per_sample_errors(const PredictionTensor& predictions,
                                 const Tensor3& truths,
                                 const ScoreFunction& score) {
    if (predictions.samples() != truths.dim0())
        throw ShapeMismatch("per_sample_errors: sample counts differ");
    if (predictions.leadtimes() != truths.dim1())
        throw ShapeMismatch("per_sample_errors: leadtime counts differ");
    if (predictions.targets() != truths.dim2())
        throw ShapeMismatch("per_sample_errors: target dimensions differ");

    Tensor3 out(predictions.samples(), predictions.members(), predictions.targets());
    Vector y(predictions.targets());
    for (Index n = 0; n < predictions.samples(); ++n)
        for (Index j = 0; j < predictions.members(); ++j)
            for (Index t = 0; t < predictions.leadtimes(); ++t) {
                for (Index m = 0; m < predictions.targets(); ++m) y(m) = truths(n, t, m);
                const Vector e = score.evaluate(predictions.get(n, j, t), y);
                for (Index m = 0; m < predictions.targets(); ++m)
                    out(n, j, m) += e(m);
            }
    return out;
}

inline Tensor3 per_sample_errors(const PredictionTensor& predictions,
                                 const Matrix& truths,
                                 const ScoreFunction& score) {
    if (predictions.samples() != truths.rows())
        throw ShapeMismatch("per_sample_errors: sample counts differ");
    if (predictions.targets() != truths.cols())
        throw ShapeMismatch("per_sample_errors: target dimensions differ");
    return per_sample_errors(predictions,
                             broadcast_truths(truths, predictions.leadtimes()), score);
}

/// Per-member mean error over samples; forms the reference set of the
/// global gate.
inline ErrorMatrix global_error_scores(const Tensor3& sample_errors) {
    const Index samples = sample_errors.dim0();
    if (samples == 0) throw EmptyDataset("global_error_scores: no samples");
    ErrorMatrix r = ErrorMatrix::Zero(sample_errors.dim1(), sample_errors.dim2());
    for (Index n = 0; n < samples; ++n)
        for (Index j = 0; j < r.rows(); ++j)
            for (Index m = 0; m < r.cols(); ++m)
                r(j, m) += sample_errors(n, j, m);
    return r / static_cast<double>(samples);
}

inline WeightMatrix global_weights(const ErrorMatrix& global_scores, Eta eta_global,
                                   double epsilon = kDefaultEpsilon) {
    return soft_gate(global_scores, eta_global, epsilon);
}

/// Regressor estimating one member's expected error vector at a query point.
class LocalErrorModel {
public:
    virtual ~LocalErrorModel() = default;

    /// Expected error, clamped to >= 0 before gating.
    Vector predict(const Vector& x) const {
        Vector q = predict_raw(x);
        return q.cwiseMax(0.0);
    }

    virtual std::string kind() const = 0;

protected:
    virtual Vector predict_raw(const Vector& x) const = 0;
};

/// k-nearest-neighbor error regressor: unweighted mean of the k nearest
/// training errors under Euclidean distance. Ties at the k-th distance are
/// broken by lowest sample index.
class KnnErrorModel final : public LocalErrorModel {
public:
    KnnErrorModel(Matrix features, Matrix errors, int k)
        : features_(std::move(features)), errors_(std::move(errors)), k_(k) {
        if (k_ < 1 || features_.rows() < k_)
            throw InsufficientSamples("knn error model: need at least k samples");
        if (features_.rows() != errors_.rows())
            throw ShapeMismatch("knn error model: feature/error row mismatch");
    }

    std::string kind() const override { return "knn"; }
    int k() const { return k_; }
    const Matrix& reference_features() const { return features_; }
    const Matrix& reference_errors() const { return errors_; }

protected:
    Vector predict_raw(const Vector& x) const override {
        if (x.size() != features_.cols())
            throw DimensionMismatch("knn error model: query dimensionality mismatch");
        const Index n = features_.rows();
        std::vector<Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Index{0});
        Vector d2(n);
        for (Index i = 0; i < n; ++i)
            d2(i) = (features_.row(i).transpose() - x).squaredNorm();
        std::partial_sort(idx.begin(), idx.begin() + k_, idx.end(),
                          [&](Index a, Index b) {
                              return d2(a) != d2(b) ? d2(a) < d2(b) : a < b;
                          });
        Vector q = Vector::Zero(errors_.cols());
        for (int i = 0; i < k_; ++i) q += errors_.row(idx[static_cast<std::size_t>(i)]).transpose();
        return q / static_cast<double>(k_);
    }

private:
    Matrix features_;
    Matrix errors_;
    int k_;
};

/// Adapter for caller-supplied error regressors.
class CustomErrorModel final : public LocalErrorModel {
public:
    using Fn = std::function<Vector(const Vector&)>;
    CustomErrorModel(std::string name, Fn fn)
        : name_(std::move(name)), fn_(std::move(fn)) {}

    std::string kind() const override { return name_; }

protected:
    Vector predict_raw(const Vector& x) const override { return fn_(x); }

private:
    std::string name_;
    Fn fn_;
};

struct LocalModelConfig {
    int knn_k = 9;
    /// When set, overrides the default k-NN model. Called once per member
    /// with (member index, features, that member's per-sample errors).
    std::function<std::shared_ptr<LocalErrorModel>(Index, const Matrix&, const Matrix&)>
        factory;
};

/// One fitted error model per member, trained on (features -> per-sample error).
inline std::vector<std::shared_ptr<LocalErrorModel>> fit_local_error_models(
    const Matrix& features, const Tensor3& per_sample_leadtime_errors,
    const LocalModelConfig& config = {}) {
    const Index samples = per_sample_leadtime_errors.dim0();
    const Index members = per_sample_leadtime_errors.dim1();
    const Index targets = per_sample_leadtime_errors.dim2();
    if (features.rows() != samples)
        throw ShapeMismatch("fit_local_error_models: feature/error sample mismatch");
    if (!config.factory && samples < config.knn_k)
        throw InsufficientSamples("fit_local_error_models: fewer samples than k");

    std::vector<std::shared_ptr<LocalErrorModel>> models;
    models.reserve(static_cast<std::size_t>(members));
    for (Index j = 0; j < members; ++j) {
        Matrix err(samples, targets);
        for (Index n = 0; n < samples; ++n)
            for (Index m = 0; m < targets; ++m)
                err(n, m) = per_sample_leadtime_errors(n, j, m);
        if (config.factory)
            models.push_back(config.factory(j, features, err));
        else
            models.push_back(std::make_shared<KnnErrorModel>(features, std::move(err),
                                                             config.knn_k));
    }
    return models;
}

/// Local error estimates for every member at a query point, stacked J x M.
inline ErrorMatrix local_error_estimates(
    const Vector& x, const std::vector<std::shared_ptr<LocalErrorModel>>& models) {
    if (models.empty()) throw EmptyEnsemble("local weighting: no models");
    ErrorMatrix q(static_cast<Index>(models.size()), models.front()->predict(x).size());
    for (std::size_t j = 0; j < models.size(); ++j)
        q.row(static_cast<Index>(j)) = models[j]->predict(x).transpose();
    return q;
}

inline WeightMatrix local_weights(const Vector& x,
                                  const std::vector<std::shared_ptr<LocalErrorModel>>& models,
                                  Eta eta_local, double epsilon = kDefaultEpsilon) {
    return soft_gate(local_error_estimates(x, models), eta_local, epsilon);
}

/// Mean member error per leadtime, absolute and normalized over the horizon.
struct LeadtimeErrorProfile {
    Tensor3 values;    ///< (member, leadtime, dimension) mean error
    Tensor3 relative;  ///< values normalized so each (member, dimension) sums to 1

    Index members() const { return values.dim0(); }
    Index leadtimes() const { return values.dim1(); }
    Index targets() const { return values.dim2(); }

    /// Relative scores of every member at one leadtime, stacked J x M.
    ErrorMatrix at(Index t) const {
        if (t < 0 || t >= leadtimes())
            throw LeadtimeOutOfRange("leadtime profile: t out of range");
        ErrorMatrix r(members(), targets());
        for (Index j = 0; j < members(); ++j)
            for (Index m = 0; m < targets(); ++m)
                r(j, m) = relative(j, t, m);
        return r;
    }
};

inline LeadtimeErrorProfile leadtime_error_scores(const PredictionTensor& predictions,
                                                  const Tensor3& truths,
                                                  const ScoreFunction& score) {
    const Index samples = predictions.samples();
    if (samples == 0) throw EmptyDataset("leadtime_error_scores: no samples");
    if (samples != truths.dim0())
        throw ShapeMismatch("leadtime_error_scores: sample counts differ");

    LeadtimeErrorProfile prof;
    prof.values = Tensor3(predictions.members(), predictions.leadtimes(),
                          predictions.targets());
    Vector y(predictions.targets());
    for (Index n = 0; n < samples; ++n) {
        for (Index j = 0; j < predictions.members(); ++j)
            for (Index t = 0; t < predictions.leadtimes(); ++t) {
                for (Index m = 0; m < predictions.targets(); ++m) y(m) = truths(n, t, m);
                const Vector e = score.evaluate(predictions.get(n, j, t), y);
                for (Index m = 0; m < predictions.targets(); ++m)
                    prof.values(j, t, m) += e(m);
            }
    }
    for (auto& v : prof.values.raw()) v /= static_cast<double>(samples);

    prof.relative = Tensor3(predictions.members(), predictions.leadtimes(),
                            predictions.targets());
    for (Index j = 0; j < predictions.members(); ++j)
        for (Index m = 0; m < predictions.targets(); ++m) {
            double total = 0.0;
            for (Index t = 0; t < predictions.leadtimes(); ++t)
                total += prof.values(j, t, m);
            if (total > kLeadtimeEpsilon) {
                for (Index t = 0; t < predictions.leadtimes(); ++t)
                    prof.relative(j, t, m) = prof.values(j, t, m) / total;
            } else {
                // perfect member: uniform relative profile
                for (Index t = 0; t < predictions.leadtimes(); ++t)
                    prof.relative(j, t, m) = 1.0 / static_cast<double>(predictions.leadtimes());
            }
        }
    return prof;
}

inline LeadtimeErrorProfile leadtime_error_scores(const PredictionTensor& predictions,
                                                  const Matrix& truths,
                                                  const ScoreFunction& score) {
    if (predictions.samples() != truths.rows())
        throw ShapeMismatch("leadtime_error_scores: sample counts differ");
    return leadtime_error_scores(
        predictions, broadcast_truths(truths, predictions.leadtimes()), score);
}

inline WeightMatrix time_weights(const LeadtimeErrorProfile& profile, Index t,
                                 Eta eta_time, double epsilon = kDefaultEpsilon) {
    return soft_gate(profile.at(t), eta_time, epsilon);
}

} // namespace xcsge
