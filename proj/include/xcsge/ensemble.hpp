#pragma once

#include <future>
#include <memory>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "xcsge/data.hpp"
#include "xcsge/members.hpp"
#include "xcsge/weighting.hpp"

namespace xcsge {

/// Hard upper bound of the gate exponent; beyond this the gate is
/// indistinguishable from hard selection at double precision.
inline constexpr double kEtaMax = 64.0;

struct EtaTriple {
    Eta global{1.0};
    Eta local{1.0};
    Eta time{1.0};

    double sum() const { return global.value + local.value + time.value; }
};

struct EtaSearchConfig {
    std::vector<double> grid = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    double regularization = 0.0;  ///< c of the eta objective
    bool coordinate_refine = false;
    int threads = 1;
};

struct XcsgeConfig {
    ScoreFunction score = ScoreFunction::squared_error();
    LocalModelConfig local;
    EtaSearchConfig search;
    double epsilon = kDefaultEpsilon;
    bool classification = false;
    bool renormalize_proba = true;
};

/// Hadamard product of the three aspect weights, masked members zeroed,
/// renormalized per target dimension. A column that collapses to zero falls
/// back to uniform weights over the unmasked members.
inline WeightMatrix combine_weights(const WeightMatrix& wg, const WeightMatrix& wl,
                                    const WeightMatrix& wk,
                                    const std::vector<bool>& mask) {
    if (wg.rows() != wl.rows() || wg.rows() != wk.rows() || wg.cols() != wl.cols() ||
        wg.cols() != wk.cols())
        throw ShapeMismatch("combine_weights: aspect shapes differ");
    if (static_cast<Index>(mask.size()) != wg.rows())
        throw ShapeMismatch("combine_weights: mask length mismatch");

    Index active = 0;
    for (bool b : mask) active += b ? 1 : 0;
    if (active == 0) throw AllMembersMasked("combine_weights: every member masked");

    WeightMatrix w = wg.cwiseProduct(wl).cwiseProduct(wk);
    for (Index j = 0; j < w.rows(); ++j)
        if (!mask[static_cast<std::size_t>(j)]) w.row(j).setZero();

    for (Index m = 0; m < w.cols(); ++m) {
        // scalar sum over the unmasked members, in index order: keeps the
        // arithmetic independent of how many masked rows sit in between
        double total = 0.0;
        for (Index j = 0; j < w.rows(); ++j)
            if (mask[static_cast<std::size_t>(j)]) total += w(j, m);
        if (total > 0.0) {
            w.col(m) /= total;
        } else {
            for (Index j = 0; j < w.rows(); ++j)
                w(j, m) = mask[static_cast<std::size_t>(j)]
                              ? 1.0 / static_cast<double>(active)
                              : 0.0;
        }
    }
    return w;
}

namespace detail {

/// Soft gate over the unmasked subset only; masked members get weight 0.
/// Restricting the reference set keeps the surviving members' arithmetic
/// identical to an ensemble that never contained the masked ones.
inline WeightMatrix gate_masked(const ErrorMatrix& errors, const std::vector<bool>& mask,
                                Eta eta, double epsilon) {
    Index active = 0;
    for (bool b : mask) active += b ? 1 : 0;
    if (active == 0) throw AllMembersMasked("soft gate: every member masked");
    if (active == errors.rows()) return soft_gate(errors, eta, epsilon);

    ErrorMatrix sub(active, errors.cols());
    Index r = 0;
    for (Index j = 0; j < errors.rows(); ++j)
        if (mask[static_cast<std::size_t>(j)]) sub.row(r++) = errors.row(j);
    const WeightMatrix sub_w = soft_gate(sub, eta, epsilon);

    WeightMatrix w = WeightMatrix::Zero(errors.rows(), errors.cols());
    r = 0;
    for (Index j = 0; j < errors.rows(); ++j)
        if (mask[static_cast<std::size_t>(j)]) w.row(j) = sub_w.row(r++);
    return w;
}

} // namespace detail

struct Prediction {
    Vector value;
    WeightMatrix weights;  ///< effective per-member weights (J x M)
};

/// Fitted ensemble: members, gate exponents, global scores, local error
/// models, leadtime profile, and the member mask. Immutable except for the
/// mask; predict is const and thread-safe.
class XcsgeModel {
public:
    XcsgeModel() = default;
    XcsgeModel(std::vector<MemberPtr> members, EtaTriple eta, ErrorMatrix global_scores,
               std::vector<std::shared_ptr<LocalErrorModel>> local_models,
               LeadtimeErrorProfile profile, XcsgeConfig config)
        : members_(std::move(members)), eta_(eta), global_scores_(std::move(global_scores)),
          local_models_(std::move(local_models)), profile_(std::move(profile)),
          config_(std::move(config)), mask_(members_.size(), true) {
        if (members_.empty()) throw EmptyEnsemble("XcsgeModel: no members");
        if (global_scores_.rows() != static_cast<Index>(members_.size()) ||
            static_cast<Index>(local_models_.size()) != global_scores_.rows() ||
            profile_.members() != global_scores_.rows())
            throw ShapeMismatch("XcsgeModel: component sizes disagree");
    }

    Index member_count() const { return static_cast<Index>(members_.size()); }
    Index target_count() const { return global_scores_.cols(); }
    Index leadtimes() const { return profile_.leadtimes(); }
    const std::vector<MemberPtr>& members() const { return members_; }
    const EtaTriple& eta() const { return eta_; }
    const ErrorMatrix& global_scores() const { return global_scores_; }
    const std::vector<std::shared_ptr<LocalErrorModel>>& local_models() const {
        return local_models_;
    }
    const LeadtimeErrorProfile& profile() const { return profile_; }
    const XcsgeConfig& config() const { return config_; }
    const std::vector<bool>& mask() const { return mask_; }

    /// Subsequent predictions renormalize over the unmasked members only.
    void set_member_mask(std::vector<bool> mask) {
        if (mask.size() != members_.size())
            throw ShapeMismatch("set_member_mask: mask length mismatch");
        bool any = false;
        for (bool b : mask) any = any || b;
        if (!any) throw AllMembersMasked("set_member_mask: every member masked");
        mask_ = std::move(mask);
    }

    WeightMatrix global_weights_at() const {
        return detail::gate_masked(global_scores_, mask_, eta_.global, config_.epsilon);
    }

    WeightMatrix local_weights_at(const Vector& x) const {
        ErrorMatrix q = local_error_estimates(x, local_models_);
        return detail::gate_masked(q, mask_, eta_.local, config_.epsilon);
    }

    WeightMatrix time_weights_at(Index t) const {
        return detail::gate_masked(profile_.at(t), mask_, eta_.time, config_.epsilon);
    }

    Prediction predict_explain(const Query& q, Index t) const {
        if (t < 0 || t >= leadtimes())
            throw LeadtimeOutOfRange("predict: leadtime out of range");
        const WeightMatrix w = combine_weights(global_weights_at(),
                                               local_weights_at(q.current()),
                                               time_weights_at(t), mask_);
        Vector out = Vector::Zero(target_count());
        for (Index j = 0; j < member_count(); ++j) {
            if (!mask_[static_cast<std::size_t>(j)]) continue;
            const Vector p = members_[static_cast<std::size_t>(j)]->predict(q, t);
            if (p.size() != target_count())
                throw DimensionMismatch("predict: member output length mismatch");
            out += w.row(j).transpose().cwiseProduct(p);
        }
        if (config_.classification && config_.renormalize_proba) {
            const double total = out.sum();
            if (total > 0.0) out /= total;
        }
        return {std::move(out), w};
    }

    Vector predict(const Query& q, Index t) const { return predict_explain(q, t).value; }

private:
    std::vector<MemberPtr> members_;
    EtaTriple eta_;
    ErrorMatrix global_scores_;
    std::vector<std::shared_ptr<LocalErrorModel>> local_models_;
    LeadtimeErrorProfile profile_;
    XcsgeConfig config_;
    std::vector<bool> mask_;
};

/// Everything the eta objective needs, precomputed once: member predictions,
/// local error estimates, and truths on the validation samples. Grid points
/// evaluate gates only, which keeps the search cheap and parallelizable.
struct EtaObjectiveData {
    PredictionTensor predictions;  ///< (sample, member, leadtime, dim)
    Tensor3 local_estimates;       ///< (sample, member, dim), already clamped
    Tensor3 truths;                ///< (sample, leadtime, dim)
    ErrorMatrix global_scores;
    LeadtimeErrorProfile profile;
    XcsgeConfig config;

    /// Search objective: summed per-sample score of the fused prediction
    /// plus c * (eta_g + eta_l + eta_t).
    double objective(const EtaTriple& eta, double c) const {
        const Index n_samples = predictions.samples();
        const Index j_members = predictions.members();
        const Index t_steps = predictions.leadtimes();
        const Index m_dims = predictions.targets();
        const std::vector<bool> mask(static_cast<std::size_t>(j_members), true);

        const WeightMatrix wg = soft_gate(global_scores, eta.global, config.epsilon);
        std::vector<WeightMatrix> wk;
        wk.reserve(static_cast<std::size_t>(t_steps));
        for (Index t = 0; t < t_steps; ++t)
            wk.push_back(soft_gate(profile.at(t), eta.time, config.epsilon));

        double data_term = 0.0;
        ErrorMatrix q(j_members, m_dims);
        Vector fused(m_dims), y(m_dims);
        for (Index n = 0; n < n_samples; ++n) {
            for (Index j = 0; j < j_members; ++j)
                for (Index m = 0; m < m_dims; ++m) q(j, m) = local_estimates(n, j, m);
            const WeightMatrix wl = soft_gate(q, eta.local, config.epsilon);
            for (Index t = 0; t < t_steps; ++t) {
                const WeightMatrix w = combine_weights(wg, wl, wk[static_cast<std::size_t>(t)], mask);
                fused.setZero();
                for (Index j = 0; j < j_members; ++j)
                    for (Index m = 0; m < m_dims; ++m)
                        fused(m) += w(j, m) * predictions.at(n, j, t, m);
                if (config.classification && config.renormalize_proba) {
                    const double total = fused.sum();
                    if (total > 0.0) fused /= total;
                }
                for (Index m = 0; m < m_dims; ++m) y(m) = truths(n, t, m);
                data_term += config.score.evaluate(fused, y).sum();
            }
        }
        return data_term + c * eta.sum();
    }
};

namespace detail {

inline bool eta_less(const EtaTriple& a, const EtaTriple& b) {
    if (a.sum() != b.sum()) return a.sum() < b.sum();
    if (a.global.value != b.global.value) return a.global.value < b.global.value;
    if (a.local.value != b.local.value) return a.local.value < b.local.value;
    return a.time.value < b.time.value;
}

} // namespace detail

/// Exhaustive grid search over the per-axis grid, optional coordinate
/// refinement. Ties break toward the smaller eta sum, then lexicographically.
inline EtaTriple optimize_eta(const EtaObjectiveData& data, const EtaSearchConfig& search) {
    if (search.grid.empty()) throw EmptyGrid("optimize_eta: empty grid");
    const double c = search.regularization;

    std::vector<EtaTriple> points;
    for (double g : search.grid)
        for (double l : search.grid)
            for (double t : search.grid) points.push_back({Eta(g), Eta(l), Eta(t)});

    std::vector<double> values(points.size());
    const int threads = std::max(1, search.threads);
    if (threads == 1) {
        for (std::size_t i = 0; i < points.size(); ++i)
            values[i] = data.objective(points[i], c);
    } else {
        std::vector<std::future<void>> futures;
        const std::size_t chunk = (points.size() + threads - 1) / threads;
        for (int w = 0; w < threads; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(points.size(), lo + chunk);
            if (lo >= hi) break;
            futures.push_back(std::async(std::launch::async, [&, lo, hi] {
                for (std::size_t i = lo; i < hi; ++i)
                    values[i] = data.objective(points[i], c);
            }));
        }
        for (auto& f : futures) f.get();
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i)
        if (values[i] < values[best] ||
            (values[i] == values[best] && detail::eta_less(points[i], points[best])))
            best = i;

    EtaTriple eta = points[best];
    double obj = values[best];

    if (search.coordinate_refine) {
        const double factors[] = {0.5, 0.75, 1.5, 2.0};
        for (int pass = 0; pass < 2; ++pass)
            for (int axis = 0; axis < 3; ++axis)
                for (double f : factors) {
                    EtaTriple cand = eta;
                    double* v = axis == 0 ? &cand.global.value
                               : axis == 1 ? &cand.local.value
                                           : &cand.time.value;
                    *v = std::min(kEtaMax, *v * f);
                    const double cv = data.objective(cand, c);
                    if (cv < obj || (cv == obj && detail::eta_less(cand, eta))) {
                        obj = cv;
                        eta = cand;
                    }
                }
    }
    return eta;
}

/// Assembles the eta-search cache and fitted weighting state from member
/// predictions on the ensemble split.
struct FitResult {
    XcsgeModel model;
    EtaObjectiveData search_data;
    std::vector<Index> issue_rows;  ///< rows of the split the fit used
};

/// Fits the ensemble on its (held-out) split: computes member predictions
/// for all leadtimes, derives global scores, local error models and the
/// leadtime profile, then optimizes the eta triple. `candidate_rows`
/// restricts the issue rows (rows lacking history or horizon are skipped);
/// by default every usable row of the split is used.
inline FitResult fit_xcsge(std::vector<MemberPtr> members, const Dataset& ensemble_split,
                           const XcsgeConfig& config,
                           const std::vector<Index>* candidate_rows = nullptr) {
    if (members.empty()) throw EmptyEnsemble("fit_xcsge: no members");
    int max_lag = 0;
    for (const auto& m : members) max_lag = std::max(max_lag, m->lag());

    std::vector<Index> rows;
    if (candidate_rows) {
        const Index last_offset =
            ensemble_split.frame
                ? ensemble_split.frame->k_min +
                      (ensemble_split.leadtimes() - 1) * ensemble_split.frame->delta
                : 0;
        for (Index n : *candidate_rows)
            if (n >= max_lag && n + last_offset < ensemble_split.rows()) rows.push_back(n);
    } else {
        rows = ensemble_split.issue_rows(max_lag + 1);
    }
    if (rows.empty()) throw EmptyDataset("fit_xcsge: no usable samples in ensemble split");

    const Index n_samples = static_cast<Index>(rows.size());
    const Index j_members = static_cast<Index>(members.size());
    const Index t_steps = ensemble_split.leadtimes();
    const Index m_dims = ensemble_split.target_count();

    EtaObjectiveData data;
    data.config = config;
    data.predictions = PredictionTensor(n_samples, j_members, t_steps, m_dims);
    data.truths = Tensor3(n_samples, t_steps, m_dims);
    Matrix features(n_samples, ensemble_split.feature_count());
    for (Index n = 0; n < n_samples; ++n) {
        const Query q = ensemble_split.query(rows[static_cast<std::size_t>(n)], max_lag + 1);
        features.row(n) = q.current().transpose();
        for (Index j = 0; j < j_members; ++j)
            for (Index t = 0; t < t_steps; ++t) {
                const Vector p = members[static_cast<std::size_t>(j)]->predict(q, t);
                if (p.size() != m_dims)
                    throw DimensionMismatch("fit_xcsge: member output length mismatch");
                data.predictions.set(n, j, t, p);
            }
        for (Index t = 0; t < t_steps; ++t) {
            const Vector y = ensemble_split.truth(rows[static_cast<std::size_t>(n)], t);
            for (Index m = 0; m < m_dims; ++m) data.truths(n, t, m) = y(m);
        }
    }

    const Tensor3 sample_errors = per_sample_errors(data.predictions, data.truths, config.score);
    data.global_scores = global_error_scores(sample_errors);
    data.profile = leadtime_error_scores(data.predictions, data.truths, config.score);

    auto local_models = fit_local_error_models(features, sample_errors, config.local);
    data.local_estimates = Tensor3(n_samples, j_members, m_dims);
    for (Index n = 0; n < n_samples; ++n) {
        const ErrorMatrix q = local_error_estimates(features.row(n).transpose(), local_models);
        for (Index j = 0; j < j_members; ++j)
            for (Index m = 0; m < m_dims; ++m) data.local_estimates(n, j, m) = q(j, m);
    }

    const EtaTriple eta = optimize_eta(data, config.search);

    FitResult result{XcsgeModel(std::move(members), eta, data.global_scores,
                                std::move(local_models), data.profile, config),
                     std::move(data), rows};
    return result;
}

} // namespace xcsge
