#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "xcsge/data.hpp"
#include "xcsge/members.hpp"
#include "xcsge/types.hpp"

namespace xcsge {

/// Closed-form ridge solution for one leadtime: per-dimension coefficients
/// plus an unpenalized intercept.
struct RidgeModel {
    Matrix coefficients;  ///< F x M
    Vector intercept;     ///< M
    double lambda = 0.0;

    Vector predict(const Vector& x) const {
        if (x.size() != coefficients.rows())
            throw DimensionMismatch("ridge: feature dimensionality mismatch");
        return coefficients.transpose() * x + intercept;
    }
};

/// Minimizes ||X b - y||^2 + lambda ||b||^2 per target dimension via the
/// normal equations on centered data; the intercept is not penalized.
inline RidgeModel ridge_fit(const Matrix& features, const Matrix& targets, double lambda) {
    if (features.rows() == 0) throw EmptyDataset("ridge_fit: no samples");
    if (features.rows() != targets.rows())
        throw ShapeMismatch("ridge_fit: feature/target row mismatch");
    if (lambda < 0.0) throw NonFiniteInput("ridge_fit: lambda must be >= 0");

    const Vector x_mean = features.colwise().mean().transpose();
    const Vector y_mean = targets.colwise().mean().transpose();
    const Matrix xc = features.rowwise() - x_mean.transpose();
    const Matrix yc = targets.rowwise() - y_mean.transpose();

    Matrix gram = xc.transpose() * xc;
    gram.diagonal().array() += lambda;
    if (lambda == 0.0) {
        Eigen::ColPivHouseholderQR<Matrix> qr(xc);
        if (qr.rank() < xc.cols())
            throw SingularSystem("ridge_fit: rank-deficient design with lambda = 0");
    }
    Eigen::LDLT<Matrix> solver(gram);
    if (solver.info() != Eigen::Success)
        throw SingularSystem("ridge_fit: normal equations not solvable");

    RidgeModel model;
    model.lambda = lambda;
    model.coefficients = solver.solve(xc.transpose() * yc);
    model.intercept = y_mean - model.coefficients.transpose() * x_mean;
    require_finite(model.coefficients, "ridge coefficients");
    return model;
}

/// Ridge ensemble member: one closed-form fit per leadtime, all trained on
/// issue-row features against the leadtime-shifted truth.
class RidgeMember final : public EnsembleMember {
public:
    RidgeMember(std::string id, std::vector<RidgeModel> per_leadtime)
        : id_(std::move(id)), models_(std::move(per_leadtime)) {}

    static std::shared_ptr<RidgeMember> fit(std::string id, const Dataset& ds,
                                            const std::vector<Index>& rows, double lambda) {
        Matrix x(static_cast<Index>(rows.size()), ds.feature_count());
        for (std::size_t i = 0; i < rows.size(); ++i)
            x.row(static_cast<Index>(i)) = ds.features.row(rows[i]);
        std::vector<RidgeModel> models;
        for (Index t = 0; t < ds.leadtimes(); ++t) {
            Matrix y(static_cast<Index>(rows.size()), ds.target_count());
            for (std::size_t i = 0; i < rows.size(); ++i)
                y.row(static_cast<Index>(i)) = ds.truth(rows[i], t).transpose();
            models.push_back(ridge_fit(x, y, lambda));
        }
        return std::make_shared<RidgeMember>(std::move(id), std::move(models));
    }

    Vector predict(const Query& q, Index t) const override {
        return model_at(t).predict(q.current());
    }
    std::string id() const override { return id_; }
    const std::vector<RidgeModel>& models() const { return models_; }

private:
    const RidgeModel& model_at(Index t) const {
        if (t < 0 || static_cast<std::size_t>(t) >= models_.size())
            throw LeadtimeOutOfRange("ridge member: leadtime out of range");
        return models_[static_cast<std::size_t>(t)];
    }
    std::string id_;
    std::vector<RidgeModel> models_;
};

enum class KnnMode { Regress, Classify };

/// Instance-based member: mean (regression) or class-frequency vector
/// (classification) over the k nearest reference rows. Euclidean distance;
/// ties at the k-th distance break toward the lowest sample index.
class KnnMember final : public EnsembleMember {
public:
    KnnMember(std::string id, Matrix ref_features, Tensor3 ref_targets, int k, KnnMode mode)
        : id_(std::move(id)), features_(std::move(ref_features)),
          targets_(std::move(ref_targets)), k_(k), mode_(mode) {
        if (k_ < 1 || features_.rows() < k_)
            throw InsufficientSamples("knn member: need at least k reference samples");
        if (features_.rows() != targets_.dim0())
            throw ShapeMismatch("knn member: reference shape mismatch");
    }

    static std::shared_ptr<KnnMember> fit(std::string id, const Dataset& ds,
                                          const std::vector<Index>& rows, int k,
                                          KnnMode mode = KnnMode::Regress) {
        Matrix x(static_cast<Index>(rows.size()), ds.feature_count());
        Tensor3 y(static_cast<Index>(rows.size()), ds.leadtimes(), ds.target_count());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            x.row(static_cast<Index>(i)) = ds.features.row(rows[i]);
            for (Index t = 0; t < ds.leadtimes(); ++t) {
                const Vector truth = ds.truth(rows[i], t);
                for (Index m = 0; m < ds.target_count(); ++m)
                    y(static_cast<Index>(i), t, m) = truth(m);
            }
        }
        return std::make_shared<KnnMember>(std::move(id), std::move(x), std::move(y), k, mode);
    }

    Vector predict(const Query& q, Index t) const override {
        if (t < 0 || t >= targets_.dim1())
            throw LeadtimeOutOfRange("knn member: leadtime out of range");
        const Vector& x = q.current();
        if (x.size() != features_.cols())
            throw DimensionMismatch("knn member: query dimensionality mismatch");
        const Index n = features_.rows();
        Vector d2(n);
        for (Index i = 0; i < n; ++i)
            d2(i) = (features_.row(i).transpose() - x).squaredNorm();
        std::vector<Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Index{0});
        std::partial_sort(idx.begin(), idx.begin() + k_, idx.end(),
                          [&](Index a, Index b) {
                              return d2(a) != d2(b) ? d2(a) < d2(b) : a < b;
                          });

        const Index m_dims = targets_.dim2();
        Vector out = Vector::Zero(m_dims);
        if (mode_ == KnnMode::Regress) {
            for (int i = 0; i < k_; ++i) {
                const Index r = idx[static_cast<std::size_t>(i)];
                for (Index m = 0; m < m_dims; ++m) out(m) += targets_(r, t, m);
            }
            out /= static_cast<double>(k_);
        } else {
            for (int i = 0; i < k_; ++i) {
                const Index r = idx[static_cast<std::size_t>(i)];
                Index best = 0;
                for (Index m = 1; m < m_dims; ++m)
                    if (targets_(r, t, m) > targets_(r, t, best)) best = m;
                out(best) += 1.0;
            }
            out /= static_cast<double>(k_);
        }
        return out;
    }

    std::string id() const override { return id_; }
    int k() const { return k_; }
    KnnMode mode() const { return mode_; }
    const Matrix& reference_features() const { return features_; }
    const Tensor3& reference_targets() const { return targets_; }

private:
    std::string id_;
    Matrix features_;
    Tensor3 targets_;  ///< (reference row, leadtime, dimension)
    int k_;
    KnnMode mode_;
};

/// Echoes the designated last-observed-target feature at every leadtime.
class PersistenceMember final : public EnsembleMember {
public:
    PersistenceMember(std::string id, Index feature_column, Index target_dims)
        : id_(std::move(id)), column_(feature_column), dims_(target_dims) {}

    Vector predict(const Query& q, Index) const override {
        const Vector& x = q.current();
        if (column_ < 0 || column_ >= x.size())
            throw DimensionMismatch("persistence member: feature column out of range");
        return Vector::Constant(dims_, x(column_));
    }

    std::string id() const override { return id_; }
    Index feature_column() const { return column_; }
    Index target_dims() const { return dims_; }

private:
    std::string id_;
    Index column_;
    Index dims_;
};

/// File-backed member answering from a (sample id, leadtime) -> prediction
/// table; covers heterogeneous external models without reimplementing them.
class PrecomputedMember final : public EnsembleMember {
public:
    using Table = std::map<std::pair<std::string, Index>, Vector>;

    PrecomputedMember(std::string id, Table table, Index target_dims)
        : id_(std::move(id)), table_(std::move(table)), dims_(target_dims) {}

    Vector predict(const Query& q, Index t) const override {
        if (!q.sample_id())
            throw MissingPrediction("precomputed member: query carries no sample id");
        auto it = table_.find({*q.sample_id(), t});
        if (it == table_.end())
            throw MissingPrediction("precomputed member: no prediction for sample " +
                                    *q.sample_id() + " at leadtime " + std::to_string(t));
        return it->second;
    }

    std::string id() const override { return id_; }
    Index target_dims() const { return dims_; }
    const Table& table() const { return table_; }

    /// Checks that every (sample, leadtime) pair is present; throws
    /// IncompleteCoverage naming the first missing pair.
    void validate_coverage(const std::vector<std::string>& sample_ids,
                           Index leadtimes) const {
        for (const auto& s : sample_ids)
            for (Index t = 0; t < leadtimes; ++t)
                if (table_.find({s, t}) == table_.end())
                    throw IncompleteCoverage("precomputed member '" + id_ +
                                             "': missing (sample " + s + ", leadtime " +
                                             std::to_string(t) + ")");
    }

private:
    std::string id_;
    Table table_;
    Index dims_;
};

/// Loads a precomputed-prediction CSV with header
/// `sample_id,leadtime,p_0,...,p_{M-1}`. With `validate_proba`, every row
/// must lie on the probability simplex within 1e-6.
inline std::shared_ptr<PrecomputedMember> load_precomputed(const std::string& path,
                                                           std::string id,
                                                           bool validate_proba = false) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open precomputed csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty precomputed csv: " + path);
    const auto header = detail::split_csv_line(line);
    if (header.size() < 3 || header[0] != "sample_id" || header[1] != "leadtime")
        throw ParseError("precomputed csv: header must be sample_id,leadtime,p_0,...");
    const Index dims = static_cast<Index>(header.size()) - 2;

    PrecomputedMember::Table table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("precomputed csv line " + std::to_string(lineno) +
                             ": wrong cell count");
        double t_raw;
        if (!detail::parse_double(cells[1], t_raw) || t_raw < 0 ||
            t_raw != std::floor(t_raw))
            throw ParseError("precomputed csv line " + std::to_string(lineno) +
                             ": bad leadtime");
        Vector p(dims);
        for (Index m = 0; m < dims; ++m) {
            if (!detail::parse_double(cells[static_cast<std::size_t>(m) + 2], p(m)))
                throw ParseError("precomputed csv line " + std::to_string(lineno) +
                                 ": bad value in " + header[static_cast<std::size_t>(m) + 2]);
        }
        if (validate_proba &&
            (std::abs(p.sum() - 1.0) > 1e-6 || (p.array() < 0.0).any()))
            throw ParseError("precomputed csv line " + std::to_string(lineno) +
                             ": probabilities do not sum to 1");
        table[{cells[0], static_cast<Index>(t_raw)}] = std::move(p);
    }
    return std::make_shared<PrecomputedMember>(std::move(id), std::move(table), dims);
}

} // namespace xcsge
