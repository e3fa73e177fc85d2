#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <vector>

#include "xcsge/errors.hpp"

namespace xcsge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// J x M matrix of nonnegative, finite error scores (one row per member).
using ErrorMatrix = Matrix;

/// J x M matrix of weights; every column sums to 1.
using WeightMatrix = Matrix;

/// Dense 3-d array with value semantics, indexed (i, j, k).
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(Index d0, Index d1, Index d2)
        : d0_(d0), d1_(d1), d2_(d2),
          data_(static_cast<std::size_t>(d0 * d1 * d2), 0.0) {}

    double& operator()(Index i, Index j, Index k) {
        return data_[static_cast<std::size_t>((i * d1_ + j) * d2_ + k)];
    }
    double operator()(Index i, Index j, Index k) const {
        return data_[static_cast<std::size_t>((i * d1_ + j) * d2_ + k)];
    }

    Index dim0() const { return d0_; }
    Index dim1() const { return d1_; }
    Index dim2() const { return d2_; }
    const std::vector<double>& raw() const { return data_; }
    std::vector<double>& raw() { return data_; }

private:
    Index d0_ = 0, d1_ = 0, d2_ = 0;
    std::vector<double> data_;
};

/// Member predictions for a batch: indexed (sample, member, leadtime) -> length-M vector.
class PredictionTensor {
public:
    PredictionTensor() = default;
    PredictionTensor(Index samples, Index members, Index leadtimes, Index targets)
        : n_(samples), j_(members), t_(leadtimes), m_(targets),
          data_(static_cast<std::size_t>(samples * members * leadtimes * targets), 0.0) {}

    double& at(Index n, Index j, Index t, Index m) {
        return data_[offset(n, j, t, m)];
    }
    double at(Index n, Index j, Index t, Index m) const {
        return data_[offset(n, j, t, m)];
    }

    void set(Index n, Index j, Index t, const Vector& p) {
        for (Index m = 0; m < m_; ++m) data_[offset(n, j, t, m)] = p(m);
    }
    Vector get(Index n, Index j, Index t) const {
        Vector p(m_);
        for (Index m = 0; m < m_; ++m) p(m) = data_[offset(n, j, t, m)];
        return p;
    }

    Index samples() const { return n_; }
    Index members() const { return j_; }
    Index leadtimes() const { return t_; }
    Index targets() const { return m_; }

private:
    std::size_t offset(Index n, Index j, Index t, Index m) const {
        return static_cast<std::size_t>(((n * j_ + j) * t_ + t) * m_ + m);
    }
    Index n_ = 0, j_ = 0, t_ = 0, m_ = 0;
    std::vector<double> data_;
};

inline void require_finite(const Matrix& a, const char* what) {
    if (!a.allFinite())
        throw NonFiniteInput(std::string(what) + ": non-finite entry");
}

inline void require_finite(const Vector& a, const char* what) {
    if (!a.allFinite())
        throw NonFiniteInput(std::string(what) + ": non-finite entry");
}

} // namespace xcsge
