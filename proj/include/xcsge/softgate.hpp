#pragma once

#include <cmath>

#include "xcsge/types.hpp"

namespace xcsge {

/// Default stabilizer for the soft-gate division.
inline constexpr double kDefaultEpsilon = 1e-9;

/// Exponent of the soft gate. 0 gives uniform weights, large values
/// approach hard selection of the best member.
struct Eta {
    double value = 1.0;

    Eta() = default;
    Eta(double v) : value(v) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw NonFiniteInput("Eta must be finite and >= 0");
    }
    operator double() const { return value; }
};

namespace detail {

inline void check_reference_errors(const ErrorMatrix& omega) {
    if (omega.rows() == 0)
        throw EmptyEnsemble("soft gate: no ensemble members");
    if (omega.cols() == 0)
        throw ShapeMismatch("soft gate: zero target dimensions");
    require_finite(omega, "soft gate reference errors");
    if ((omega.array() < 0.0).any())
        throw NonFiniteInput("soft gate: negative error score");
}

} // namespace detail

/// Unnormalized gate response for one member: per dimension m,
/// sum_j omega(j,m) / (rho(m)^eta + epsilon). Strictly decreasing in rho.
inline Vector soft_gate_raw(const ErrorMatrix& reference_errors,
                            const Vector& member_error, Eta eta,
                            double epsilon = kDefaultEpsilon) {
    detail::check_reference_errors(reference_errors);
    if (member_error.size() != reference_errors.cols())
        throw ShapeMismatch("soft gate: member error length != target dimensions");
    require_finite(member_error, "soft gate member error");
    if ((member_error.array() < 0.0).any())
        throw NonFiniteInput("soft gate: negative member error");
    if (!(epsilon > 0.0))
        throw NonFiniteInput("soft gate: epsilon must be > 0");

    const Index m_dims = reference_errors.cols();
    Vector raw(m_dims);
    for (Index m = 0; m < m_dims; ++m) {
        const double numer = reference_errors.col(m).sum();
        raw(m) = numer / (std::pow(member_error(m), eta.value) + epsilon);
    }
    return raw;
}

/// Normalized soft gate: row j holds member j's weight per target dimension;
/// every column sums to 1.
inline WeightMatrix soft_gate(const ErrorMatrix& reference_errors, Eta eta,
                              double epsilon = kDefaultEpsilon) {
    detail::check_reference_errors(reference_errors);
    const Index members = reference_errors.rows();
    const Index m_dims = reference_errors.cols();

    WeightMatrix raw(members, m_dims);
    for (Index j = 0; j < members; ++j)
        raw.row(j) = soft_gate_raw(reference_errors,
                                   reference_errors.row(j).transpose(), eta,
                                   epsilon)
                         .transpose();

    for (Index m = 0; m < m_dims; ++m)
        raw.col(m) /= raw.col(m).sum();
    return raw;
}

} // namespace xcsge
