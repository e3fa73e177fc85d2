#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "xcsge/types.hpp"

namespace xcsge {

/// Clipping bound used for probabilities in the log-loss score.
inline constexpr double kProbClip = 1e-15;

/// Per-sample, per-dimension error functional. Lower is better; outputs
/// are finite and nonnegative.
class ScoreFunction {
public:
    using Fn = std::function<Vector(const Vector& prediction, const Vector& truth)>;

    ScoreFunction() = default;
    ScoreFunction(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

    Vector evaluate(const Vector& prediction, const Vector& truth) const {
        if (prediction.size() != truth.size())
            throw DimensionMismatch("score: prediction/truth length mismatch");
        Vector e = fn_(prediction, truth);
        require_finite(e, "score output");
        return e;
    }

    const std::string& name() const { return name_; }

    /// (p - y)^2 per dimension.
    static ScoreFunction squared_error() {
        return ScoreFunction("squared_error", [](const Vector& p, const Vector& y) {
            return Vector((p - y).array().square());
        });
    }

    /// Multiclass log loss against a one-hot (or soft) truth vector. The
    /// predicted probability is clipped to [1e-15, 1 - 1e-15] before the
    /// logarithm. The loss is attributed to the true-class dimensions so the
    /// output stays a per-dimension vector.
    static ScoreFunction log_loss() {
        return ScoreFunction("log_loss", [](const Vector& p, const Vector& y) {
            Vector e = Vector::Zero(p.size());
            for (Index m = 0; m < p.size(); ++m) {
                if (y(m) <= 0.0) continue;
                const double q = std::clamp(p(m), kProbClip, 1.0 - kProbClip);
                e(m) = -y(m) * std::log(q);
            }
            return e;
        });
    }

    static ScoreFunction by_name(const std::string& name) {
        if (name == "squared_error") return squared_error();
        if (name == "log_loss") return log_loss();
        throw SchemaMismatch("unknown score function: " + name);
    }

private:
    std::string name_;
    Fn fn_;
};

} // namespace xcsge
