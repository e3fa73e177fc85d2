#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xcsge/types.hpp"

namespace xcsge {

/// Input of a single prediction: the current feature vector plus, when
/// available, preceding frames (frame(0) is the current row, frame(l) the
/// row l time units earlier). Precomputed members identify the sample by id.
class Query {
public:
    Query() = default;
    Query(Vector x) { frames_.push_back(std::move(x)); }
    Query(std::vector<Vector> frames, std::optional<std::string> sample_id = {})
        : frames_(std::move(frames)), sample_id_(std::move(sample_id)) {}

    const Vector& current() const { return frame(0); }

    const Vector& frame(int lag) const {
        if (lag < 0 || static_cast<std::size_t>(lag) >= frames_.size())
            throw MissingHistory("query: no frame at lag " + std::to_string(lag));
        return frames_[static_cast<std::size_t>(lag)];
    }

    int history_depth() const { return static_cast<int>(frames_.size()); }
    const std::optional<std::string>& sample_id() const { return sample_id_; }
    void set_sample_id(std::string id) { sample_id_ = std::move(id); }

private:
    std::vector<Vector> frames_;
    std::optional<std::string> sample_id_;
};

/// A fitted strong learner usable as an ensemble member. Immutable once
/// constructed; predict is const and thread-safe.
class EnsembleMember {
public:
    virtual ~EnsembleMember() = default;

    virtual Vector predict(const Query& q, Index leadtime) const = 0;
    virtual std::string id() const = 0;

    /// Time shift of this member; 0 for unlagged members.
    virtual int lag() const { return 0; }
};

using MemberPtr = std::shared_ptr<const EnsembleMember>;

/// Wraps an arbitrary prediction function; mainly for tests and embedding.
class FunctionalMember final : public EnsembleMember {
public:
    using Fn = std::function<Vector(const Query&, Index)>;
    FunctionalMember(std::string id, Fn fn) : id_(std::move(id)), fn_(std::move(fn)) {}

    Vector predict(const Query& q, Index t) const override { return fn_(q, t); }
    std::string id() const override { return id_; }

private:
    std::string id_;
    Fn fn_;
};

/// Time-lagged view of a base member: delegates to the base at the
/// lag-shifted feature frame.
class LaggedMember final : public EnsembleMember {
public:
    LaggedMember(MemberPtr base, int lag) : base_(std::move(base)), lag_(lag) {
        if (lag_ < 0) throw InvalidLagCount("lagged member: negative lag");
    }

    Vector predict(const Query& q, Index t) const override {
        if (lag_ == 0) return base_->predict(q, t);
        Query shifted(std::vector<Vector>{q.frame(lag_)}, q.sample_id());
        return base_->predict(shifted, t);
    }

    std::string id() const override {
        return lag_ == 0 ? base_->id() : base_->id() + "@lag" + std::to_string(lag_);
    }
    int lag() const override { return lag_; }
    const MemberPtr& base() const { return base_; }

private:
    MemberPtr base_;
    int lag_;
};

/// Expands J members into J*L time-lagged variants with lags {0, ..., L-1}.
/// Lag 0 delegates unchanged, so L = 1 is the identity expansion.
inline std::vector<MemberPtr> expand_time_lagged(const std::vector<MemberPtr>& members,
                                                 int lag_count) {
    if (lag_count < 1) throw InvalidLagCount("expand_time_lagged: lag count must be >= 1");
    std::vector<MemberPtr> out;
    out.reserve(members.size() * static_cast<std::size_t>(lag_count));
    for (const auto& m : members)
        for (int l = 0; l < lag_count; ++l)
            out.push_back(std::make_shared<LaggedMember>(m, l));
    return out;
}

} // namespace xcsge
