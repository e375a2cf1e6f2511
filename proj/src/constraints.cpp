#include "dimx/constraints.hpp"
#include "dimx/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dimx {

void validate(const FeatureConstraint& c, std::size_t feature) {
    const std::string where = "feature " + std::to_string(feature) + ": ";
    if (std::isnan(c.lower) || std::isnan(c.upper)) throw PreconditionError(where + "NaN bound");
    if (c.lower == kUnbounded || c.upper == -kUnbounded) throw PreconditionError(where + "bound on the wrong side");
    if (c.lower > c.upper) throw PreconditionError(where + "lower bound exceeds upper bound");
    if (c.locked) {
        if (!std::isfinite(c.lock_value)) throw PreconditionError(where + "non-finite lock value");
        if (c.lock_value < c.lower || c.lock_value > c.upper)
            throw PreconditionError(where + "lock value outside bounds");
    }
}

bool ConstraintSet::empty() const {
    return std::none_of(entries_.begin(), entries_.end(), [](const auto& c) { return c.active(); });
}

void ConstraintSet::set(std::size_t i, const FeatureConstraint& c) {
    dimx::validate(c, i);
    entries_.at(i) = c;
}

void ConstraintSet::lock(std::size_t i, double value) {
    auto c = entries_.at(i);
    c.locked = true;
    c.lock_value = value;
    set(i, c);
}

void ConstraintSet::unlock(std::size_t i) { entries_.at(i).locked = false; }

void ConstraintSet::set_bounds(std::size_t i, double lower, double upper) {
    auto c = entries_.at(i);
    c.lower = lower;
    c.upper = upper;
    set(i, c);
}

ConstraintSet ConstraintSet::tightened(std::size_t i, const FeatureConstraint& extra) const {
    ConstraintSet out = *this;
    auto& c = out.entries_.at(i);
    c.lower = std::max(c.lower, extra.lower);
    c.upper = std::min(c.upper, extra.upper);
    if (extra.locked) {
        if (c.locked && c.lock_value != extra.lock_value)
            throw PreconditionError("feature " + std::to_string(i) + ": conflicting locks");
        c.locked = true;
        c.lock_value = extra.lock_value;
    }
    dimx::validate(c, i);
    return out;
}

void ConstraintSet::validate() const {
    for (std::size_t i = 0; i < entries_.size(); ++i) dimx::validate(entries_[i], i);
}

DeltaConstraints ConstraintSet::to_delta(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != entries_.size())
        throw PreconditionError("constraint set dimension does not match point");
    const auto d = x.size();
    DeltaConstraints out;
    out.locked.resize(entries_.size());
    out.locked_values = Vector::Zero(d);
    out.lower.resize(d);
    out.upper.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto& c = entries_[static_cast<std::size_t>(i)];
        out.locked[static_cast<std::size_t>(i)] = c.locked;
        if (c.locked) out.locked_values[i] = c.lock_value - x[i];
        // Infinite bounds stay infinite.
        out.lower[i] = c.lower - x[i];
        out.upper[i] = c.upper - x[i];
    }
    return out;
}

}  // namespace dimx
