#pragma once

#include "dimx/solver.hpp"

namespace dimx {

// Absolute-valued constraint on one feature, in original feature units.
struct FeatureConstraint {
    bool locked = false;
    double lock_value = 0.0;
    double lower = -kUnbounded;
    double upper = kUnbounded;

    bool active() const { return locked || lower > -kUnbounded || upper < kUnbounded; }
    friend bool operator==(const FeatureConstraint&, const FeatureConstraint&) = default;
};

// Change-vector form of a ConstraintSet around a point x.
struct DeltaConstraints {
    std::vector<bool> locked;
    Vector locked_values;  // lock_value - x
    Vector lower;          // lower - x
    Vector upper;          // upper - x
};

class ConstraintSet {
public:
    ConstraintSet() = default;
    explicit ConstraintSet(std::size_t dims) : entries_(dims) {}

    std::size_t size() const { return entries_.size(); }
    bool empty() const;  // no active entries
    const FeatureConstraint& operator[](std::size_t i) const { return entries_.at(i); }
    const std::vector<FeatureConstraint>& entries() const { return entries_; }

    // Each setter validates the resulting entry and throws PreconditionError
    // when lower > upper or a lock falls outside its bounds.
    void set(std::size_t i, const FeatureConstraint& c);
    void lock(std::size_t i, double value);
    void unlock(std::size_t i);
    void set_bounds(std::size_t i, double lower, double upper);

    // Intersects bounds / adds a lock, keeping everything already present.
    // Used to build strictly tighter sets.
    ConstraintSet tightened(std::size_t i, const FeatureConstraint& extra) const;

    void validate() const;
    DeltaConstraints to_delta(const Vector& x) const;

    friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;

private:
    std::vector<FeatureConstraint> entries_;
};

// Throws PreconditionError describing the first invalid field.
void validate(const FeatureConstraint& c, std::size_t feature);

}  // namespace dimx
