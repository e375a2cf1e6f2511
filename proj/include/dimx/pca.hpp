#pragma once

#include "dimx/constraints.hpp"
#include "dimx/dataset.hpp"
#include "dimx/solver.hpp"

namespace dimx {

struct PcaOptions {
    // z-score features before the decomposition. Changes are still expressed
    // in original units; conversion happens inside the model.
    bool standardize = true;
};

/// Two-component PCA with exact out-of-sample extension.
///
/// Positions are y = ((x - mean) / scale) E where E holds the top two
/// principal directions of the (optionally standardized) centered data as
/// orthonormal columns. scale is the per-feature population std when
/// standardizing (1 for constant columns) and all ones otherwise.
class PcaModel {
public:
    PcaModel(Vector mean, Vector scale, Basis components, Vector2 explained_variance, bool standardize);

    std::size_t dims() const { return static_cast<std::size_t>(mean_.size()); }
    const Vector& mean() const { return mean_; }
    const Vector& scale() const { return scale_; }
    const Basis& components() const { return components_; }
    const Vector2& explained_variance() const { return explained_variance_; }
    bool standardized() const { return standardize_; }

    // Linear map from an original-unit change vector to a plane change:
    // rows of E divided by the feature scale.
    Basis effective_basis() const;

    Vector2 project(const Vector& x) const;
    Matrix project_all(const Matrix& rows) const;  // n x 2

    Vector2 forward(const Vector& delta_x) const;

    // Least-norm change (in standardized units) reaching delta_y.
    Vector backward(const Vector2& delta_y) const;

    // Constrained change for point x: absolute constraints are shifted into
    // change form, rescaled, and handed to solve_qp.
    QPSolution backward_constrained(const Vector2& delta_y, const ConstraintSet& constraints, const Vector& x,
                                    const QPOptions& options = {}) const;

private:
    void check_dims(const Vector& v, const char* op) const;

    Vector mean_;
    Vector scale_;
    Basis components_;
    Vector2 explained_variance_;
    bool standardize_;
};

// Thin SVD of the centered (and optionally standardized) data matrix.
// Each component's largest-magnitude entry is made positive.
PcaModel fit_pca(const Dataset& data, const PcaOptions& options = {});

}  // namespace dimx
