#include "dimx/pca.hpp"
#include "dimx/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace dimx {

PcaModel::PcaModel(Vector mean, Vector scale, Basis components, Vector2 explained_variance, bool standardize)
    : mean_(std::move(mean)),
      scale_(std::move(scale)),
      components_(std::move(components)),
      explained_variance_(std::move(explained_variance)),
      standardize_(standardize) {
    if (mean_.size() != scale_.size() || mean_.size() != components_.rows())
        throw PreconditionError("PcaModel: inconsistent dimensions");
    if ((scale_.array() <= 0.0).any()) throw PreconditionError("PcaModel: non-positive feature scale");
}

void PcaModel::check_dims(const Vector& v, const char* op) const {
    if (v.size() != mean_.size())
        throw PreconditionError(std::string(op) + ": expected " + std::to_string(mean_.size()) + " features, got " +
                                std::to_string(v.size()));
    if (!v.allFinite()) throw PreconditionError(std::string(op) + ": non-finite input");
}

Basis PcaModel::effective_basis() const {
    return components_.array().colwise() / scale_.array();
}

Vector2 PcaModel::project(const Vector& x) const {
    check_dims(x, "pca_project");
    const Vector z = (x - mean_).cwiseQuotient(scale_);
    return components_.transpose() * z;
}

Matrix PcaModel::project_all(const Matrix& rows) const {
    if (rows.cols() != mean_.size()) throw PreconditionError("pca_project: dimension mismatch");
    Matrix z = (rows.rowwise() - mean_.transpose()).array().rowwise() / scale_.transpose().array();
    return z * components_;
}

Vector2 PcaModel::forward(const Vector& delta_x) const {
    check_dims(delta_x, "pca_forward");
    return components_.transpose() * delta_x.cwiseQuotient(scale_);
}

Vector PcaModel::backward(const Vector2& delta_y) const {
    if (!delta_y.allFinite()) throw PreconditionError("pca_backward: non-finite target");
    return least_norm(components_, delta_y).cwiseProduct(scale_);
}

QPSolution PcaModel::backward_constrained(const Vector2& delta_y, const ConstraintSet& constraints, const Vector& x,
                                          const QPOptions& options) const {
    check_dims(x, "pca_backward_constrained");
    if (!delta_y.allFinite()) throw PreconditionError("pca_backward_constrained: non-finite target");
    if (constraints.size() != dims()) throw PreconditionError("pca_backward_constrained: constraint dimension mismatch");
    const DeltaConstraints delta = constraints.to_delta(x);

    QPProblem problem;
    problem.basis = components_;
    problem.target = delta_y;
    problem.locked = delta.locked;
    problem.locked_values = delta.locked_values.cwiseQuotient(scale_);
    problem.lower = delta.lower.cwiseQuotient(scale_);
    problem.upper = delta.upper.cwiseQuotient(scale_);

    QPSolution sol = solve_qp(problem, options);

    // Back to original units; re-apply the original-unit constraints exactly so
    // the rescaling round-off cannot leak outside the box.
    Vector dx = sol.delta_x.cwiseProduct(scale_);
    for (Eigen::Index i = 0; i < dx.size(); ++i) {
        if (delta.locked[static_cast<std::size_t>(i)])
            dx[i] = delta.locked_values[i];
        else
            dx[i] = std::clamp(dx[i], delta.lower[i], delta.upper[i]);
    }
    sol.delta_x = std::move(dx);
    sol.residual = (forward(sol.delta_x) - delta_y).norm();
    return sol;
}

PcaModel fit_pca(const Dataset& data, const PcaOptions& options) {
    const auto n = static_cast<Eigen::Index>(data.rows());
    const auto d = static_cast<Eigen::Index>(data.cols());
    if (n < 2 || d < 2) throw PreconditionError("fit_pca: need n >= 2 and d >= 2");

    Vector mean(d), scale = Vector::Ones(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto& s = data.stats()[static_cast<std::size_t>(j)];
        mean[j] = s.mean;
        if (options.standardize && s.std > 0.0) scale[j] = s.std;
    }

    Matrix centered = (data.values().rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(centered), Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    if (sv.size() < 2 || sv[0] <= 0.0 || sv[1] <= 1e-10 * sv[0])
        throw DegenerateFitError("fit_pca: centered data has rank < 2");

    Basis components = svd.matrixV().leftCols(2);
    for (Eigen::Index c = 0; c < 2; ++c) {
        Eigen::Index arg;
        components.col(c).cwiseAbs().maxCoeff(&arg);
        if (components(arg, c) < 0.0) components.col(c) *= -1.0;
    }
    const Vector2 explained(sv[0] * sv[0] / static_cast<double>(n), sv[1] * sv[1] / static_cast<double>(n));
    return PcaModel(std::move(mean), std::move(scale), std::move(components), explained, options.standardize);
}

}  // namespace dimx
