#include "dimx/solver.hpp"
#include "dimx/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace dimx {

QPProblem QPProblem::unconstrained(Basis basis, const Vector2& target) {
    const auto d = basis.rows();
    QPProblem p;
    p.basis = std::move(basis);
    p.target = target;
    p.locked.assign(static_cast<std::size_t>(d), false);
    p.locked_values = Vector::Zero(d);
    p.lower = Vector::Constant(d, -kUnbounded);
    p.upper = Vector::Constant(d, kUnbounded);
    return p;
}

bool is_orthonormal(const Basis& basis, double tol) {
    const Eigen::Matrix2d gram = basis.transpose() * basis;
    return (gram - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= tol;
}

Vector least_norm(const Basis& basis, const Vector2& delta_y) {
    if (!is_orthonormal(basis)) throw PreconditionError("least_norm: basis columns are not orthonormal");
    // The pseudoinverse of an orthonormal basis is its transpose.
    return basis * delta_y;
}

double qp_residual(const Basis& basis, const Vector2& target, const Vector& delta_x) {
    return (basis.transpose() * delta_x - target).norm();
}

void validate(const QPProblem& p) {
    const auto d = p.basis.rows();
    if (p.target.hasNaN()) throw PreconditionError("solve_qp: non-finite target");
    if (p.lower.size() != d || p.upper.size() != d || p.locked_values.size() != d ||
        static_cast<Eigen::Index>(p.locked.size()) != d)
        throw PreconditionError("solve_qp: constraint vectors do not match basis dimension");
    for (Eigen::Index i = 0; i < d; ++i) {
        if (std::isnan(p.lower[i]) || std::isnan(p.upper[i]))
            throw PreconditionError("solve_qp: NaN bound");
        if (p.lower[i] > p.upper[i])
            throw InfeasibleError("feature " + std::to_string(i) + ": lower bound exceeds upper bound");
        if (p.locked[static_cast<std::size_t>(i)]) {
            const double v = p.locked_values[i];
            if (!std::isfinite(v)) throw PreconditionError("solve_qp: non-finite lock value");
            if (v < p.lower[i] || v > p.upper[i])
                throw InfeasibleError("feature " + std::to_string(i) + ": locked value lies outside its bounds");
        }
    }
}

QPSolution solve_qp(const QPProblem& p, const QPOptions& options) {
    validate(p);
    const auto d = p.basis.rows();

    std::vector<Eigen::Index> free;
    Vector x = Vector::Zero(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (p.locked[static_cast<std::size_t>(i)])
            x[i] = p.locked_values[i];
        else
            free.push_back(i);
    }
    const auto nf = static_cast<Eigen::Index>(free.size());

    QPSolution sol;
    if (nf == 0) {
        sol.delta_x = x;
        sol.residual = qp_residual(p.basis, p.target, x);
        sol.converged = true;
        return sol;
    }

    Basis ef(nf, 2);
    Vector lo(nf), hi(nf);
    for (Eigen::Index k = 0; k < nf; ++k) {
        ef.row(k) = p.basis.row(free[static_cast<std::size_t>(k)]);
        lo[k] = p.lower[free[static_cast<std::size_t>(k)]];
        hi[k] = p.upper[free[static_cast<std::size_t>(k)]];
    }
    // Target left over once the locked coordinates have contributed.
    const Vector2 rhs = p.target - p.basis.transpose() * x;

    const Eigen::Matrix2d gram = ef.transpose() * ef;
    const double lambda_max = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(gram, Eigen::EigenvaluesOnly)
                                  .eigenvalues()
                                  .maxCoeff();

    auto project = [&](Vector& z) { z = z.cwiseMax(lo).cwiseMin(hi); };
    auto objective = [&](const Vector& z) { return (ef.transpose() * z - rhs).squaredNorm(); };

    if (lambda_max <= 0.0) {
        // Free coordinates do not influence the objective.
        Vector z = Vector::Zero(nf);
        project(z);
        for (Eigen::Index k = 0; k < nf; ++k) x[free[static_cast<std::size_t>(k)]] = z[k];
        sol.delta_x = x;
        sol.residual = qp_residual(p.basis, p.target, x);
        sol.converged = true;
        return sol;
    }

    // Start from the unconstrained minimum-norm solution clipped to the box.
    Vector z;
    const Eigen::FullPivLU<Eigen::Matrix2d> lu(gram);
    if (lu.isInvertible())
        z = ef * lu.solve(rhs);
    else
        z = ef * (gram.completeOrthogonalDecomposition().pseudoInverse() * rhs);
    project(z);

    const double lipschitz = 2.0 * lambda_max;
    const double step = 1.0 / lipschitz;

    auto pg_step_norm = [&](const Vector& v) {
        Vector t = v - step * (2.0 * ef * (ef.transpose() * v - rhs));
        project(t);
        return lipschitz * (t - v).norm();
    };

    // Fixes coordinates sitting on a bound and solves the rest exactly.
    // Succeeds only when the result stays in the box.
    auto polish = [&](const Vector& v, Vector& out) {
        std::vector<Eigen::Index> inner;
        for (Eigen::Index k = 0; k < nf; ++k)
            if (v[k] > lo[k] && v[k] < hi[k]) inner.push_back(k);
        if (inner.empty()) return false;
        const auto ni = static_cast<Eigen::Index>(inner.size());
        Basis er(ni, 2);
        for (Eigen::Index k = 0; k < ni; ++k) er.row(k) = ef.row(inner[static_cast<std::size_t>(k)]);
        const Vector2 r = rhs - ef.transpose() * v;
        const Eigen::Matrix2d g = er.transpose() * er;
        const Vector corr = er * (g.completeOrthogonalDecomposition().pseudoInverse() * r);
        out = v;
        for (Eigen::Index k = 0; k < ni; ++k) {
            const auto idx = inner[static_cast<std::size_t>(k)];
            out[idx] += corr[k];
            if (out[idx] < lo[idx] || out[idx] > hi[idx]) return false;
        }
        return true;
    };

    Vector best = z;
    double best_obj = objective(z);
    Vector next(nf), polished(nf);
    int it = 0;
    for (; it < options.max_iter; ++it) {
        if (it % 64 == 63 && polish(z, polished) && objective(polished) <= best_obj &&
            pg_step_norm(polished) < options.tol) {
            best = polished;
            sol.converged = true;
            ++it;
            break;
        }
        const Vector grad = 2.0 * ef * (ef.transpose() * z - rhs);
        next = z - step * grad;
        project(next);
        const double pg_norm = lipschitz * (next - z).norm();
        z.swap(next);
        const double obj = objective(z);
        if (obj < best_obj) {
            best_obj = obj;
            best = z;
        }
        if (pg_norm < options.tol) {
            sol.converged = true;
            ++it;
            break;
        }
    }

    for (Eigen::Index k = 0; k < nf; ++k) x[free[static_cast<std::size_t>(k)]] = best[k];
    sol.delta_x = x;
    sol.residual = qp_residual(p.basis, p.target, x);
    sol.iterations = it;
    return sol;
}

}  // namespace dimx
