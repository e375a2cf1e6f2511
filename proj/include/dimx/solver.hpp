#pragma once

#include "dimx/dataset.hpp"

#include <limits>

namespace dimx {

// d x 2 projection basis. Rows are features, columns the two plane axes.
using Basis = Eigen::Matrix<double, Eigen::Dynamic, 2>;

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Box and single-coordinate equality constraints on a change vector dx,
/// for the problem  min ||E^T dx - target||^2.
///
/// Infinite entries of lower/upper mean "no bound". Locked coordinates are
/// fixed to locked_values and removed from the optimization.
struct QPProblem {
    Basis basis;
    Vector2 target = Vector2::Zero();
    std::vector<bool> locked;
    Vector locked_values;
    Vector lower;
    Vector upper;

    // Unconstrained problem of matching dimension.
    static QPProblem unconstrained(Basis basis, const Vector2& target);
    std::size_t dims() const { return static_cast<std::size_t>(basis.rows()); }
};

struct QPSolution {
    Vector delta_x;
    double residual = 0.0;  // ||E^T dx - target||
    bool converged = false;
    int iterations = 0;
};

struct QPOptions {
    double tol = 1e-8;
    int max_iter = 10'000;
};

// True when E^T E = I within tol.
bool is_orthonormal(const Basis& basis, double tol = 1e-8);

// Minimum-norm dx with E^T dx = delta_y, i.e. dx = E delta_y for orthonormal E.
Vector least_norm(const Basis& basis, const Vector2& delta_y);

double qp_residual(const Basis& basis, const Vector2& target, const Vector& delta_x);

// Throws InfeasibleError when the box is empty or a lock falls outside it.
void validate(const QPProblem& problem);

// Projected gradient descent on the free coordinates with step 1/L,
// L = 2 * lambda_max(E_free^T E_free). Stops when the projected-gradient
// step norm drops below tol. Every 64 steps the current active set is tried
// directly: bound coordinates stay put, the rest take the exact least-squares
// correction. On non-convergence the best iterate is returned with
// converged = false.
QPSolution solve_qp(const QPProblem& problem, const QPOptions& options = {});

}  // namespace dimx
