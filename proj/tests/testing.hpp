#pragma once

#include "dimx/dataset.hpp"
#include "dimx/solver.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace dimx::testing {

inline std::filesystem::path data_dir() { return std::filesystem::path(DIMX_TEST_DATA_DIR); }

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Dataset oecd() { return load_csv(read_file(data_dir() / "oecd_like.csv"), std::string("country")); }

inline Basis random_orthonormal(Eigen::Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd a(d, 2);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < 2; ++j) a(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ() * Eigen::MatrixXd::Identity(d, 2);
}

inline Vector random_vector(Eigen::Index d, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = normal(rng);
    return v;
}

inline Dataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) = normal(rng) * static_cast<double>(j + 1) + static_cast<double>(j);
    std::vector<std::string> ids(n), names(d);
    for (std::size_t i = 0; i < n; ++i) ids[i] = "p" + std::to_string(i);
    for (std::size_t j = 0; j < d; ++j) names[j] = "f" + std::to_string(j);
    return Dataset(ids, names, v);
}

// Minimum-norm least-squares solution of E^T dx = dy through a general SVD,
// independent of the orthonormal shortcut.
inline Vector pinv_solution(const Basis& e, const Vector2& dy) {
    Eigen::MatrixXd et = e.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(et, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.solve(Eigen::VectorXd(dy));
}

/// Exact minimum of ||E^T z - t||^2 over the grid {lo + k h} ∩ [lo, hi] per
/// free coordinate (locked coordinates fixed). The last free coordinate is
/// minimized over its grid in closed form: the objective is a convex 1-D
/// quadratic there, so the best grid point neighbors the continuous argmin.
struct GridResult {
    double objective;
    Vector z;
};

inline GridResult grid_search(const QPProblem& p, double h) {
    const auto d = p.basis.rows();
    std::vector<Eigen::Index> free;
    Vector z = Vector::Zero(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (p.locked[static_cast<std::size_t>(i)])
            z[i] = p.locked_values[i];
        else
            free.push_back(i);
    }
    GridResult best{std::numeric_limits<double>::infinity(), z};
    auto objective = [&](const Vector& v) { return (p.basis.transpose() * v - p.target).squaredNorm(); };
    if (free.empty()) {
        best.objective = objective(z);
        return best;
    }
    auto count = [&](Eigen::Index i) {
        return static_cast<long>(std::floor((p.upper[i] - p.lower[i]) / h + 1e-9));
    };
    const Eigen::Index last = free.back();
    const Vector2 col = p.basis.row(last).transpose();
    const double col_sq = col.squaredNorm();

    std::vector<long> idx(free.size() - 1, 0);
    while (true) {
        for (std::size_t k = 0; k + 1 < free.size(); ++k) z[free[k]] = p.lower[free[k]] + static_cast<double>(idx[k]) * h;
        z[last] = 0.0;
        const Vector2 partial = p.basis.transpose() * z - p.target;
        const long m = count(last);
        std::vector<long> candidates{0, m};
        if (col_sq > 0.0) {
            const double t = -partial.dot(col) / col_sq;
            const double kf = (t - p.lower[last]) / h;
            const long k0 = static_cast<long>(std::floor(kf));
            for (long k : {k0 - 1, k0, k0 + 1, k0 + 2})
                if (k >= 0 && k <= m) candidates.push_back(k);
        }
        for (long k : candidates) {
            const double v = p.lower[last] + static_cast<double>(k) * h;
            const double obj = (partial + v * col).squaredNorm();
            if (obj < best.objective) {
                best.objective = obj;
                best.z = z;
                best.z[last] = v;
            }
        }
        std::size_t k = 0;
        for (; k < idx.size(); ++k) {
            if (++idx[k] <= count(free[k])) break;
            idx[k] = 0;
        }
        if (k == idx.size()) break;
    }
    return best;
}

}  // namespace dimx::testing
