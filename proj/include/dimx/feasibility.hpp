#pragma once

#include "dimx/model.hpp"

#include <vector>

namespace dimx {

struct PlaneBounds {
    double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    bool valid() const { return xmax > xmin && ymax > ymin; }
    friend bool operator==(const PlaneBounds&, const PlaneBounds&) = default;
};

// Bounding box of positions (n x 2) widened by `margin` of its extent per side.
PlaneBounds plane_bounds_of(const Matrix& positions, double margin = 0.10);

struct GridResolution {
    std::size_t nx = 32;
    std::size_t ny = 32;
};

/// Feasibility mask over cell centers of a regular grid. Cell (i, j) has
/// center (xmin + (i + 0.5) w / nx, ymin + (j + 0.5) h / ny).
struct FeasibilityMap {
    PlaneBounds bounds;
    GridResolution resolution;
    std::vector<char> mask;        // i * ny + j
    std::vector<double> residuals; // PCA: QP residual; AE: violation count

    bool feasible(std::size_t i, std::size_t j) const { return mask[i * resolution.ny + j] != 0; }
    double residual(std::size_t i, std::size_t j) const { return residuals[i * resolution.ny + j]; }
    Vector2 cell_center(std::size_t i, std::size_t j) const;
    std::size_t feasible_count() const;
};

// Relative tolerance on the QP residual, scaled by plane width.
inline constexpr double kPcaFeasibilityTolerance = 1e-6;

struct CellVerdict {
    bool feasible = true;
    double residual = 0.0;
};

// Constrained backward projection of point x towards `target`.
CellVerdict evaluate_cell(const Model& model, const Vector& x, const Vector2& current_position,
                          const ConstraintSet& constraints, const Vector2& target, double plane_width);

FeasibilityMap compute_feasibility_map(const Model& model, const Vector& x, const ConstraintSet& constraints,
                                       GridResolution resolution, const PlaneBounds& bounds,
                                       Exec exec = Exec::parallel);
FeasibilityMap compute_feasibility_map(const Model& model, const Dataset& data, const std::string& point_id,
                                       const ConstraintSet& constraints, GridResolution resolution,
                                       const PlaneBounds& bounds);

}  // namespace dimx
