#include "dimx/feasibility.hpp"
#include "dimx/errors.hpp"

#include <algorithm>
#include <exception>

namespace dimx {

PlaneBounds plane_bounds_of(const Matrix& positions, double margin) {
    if (positions.rows() == 0 || positions.cols() != 2) throw PreconditionError("plane_bounds_of: need n x 2 positions");
    PlaneBounds b{positions.col(0).minCoeff(), positions.col(0).maxCoeff(), positions.col(1).minCoeff(),
                  positions.col(1).maxCoeff()};
    double w = b.width(), h = b.height();
    // Degenerate extents borrow the other axis, or a unit box.
    if (w <= 0.0) w = h > 0.0 ? h : 1.0;
    if (h <= 0.0) h = w;
    b.xmin -= margin * w;
    b.xmax += margin * w;
    b.ymin -= margin * h;
    b.ymax += margin * h;
    if (!b.valid()) {
        b.xmin -= 0.5;
        b.xmax += 0.5;
        b.ymin -= 0.5;
        b.ymax += 0.5;
    }
    return b;
}

Vector2 FeasibilityMap::cell_center(std::size_t i, std::size_t j) const {
    return {bounds.xmin + (static_cast<double>(i) + 0.5) * bounds.width() / static_cast<double>(resolution.nx),
            bounds.ymin + (static_cast<double>(j) + 0.5) * bounds.height() / static_cast<double>(resolution.ny)};
}

std::size_t FeasibilityMap::feasible_count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), char{1}));
}

CellVerdict evaluate_cell(const Model& model, const Vector& x, const Vector2& current_position,
                          const ConstraintSet& constraints, const Vector2& target, double plane_width) {
    if (const auto* pca = std::get_if<PcaModel>(&model)) {
        if (constraints.empty()) return {true, 0.0};
        const QPSolution sol = pca->backward_constrained(target - current_position, constraints, x);
        return {sol.residual <= kPcaFeasibilityTolerance * plane_width, sol.residual};
    }
    const auto& ae = std::get<AeModel>(model);
    const AeFeasibility f = ae_feasibility(ae, target, constraints);
    return {f.feasible, static_cast<double>(f.violations.size())};
}

FeasibilityMap compute_feasibility_map(const Model& model, const Vector& x, const ConstraintSet& constraints,
                                       GridResolution resolution, const PlaneBounds& bounds, Exec exec) {
    if (resolution.nx < 2 || resolution.ny < 2) throw PreconditionError("feasibility map: resolution must be >= 2x2");
    if (!bounds.valid()) throw PreconditionError("feasibility map: plane bounds need positive extent");
    if (constraints.size() != dims(model)) throw PreconditionError("feasibility map: constraint dimension mismatch");
    // Rejects empty boxes up front rather than once per cell.
    constraints.validate();
    if (const auto* pca = std::get_if<PcaModel>(&model)) {
        QPProblem probe = QPProblem::unconstrained(pca->components(), Vector2::Zero());
        const auto delta = constraints.to_delta(x);
        probe.locked = delta.locked;
        probe.locked_values = delta.locked_values;
        probe.lower = delta.lower;
        probe.upper = delta.upper;
        validate(probe);
    }

    FeasibilityMap map;
    map.bounds = bounds;
    map.resolution = resolution;
    const std::size_t cells = resolution.nx * resolution.ny;
    map.mask.assign(cells, 0);
    map.residuals.assign(cells, 0.0);
    const Vector2 current = project(model, x);
    const double width = bounds.width();

    auto fill = [&](std::size_t cell) {
        const std::size_t i = cell / resolution.ny, j = cell % resolution.ny;
        const CellVerdict v = evaluate_cell(model, x, current, constraints, map.cell_center(i, j), width);
        map.mask[cell] = v.feasible ? 1 : 0;
        map.residuals[cell] = v.residual;
    };

    if (exec == Exec::serial) {
        for (std::size_t cell = 0; cell < cells; ++cell) fill(cell);
        return map;
    }

    std::exception_ptr error;
    const auto total = static_cast<long>(cells);
#pragma omp parallel for schedule(dynamic, 8)
    for (long cell = 0; cell < total; ++cell) {
        try {
            fill(static_cast<std::size_t>(cell));
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return map;
}

FeasibilityMap compute_feasibility_map(const Model& model, const Dataset& data, const std::string& point_id,
                                       const ConstraintSet& constraints, GridResolution resolution,
                                       const PlaneBounds& bounds) {
    const auto point = data.index_of(point_id);
    if (!point) throw PreconditionError("feasibility map: unknown point '" + point_id + "'");
    return compute_feasibility_map(model, data.row(*point), constraints, resolution, bounds);
}

}  // namespace dimx
