#pragma once

#include "dimx/evaluation.hpp"
#include "dimx/feasibility.hpp"
#include "dimx/model.hpp"
#include "dimx/prolines.hpp"

#include <json.hpp>

namespace dimx {

using Json = nlohmann::json;

Json to_json(const Vector& v);
Vector vector_from_json(const Json& j);
Json to_json(const Vector2& v);
Vector2 vector2_from_json(const Json& j);

// Infinite bounds are written as null.
Json bound_to_json(double v);
double bound_from_json(const Json& j, double unbounded);

Json to_json(const FeatureStats& s);
Json to_json(const Dataset& data);
Dataset dataset_from_json(const Json& j);

// {"kind":"pca", mean, components (column-major), explained_variance,
//  standardize, sigmas}
Json to_json(const PcaModel& m);
PcaModel pca_from_json(const Json& j);

// {"kind":"autoencoder", layer_sizes, activations, weights (row-major per
//  layer), biases, input_scale {min, max}, lock_tolerance, seed}
Json to_json(const AeModel& m);
AeModel ae_from_json(const Json& j);

Json to_json(const Model& m);
Model model_from_json(const Json& j);

// List of {feature, locked, lock_value, lower, upper} for active entries.
Json to_json(const ConstraintSet& c, const std::vector<std::string>& feature_names);
// Accepts feature names or indices; unspecified features stay unconstrained.
// Throws PreconditionError on unknown features or invalid bounds.
ConstraintSet constraints_from_json(const Json& j, const std::vector<std::string>& feature_names);

Json to_json(const Proline& p);
Json to_json(const ProjectionMark& m);
Json to_json(const PlaneBounds& b);
PlaneBounds plane_bounds_from_json(const Json& j);
Json to_json(const FeasibilityMap& m);
Json to_json(const Neighbor& n, const Dataset& data);
Json positions_to_json(const Matrix& positions);

}  // namespace dimx
