#pragma once

#include "dimx/autoencoder.hpp"
#include "dimx/pca.hpp"

#include <variant>

namespace dimx {

using Model = std::variant<PcaModel, AeModel>;

enum class ModelKind { pca, autoencoder };

ModelKind kind(const Model& model);
std::string to_string(ModelKind k);
std::size_t dims(const Model& model);

// Full-vector projection: pca_project or ae_encode.
Vector2 project(const Model& model, const Vector& x);
Matrix project_all(const Model& model, const Matrix& rows);

// Serial loops are the reference; parallel ones use OpenMP and must agree
// with the reference bit for bit.
enum class Exec { serial, parallel };

}  // namespace dimx
