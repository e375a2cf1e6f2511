#include "dimx/model.hpp"

namespace dimx {

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

ModelKind kind(const Model& model) {
    return std::holds_alternative<PcaModel>(model) ? ModelKind::pca : ModelKind::autoencoder;
}

std::string to_string(ModelKind k) { return k == ModelKind::pca ? "pca" : "autoencoder"; }

std::size_t dims(const Model& model) {
    return std::visit([](const auto& m) { return m.dims(); }, model);
}

Vector2 project(const Model& model, const Vector& x) {
    return std::visit(overloaded{[&](const PcaModel& m) { return m.project(x); },
                                 [&](const AeModel& m) { return m.encode(x); }},
                      model);
}

Matrix project_all(const Model& model, const Matrix& rows) {
    return std::visit(overloaded{[&](const PcaModel& m) { return m.project_all(rows); },
                                 [&](const AeModel& m) { return m.encode_all(rows); }},
                      model);
}

}  // namespace dimx
