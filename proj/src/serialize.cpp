#include "dimx/serialize.hpp"
#include "dimx/errors.hpp"

#include <cmath>

namespace dimx {

Json to_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from_json(const Json& j) {
    if (!j.is_array()) throw ParseError("expected a numeric array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ParseError("expected a numeric array");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Json to_json(const Vector2& v) { return Json::array({v[0], v[1]}); }

Vector2 vector2_from_json(const Json& j) {
    const Vector v = vector_from_json(j);
    if (v.size() != 2) throw ParseError("expected a 2-element array");
    return {v[0], v[1]};
}

Json bound_to_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double bound_from_json(const Json& j, double unbounded) {
    if (j.is_null()) return unbounded;
    if (!j.is_number()) throw ParseError("bound must be a number or null");
    return j.get<double>();
}

Json to_json(const FeatureStats& s) { return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}}; }

Json to_json(const Dataset& data) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < data.rows(); ++i) rows.push_back(to_json(data.row(i)));
    Json stats = Json::array();
    for (const auto& s : data.stats()) stats.push_back(to_json(s));
    return {{"ids", data.ids()}, {"feature_names", data.feature_names()}, {"values", rows}, {"stats", stats}};
}

Dataset dataset_from_json(const Json& j) {
    const auto ids = j.at("ids").get<std::vector<std::string>>();
    const auto names = j.at("feature_names").get<std::vector<std::string>>();
    const auto& rows = j.at("values");
    Matrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Vector r = vector_from_json(rows[i]);
        if (r.size() != values.cols()) throw ParseError("ragged row in dataset JSON", static_cast<long>(i));
        values.row(static_cast<Eigen::Index>(i)) = r.transpose();
    }
    return Dataset(ids, names, std::move(values));
}

Json to_json(const PcaModel& m) {
    const Basis& e = m.components();
    std::vector<double> colmajor(e.data(), e.data() + e.size());
    return {{"kind", "pca"},
            {"mean", to_json(m.mean())},
            {"components", colmajor},
            {"explained_variance", to_json(m.explained_variance())},
            {"standardize", m.standardized()},
            {"sigmas", to_json(m.scale())}};
}

PcaModel pca_from_json(const Json& j) {
    Vector mean = vector_from_json(j.at("mean"));
    const Vector flat = vector_from_json(j.at("components"));
    if (flat.size() != 2 * mean.size()) throw ParseError("pca: components must hold 2*d values");
    Basis e = Eigen::Map<const Basis>(flat.data(), mean.size(), 2);
    return PcaModel(std::move(mean), vector_from_json(j.at("sigmas")), std::move(e),
                    vector2_from_json(j.at("explained_variance")), j.at("standardize").get<bool>());
}

Json to_json(const AeModel& m) {
    Json activations = Json::array(), weights = Json::array(), biases = Json::array();
    for (const auto& l : m.network().layers()) {
        activations.push_back(to_string(l.activation));
        std::vector<double> w;
        w.reserve(static_cast<std::size_t>(l.weights.size()));
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
        weights.push_back(std::move(w));
        biases.push_back(std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size()));
    }
    return {{"kind", "autoencoder"},
            {"layer_sizes", m.network().sizes()},
            {"activations", activations},
            {"weights", weights},
            {"biases", biases},
            {"input_scale", {{"min", to_json(m.input_min())}, {"max", to_json(m.input_max())}}},
            {"lock_tolerance", to_json(m.lock_tolerance())},
            {"seed", m.seed()}};
}

AeModel ae_from_json(const Json& j) {
    const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
    const auto& acts = j.at("activations");
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (sizes.size() < 2 || acts.size() != sizes.size() - 1 || weights.size() != acts.size() ||
        biases.size() != acts.size())
        throw ParseError("autoencoder: layer arrays disagree in length");
    std::vector<DenseLayer> layers;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        DenseLayer l;
        l.activation = activation_from_string(acts[k].get<std::string>());
        const Vector w = vector_from_json(weights[k]);
        if (w.size() != static_cast<Eigen::Index>(sizes[k]) * sizes[k + 1])
            throw ParseError("autoencoder: weight count mismatch in layer " + std::to_string(k));
        l.weights = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            w.data(), sizes[k], sizes[k + 1]);
        l.bias = vector_from_json(biases[k]).transpose();
        layers.push_back(std::move(l));
    }
    return AeModel(Network(std::move(layers)), vector_from_json(j.at("input_scale").at("min")),
                   vector_from_json(j.at("input_scale").at("max")), vector_from_json(j.at("lock_tolerance")),
                   j.at("seed").get<std::uint64_t>());
}

Json to_json(const Model& m) {
    return std::visit([](const auto& model) { return to_json(model); }, m);
}

Model model_from_json(const Json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "pca") return pca_from_json(j);
    if (kind == "autoencoder") return ae_from_json(j);
    throw ParseError("unknown model kind '" + kind + "'");
}

Json to_json(const ConstraintSet& c, const std::vector<std::string>& feature_names) {
    Json out = Json::array();
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& e = c[i];
        if (!e.active()) continue;
        Json entry{{"feature", feature_names.at(i)},
                   {"locked", e.locked},
                   {"lower", bound_to_json(e.lower)},
                   {"upper", bound_to_json(e.upper)}};
        if (e.locked) entry["lock_value"] = e.lock_value;
        out.push_back(std::move(entry));
    }
    return out;
}

ConstraintSet constraints_from_json(const Json& j, const std::vector<std::string>& feature_names) {
    if (!j.is_array()) throw ParseError("constraint set must be an array");
    ConstraintSet set(feature_names.size());
    for (const auto& entry : j) {
        if (!entry.is_object()) throw ParseError("constraint entry must be an object");
        const auto& f = entry.at("feature");
        std::size_t index;
        if (f.is_number_integer()) {
            const auto raw = f.get<long long>();
            if (raw < 0 || static_cast<std::size_t>(raw) >= feature_names.size())
                throw PreconditionError("unknown feature index " + std::to_string(raw));
            index = static_cast<std::size_t>(raw);
        } else {
            const auto name = f.get<std::string>();
            auto it = std::find(feature_names.begin(), feature_names.end(), name);
            if (it == feature_names.end()) throw PreconditionError("unknown feature '" + name + "'");
            index = static_cast<std::size_t>(it - feature_names.begin());
        }
        FeatureConstraint c;
        c.locked = entry.value("locked", false);
        if (c.locked) c.lock_value = entry.at("lock_value").get<double>();
        if (entry.contains("lower")) c.lower = bound_from_json(entry["lower"], -kUnbounded);
        if (entry.contains("upper")) c.upper = bound_from_json(entry["upper"], kUnbounded);
        set.set(index, c);
    }
    return set;
}

namespace {
Json optional_index(const std::optional<std::size_t>& i) { return i ? Json(*i) : Json(nullptr); }
Json optional_range(const std::optional<IndexRange>& r) {
    return r ? Json::array({r->first, r->last}) : Json(nullptr);
}
}  // namespace

Json to_json(const Proline& p) {
    Json samples = Json::array();
    for (const auto& s : p.samples) samples.push_back({{"value", s.feature_value}, {"position", to_json(s.position)}});
    return {{"point_id", p.point_id},
            {"feature_index", p.feature_index},
            {"samples", samples},
            {"mean_index", p.mean_index},
            {"sigma_lo_index", optional_index(p.sigma_lo_index)},
            {"sigma_hi_index", optional_index(p.sigma_hi_index)},
            {"current_index", p.current_index},
            {"green_range", optional_range(p.green_range)},
            {"red_range", optional_range(p.red_range)},
            {"length", p.arc_length()}};
}

Json to_json(const ProjectionMark& m) {
    return {{"feature_index", m.feature}, {"position", to_json(m.position)}, {"direction", to_string(m.direction)}};
}

Json to_json(const PlaneBounds& b) {
    return {{"xmin", b.xmin}, {"xmax", b.xmax}, {"ymin", b.ymin}, {"ymax", b.ymax}};
}

PlaneBounds plane_bounds_from_json(const Json& j) {
    PlaneBounds b{j.at("xmin").get<double>(), j.at("xmax").get<double>(), j.at("ymin").get<double>(),
                  j.at("ymax").get<double>()};
    if (!b.valid()) throw PreconditionError("plane bounds need positive extent");
    return b;
}

Json to_json(const FeasibilityMap& m) {
    Json mask = Json::array(), residuals = Json::array();
    for (std::size_t i = 0; i < m.resolution.nx; ++i) {
        Json mrow = Json::array(), rrow = Json::array();
        for (std::size_t j = 0; j < m.resolution.ny; ++j) {
            mrow.push_back(m.feasible(i, j));
            rrow.push_back(m.residual(i, j));
        }
        mask.push_back(std::move(mrow));
        residuals.push_back(std::move(rrow));
    }
    return {{"plane_bounds", to_json(m.bounds)},
            {"resolution", Json::array({m.resolution.nx, m.resolution.ny})},
            {"mask", mask},
            {"residuals", residuals}};
}

Json to_json(const Neighbor& n, const Dataset& data) {
    return {{"id", data.ids().at(n.index)}, {"index", n.index}, {"distance", n.distance}};
}

Json positions_to_json(const Matrix& positions) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < positions.rows(); ++i) out.push_back(Json::array({positions(i, 0), positions(i, 1)}));
    return out;
}

}  // namespace dimx
