#include "dimx/service.hpp"
#include "dimx/errors.hpp"

#include <fstream>
#include <sstream>

namespace dimx {

namespace {

struct ApiError {
    int status;
    std::string code;
    std::string message;
    Json details = Json::object();
};

Response error_response(const ApiError& e) {
    return {e.status, {{"code", e.code}, {"message", e.message}, {"details", e.details}}};
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '/'))
        if (!part.empty()) parts.push_back(part);
    return parts;
}

Json parse_body(const std::string& body) {
    if (body.empty()) return Json::object();
    try {
        Json j = Json::parse(body);
        if (!j.is_object()) throw ApiError{400, "bad_request", "request body must be a JSON object"};
        return j;
    } catch (const Json::parse_error& e) {
        throw ApiError{400, "bad_json", e.what()};
    }
}

std::size_t point_index(const Session& s, const Json& id) {
    if (id.is_null()) throw ApiError{400, "bad_request", "point_id is required"};
    const std::string key = id.is_string() ? id.get<std::string>() : id.dump();
    const auto idx = s.data->index_of(key);
    if (!idx) throw ApiError{404, "unknown_point", "no point with id '" + key + "'"};
    return *idx;
}

std::size_t point_index(const Session& s, const std::map<std::string, std::string>& query) {
    auto it = query.find("point_id");
    if (it == query.end()) throw ApiError{400, "bad_request", "point_id is required"};
    return point_index(s, Json(it->second));
}

long query_long(const std::map<std::string, std::string>& query, const std::string& key, long fallback) {
    auto it = query.find(key);
    if (it == query.end() || it->second.empty()) return fallback;
    try {
        std::size_t used = 0;
        const long v = std::stol(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw ApiError{400, "bad_request", "query parameter '" + key + "' must be an integer"};
    }
}

double query_double(const std::map<std::string, std::string>& query, const std::string& key, double fallback) {
    auto it = query.find(key);
    if (it == query.end() || it->second.empty()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw ApiError{400, "bad_request", "query parameter '" + key + "' must be a number"};
    }
}

Vector2 original_position(const Session& s, std::size_t i) {
    return s.positions.row(static_cast<Eigen::Index>(i)).transpose();
}

WorkingCopy fresh_copy(const Session& s, std::size_t i) {
    WorkingCopy w;
    w.current_x = s.data->row(i);
    w.anchor_x = w.current_x;
    w.position = original_position(s, i);
    w.last_feasible_position = w.position;
    w.constraints = ConstraintSet(s.data->cols());
    return w;
}

WorkingCopy& touch(Session& s, std::size_t i) {
    auto it = s.working.find(i);
    if (it == s.working.end()) it = s.working.emplace(i, fresh_copy(s, i)).first;
    return it->second;
}

// Working copy if the point was touched, otherwise a pristine view.
WorkingCopy view(const Session& s, std::size_t i) {
    auto it = s.working.find(i);
    return it == s.working.end() ? fresh_copy(s, i) : it->second;
}

Json named_features(const Dataset& data, const Vector& x) {
    Json out = Json::object();
    for (std::size_t j = 0; j < data.cols(); ++j) out[data.feature_names()[j]] = x[static_cast<Eigen::Index>(j)];
    return out;
}

TrainConfig train_config_from_json(const Json& j) {
    TrainConfig c;
    if (!j.is_object()) return c;
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.seed = j.value("seed", c.seed);
    if (j.contains("hidden")) c.hidden = j["hidden"].get<std::vector<int>>();
    return c;
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {}

std::shared_ptr<const Dataset> Service::dataset(const std::string& id) const {
    std::shared_lock lock(registry_mutex_);
    auto it = datasets_.find(id);
    return it == datasets_.end() ? nullptr : it->second;
}

std::shared_ptr<Session> Service::session(const std::string& model_id) const {
    std::shared_lock lock(registry_mutex_);
    auto it = sessions_.find(model_id);
    return it == sessions_.end() ? nullptr : it->second;
}

Response Service::handle(const Request& r) {
    try {
        const auto parts = split_path(r.path);
        if (parts.empty()) throw ApiError{404, "not_found", "no such endpoint"};

        if (parts[0] == "datasets") {
            if (parts.size() == 1 && r.method == "POST") return create_dataset(r);
            if (parts.size() == 2 && r.method == "GET") return get_dataset(parts[1]);
            if (parts.size() == 3 && parts[2] == "models" && r.method == "POST")
                return create_model(parts[1], parse_body(r.body));
        } else if (parts[0] == "models" && parts.size() >= 2) {
            auto s = session(parts[1]);
            if (!s) throw ApiError{404, "unknown_model", "no model with id '" + parts[1] + "'"};
            const std::string action = parts.size() == 3 ? parts[2] : "";
            if (parts.size() > 3) throw ApiError{404, "not_found", "no such endpoint"};

            std::lock_guard lock(s->mutex);
            if (action.empty() && r.method == "GET") return get_model(*s);
            if (action == "forward" && r.method == "POST") return forward(*s, parse_body(r.body));
            if (action == "backward" && r.method == "POST") return backward(*s, parse_body(r.body));
            if (action == "prolines" && r.method == "GET") return prolines(*s, r);
            if (action == "constraints" && r.method == "PUT") return put_constraints(*s, parse_body(r.body));
            if (action == "constraints" && r.method == "GET") return get_constraints(*s, r);
            if (action == "feasibility" && r.method == "POST") return feasibility(*s, parse_body(r.body));
            if (action == "knn" && r.method == "GET") return knn(*s, r);
            if (action == "reset" && r.method == "POST") return reset(*s, parse_body(r.body));
            if (action == "snapshot" && r.method == "POST") return snapshot(*s);
        }
        throw ApiError{404, "not_found", "no such endpoint: " + r.method + " " + r.path};
    } catch (const ApiError& e) {
        return error_response(e);
    } catch (const ParseError& e) {
        Json details = Json::object();
        if (e.row() >= 0) details["row"] = e.row();
        if (e.column() >= 0) details["column"] = e.column();
        return error_response({400, "parse_error", e.what(), details});
    } catch (const InfeasibleError& e) {
        return error_response({409, "infeasible_constraints", e.what()});
    } catch (const DegenerateFitError& e) {
        return error_response({422, "degenerate_fit", e.what()});
    } catch (const TrainingError& e) {
        return error_response({422, "training_failed", e.what(), {{"epoch", e.epoch()}}});
    } catch (const PreconditionError& e) {
        return error_response({422, "invalid_argument", e.what()});
    } catch (const Json::exception& e) {
        return error_response({400, "bad_request", e.what()});
    } catch (const std::exception& e) {
        return error_response({500, "internal_error", e.what()});
    }
}

Response Service::create_dataset(const Request& r) {
    std::optional<std::string> id_column;
    if (auto it = r.query.find("id_column"); it != r.query.end() && !it->second.empty()) id_column = it->second;
    auto data = std::make_shared<const Dataset>(load_csv(r.body, id_column));

    std::string id;
    {
        std::unique_lock lock(registry_mutex_);
        id = "ds-" + std::to_string(next_dataset_++);
        datasets_.emplace(id, data);
    }
    Json stats = Json::array();
    for (const auto& s : data->stats()) stats.push_back(to_json(s));
    return {201,
            {{"dataset_id", id},
             {"n", data->rows()},
             {"d", data->cols()},
             {"ids", data->ids()},
             {"feature_names", data->feature_names()},
             {"stats", stats}}};
}

Response Service::get_dataset(const std::string& id) {
    auto data = dataset(id);
    if (!data) throw ApiError{404, "unknown_dataset", "no dataset with id '" + id + "'"};
    Json j = to_json(*data);
    j["dataset_id"] = id;
    return {200, j};
}

Response Service::create_model(const std::string& dataset_id, const Json& body) {
    auto data = dataset(dataset_id);
    if (!data) throw ApiError{404, "unknown_dataset", "no dataset with id '" + dataset_id + "'"};
    const std::string method = body.value("method", "");

    std::shared_ptr<const Model> model;
    if (method == "pca") {
        PcaOptions opts;
        opts.standardize = body.value("standardize", true);
        model = std::make_shared<const Model>(fit_pca(*data, opts));
    } else if (method == "autoencoder") {
        TrainConfig config = train_config_from_json(body.value("train_config", Json::object()));
        model = std::make_shared<const Model>(train_autoencoder(*data, config));
    } else {
        throw ApiError{400, "unknown_method", "method must be \"pca\" or \"autoencoder\""};
    }

    auto s = std::make_shared<Session>();
    s->dataset_id = dataset_id;
    s->data = data;
    s->model = model;
    s->positions = project_all(*model, data->values());
    s->bounds = plane_bounds_of(s->positions);
    {
        std::unique_lock lock(registry_mutex_);
        s->model_id = "m-" + std::to_string(next_model_++);
        sessions_.emplace(s->model_id, s);
    }
    return {201,
            {{"model_id", s->model_id},
             {"dataset_id", dataset_id},
             {"kind", to_string(kind(*model))},
             {"ids", data->ids()},
             {"positions", positions_to_json(s->positions)},
             {"plane_bounds", to_json(s->bounds)}}};
}

Response Service::get_model(Session& s) {
    return {200, {{"model_id", s.model_id}, {"dataset_id", s.dataset_id}, {"model", to_json(*s.model)}}};
}

Response Service::forward(Session& s, const Json& body) {
    const std::size_t i = point_index(s, body.value("point_id", Json()));
    const Json features = body.value("features", Json::object());
    if (!features.is_object()) throw ApiError{400, "bad_request", "features must be an object"};

    // Validate everything before touching the working copy.
    std::vector<std::pair<std::size_t, double>> edits;
    for (const auto& [name, value] : features.items()) {
        const auto j = s.data->feature_index(name);
        if (!j) throw ApiError{422, "unknown_feature", "no feature named '" + name + "'"};
        if (!value.is_number() || !std::isfinite(value.get<double>()))
            throw ApiError{422, "invalid_value", "feature '" + name + "' needs a finite number"};
        edits.emplace_back(*j, value.get<double>());
    }

    const Vector2 origin = original_position(s, i);
    Vector x = view(s, i).current_x;
    for (const auto& [j, v] : edits) x[static_cast<Eigen::Index>(j)] = v;
    const Vector original = s.data->row(i);

    // Out-of-sample extension: the fitted model is never refit.
    Vector2 position;
    if (const auto* pca = std::get_if<PcaModel>(s.model.get()))
        position = origin + pca->forward(x - original);
    else
        position = project(*s.model, x);

    if (!edits.empty()) {
        WorkingCopy& w = touch(s, i);
        w.current_x = x;
        w.anchor_x = x;
        w.position = position;
        w.last_feasible_position = position;
    } else if (auto it = s.working.find(i); it != s.working.end()) {
        position = it->second.position;
    }
    return {200,
            {{"point_id", s.data->ids()[i]},
             {"position", to_json(position)},
             {"delta_y", to_json(Vector2(position - origin))},
             {"features", named_features(*s.data, x)}}};
}

Response Service::backward(Session& s, const Json& body) {
    const std::size_t i = point_index(s, body.value("point_id", Json()));
    if (!body.contains("target_position")) throw ApiError{400, "bad_request", "target_position is required"};
    const Vector2 target = vector2_from_json(body["target_position"]);
    if (!target.allFinite()) throw ApiError{422, "invalid_value", "target_position must be finite"};
    const bool constrained = body.value("constrained", false);

    const WorkingCopy w = view(s, i);
    Vector features;
    double residual = 0.0;
    bool feasible = true;
    Json violations = Json::array();

    if (const auto* pca = std::get_if<PcaModel>(s.model.get())) {
        const Vector2 anchor_position = pca->project(w.anchor_x);
        const Vector2 delta_y = target - anchor_position;
        if (constrained) {
            const QPSolution sol = pca->backward_constrained(delta_y, w.constraints, w.anchor_x);
            features = w.anchor_x + sol.delta_x;
            residual = sol.residual;
            feasible = residual <= kPcaFeasibilityTolerance * s.bounds.width();
        } else {
            features = w.anchor_x + pca->backward(delta_y);
            residual = (pca->forward(features - w.anchor_x) - delta_y).norm();
        }
    } else {
        const auto& ae = std::get<AeModel>(*s.model);
        if (constrained) {
            const AeFeasibility f = ae_feasibility(ae, target, w.constraints);
            features = f.x;
            feasible = f.feasible;
            residual = static_cast<double>(f.violations.size());
            for (const auto& v : f.violations)
                violations.push_back({{"feature", s.data->feature_names()[v.feature]},
                                      {"kind", to_string(v.kind)},
                                      {"value", v.value},
                                      {"limit", v.limit}});
        } else {
            features = ae.decode(target);
        }
    }

    const Vector2 snapped = snap_state(w.last_feasible_position, target, feasible);
    if (feasible) {
        WorkingCopy& live = touch(s, i);
        live.current_x = features;
        live.position = target;
        live.last_feasible_position = target;
    }
    return {200,
            {{"point_id", s.data->ids()[i]},
             {"features", named_features(*s.data, features)},
             {"position_feasible", feasible},
             {"residual", residual},
             {"snapped_position", to_json(snapped)},
             {"violations", violations}}};
}

Response Service::prolines(Session& s, const Request& r) {
    const std::size_t i = point_index(s, r.query);
    const long top_k = query_long(r.query, "top_k", static_cast<long>(s.data->cols()));
    if (top_k < 0) throw ApiError{422, "invalid_value", "top_k must be >= 0"};
    ProlineOptions options;
    options.step_factor = query_double(r.query, "c", options.step_factor);
    if (!(options.step_factor > 0.0)) throw ApiError{422, "invalid_value", "c must be > 0"};

    const WorkingCopy w = view(s, i);
    const auto all = compute_prolines(*s.model, *s.data, i, w.current_x, options);
    auto ranked = rank_by_length(all);
    ranked.resize(std::min(ranked.size(), static_cast<std::size_t>(top_k)));

    Json lines = Json::array(), lengths = Json::array();
    for (const auto& entry : ranked) {
        lines.push_back(to_json(all[entry.feature]));
        lengths.push_back({{"feature_index", entry.feature},
                           {"feature", s.data->feature_names()[entry.feature]},
                           {"length", entry.length}});
    }
    Json marks = Json::array();
    for (const auto& m : projection_marks(*s.model, s.data->row(i), w.current_x)) marks.push_back(to_json(m));
    return {200, {{"point_id", s.data->ids()[i]}, {"prolines", lines}, {"lengths", lengths}, {"marks", marks}}};
}

Response Service::put_constraints(Session& s, const Json& body) {
    const std::size_t i = point_index(s, body.value("point_id", Json()));
    ConstraintSet set = constraints_from_json(body.value("constraint_set", Json::array()), s.data->feature_names());
    touch(s, i).constraints = std::move(set);
    return {204, nullptr};
}

Response Service::get_constraints(Session& s, const Request& r) {
    const std::size_t i = point_index(s, r.query);
    return {200,
            {{"point_id", s.data->ids()[i]},
             {"constraint_set", to_json(view(s, i).constraints, s.data->feature_names())}}};
}

Response Service::feasibility(Session& s, const Json& body) {
    const std::size_t i = point_index(s, body.value("point_id", Json()));
    GridResolution res;
    if (body.contains("resolution")) {
        const auto& rj = body["resolution"];
        if (rj.is_number_integer()) {
            res.nx = res.ny = rj.get<std::size_t>();
        } else if (rj.is_array() && rj.size() == 2) {
            res.nx = rj[0].get<std::size_t>();
            res.ny = rj[1].get<std::size_t>();
        } else {
            throw ApiError{400, "bad_request", "resolution must be an integer or [nx, ny]"};
        }
    }
    const PlaneBounds bounds = body.contains("plane_bounds") ? plane_bounds_from_json(body["plane_bounds"]) : s.bounds;
    const WorkingCopy w = view(s, i);
    const FeasibilityMap map = compute_feasibility_map(*s.model, w.anchor_x, w.constraints, res, bounds);
    Json j = to_json(map);
    j["point_id"] = s.data->ids()[i];
    return {200, j};
}

Response Service::knn(Session& s, const Request& r) {
    const std::size_t i = point_index(s, r.query);
    const long k = query_long(r.query, "k", 10);
    if (k < 1 || static_cast<std::size_t>(k) >= s.data->rows())
        throw ApiError{422, "invalid_value", "k must satisfy 1 <= k < n"};
    Matrix current = s.positions;
    for (const auto& [idx, w] : s.working) current.row(static_cast<Eigen::Index>(idx)) = w.position.transpose();
    Json neighbors = Json::array();
    for (const auto& nb : dimx::knn(current, i, static_cast<std::size_t>(k))) neighbors.push_back(to_json(nb, *s.data));
    return {200, {{"point_id", s.data->ids()[i]}, {"k", k}, {"neighbors", neighbors}}};
}

Response Service::reset(Session& s, const Json& body) {
    const std::size_t i = point_index(s, body.value("point_id", Json()));
    s.working.erase(i);
    return {200,
            {{"point_id", s.data->ids()[i]},
             {"features", named_features(*s.data, s.data->row(i))},
             {"position", to_json(original_position(s, i))}}};
}

Response Service::snapshot(Session& s) {
    if (!options_.snapshot_dir) throw ApiError{409, "snapshots_disabled", "server started without a snapshot directory"};
    Json working = Json::array();
    for (const auto& [idx, w] : s.working)
        working.push_back({{"point_id", s.data->ids()[idx]},
                           {"current_x", to_json(w.current_x)},
                           {"anchor_x", to_json(w.anchor_x)},
                           {"position", to_json(w.position)},
                           {"last_feasible_position", to_json(w.last_feasible_position)},
                           {"constraints", to_json(w.constraints, s.data->feature_names())}});
    const Json doc{{"model_id", s.model_id},
                   {"dataset_id", s.dataset_id},
                   {"dataset", to_json(*s.data)},
                   {"model", to_json(*s.model)},
                   {"working", working}};
    std::filesystem::create_directories(*options_.snapshot_dir);
    const auto path = *options_.snapshot_dir / (s.model_id + ".json");
    std::ofstream out(path);
    if (!out) throw ApiError{500, "io_error", "cannot write " + path.string()};
    out << doc.dump(2) << '\n';
    return {200, {{"path", path.string()}}};
}

}  // namespace dimx
