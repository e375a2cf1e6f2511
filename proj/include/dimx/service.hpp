#pragma once

#include "dimx/serialize.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

namespace dimx {

struct Request {
    std::string method;  // GET, POST, PUT
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct Response {
    int status = 200;
    Json body;  // null for 204
};

// Interaction state of one touched point. Backward projections are solved
// from anchor_x, which only forward edits move, so repeated drag samples are
// independent of each other.
struct WorkingCopy {
    Vector current_x;
    Vector anchor_x;
    Vector2 position = Vector2::Zero();
    Vector2 last_feasible_position = Vector2::Zero();
    ConstraintSet constraints;
};

/// A fitted model over one dataset plus the per-point working copies.
/// The dataset and model are shared read-only; only `working` changes.
struct Session {
    std::string model_id;
    std::string dataset_id;
    std::shared_ptr<const Dataset> data;
    std::shared_ptr<const Model> model;
    Matrix positions;  // original projections
    PlaneBounds bounds;

    std::mutex mutex;  // serializes requests within the session
    std::unordered_map<std::size_t, WorkingCopy> working;
};

struct ServiceOptions {
    std::optional<std::filesystem::path> snapshot_dir;
};

/// JSON request handler behind the HTTP endpoints. Thread safe: requests on
/// different sessions run concurrently, requests on one session are
/// serialized.
class Service {
public:
    explicit Service(ServiceOptions options = {});

    Response handle(const Request& request);

    // Read-only access for tests and tools.
    std::shared_ptr<const Dataset> dataset(const std::string& id) const;
    std::shared_ptr<Session> session(const std::string& model_id) const;

private:
    Response create_dataset(const Request& r);
    Response get_dataset(const std::string& id);
    Response create_model(const std::string& dataset_id, const Json& body);
    Response get_model(Session& s);
    Response forward(Session& s, const Json& body);
    Response backward(Session& s, const Json& body);
    Response prolines(Session& s, const Request& r);
    Response put_constraints(Session& s, const Json& body);
    Response get_constraints(Session& s, const Request& r);
    Response feasibility(Session& s, const Json& body);
    Response knn(Session& s, const Request& r);
    Response reset(Session& s, const Json& body);
    Response snapshot(Session& s);

    ServiceOptions options_;
    mutable std::shared_mutex registry_mutex_;
    std::unordered_map<std::string, std::shared_ptr<const Dataset>> datasets_;
    std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
    std::size_t next_dataset_ = 1;
    std::size_t next_model_ = 1;
};

// Blocks serving HTTP on host:port until the process is stopped.
void serve_http(Service& service, const std::string& host, int port);

}  // namespace dimx
