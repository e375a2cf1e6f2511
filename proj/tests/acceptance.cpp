// Prints one PASS/FAIL line per acceptance criterion; exit status is the
// number of failures.
#include "dimx/errors.hpp"
#include "dimx/evaluation.hpp"
#include "dimx/feasibility.hpp"
#include "dimx/prolines.hpp"
#include "dimx/service.hpp"
#include "testing.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace dimx;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Check {
public:
    void require(bool ok, const std::string& what) {
        if (!ok && failures_++ < 3) first_ += (first_.empty() ? "" : "; ") + what;
    }
    Outcome done(std::string summary) const {
        if (failures_ == 0) return {true, std::move(summary)};
        return {false, std::to_string(failures_) + " violation(s): " + first_};
    }

private:
    int failures_ = 0;
    std::string first_;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome oos_exactness() {
    const Dataset data = testing::random_dataset(100, 10, 101);
    const PcaModel pca = fit_pca(data);
    std::mt19937_64 rng(102);
    std::uniform_int_distribution<std::size_t> row(0, 99);
    Check check;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Vector x = data.row(row(rng)) + testing::random_vector(10, rng, 0.5);
        const Vector dx = testing::random_vector(10, rng, 2.0);
        const double err = ((pca.project(x + dx) - pca.project(x)) - pca.forward(dx)).cwiseAbs().maxCoeff();
        worst = std::max(worst, err);
        check.require(err <= 1e-10, "pair " + std::to_string(k) + " differs by " + fmt(err));
    }
    return check.done("max deviation " + fmt(worst) + " over 1000 pairs");
}

Outcome least_norm_optimality() {
    std::mt19937_64 rng(201);
    const Basis e = testing::random_orthonormal(10, rng);
    const Eigen::MatrixXd null_projector = Eigen::MatrixXd::Identity(10, 10) - e * e.transpose();
    Check check;
    std::uniform_int_distribution<int> zero_noise(0, 9);
    long comparisons = 0;
    for (int a = 0; a < 1000; ++a) {
        const Vector2 dy = testing::random_vector(2, rng, 3.0);
        const Vector ln = least_norm(e, dy);
        check.require((e.transpose() * ln - dy).norm() <= 1e-9, "least_norm misses its target");
        for (int b = 0; b < 1000; ++b) {
            const bool none = zero_noise(rng) == 0;
            const Vector noise = none ? Vector::Zero(10) : Vector(null_projector * testing::random_vector(10, rng));
            const Vector z = ln + noise;
            check.require((e.transpose() * z - dy).norm() <= 1e-9, "constructed z misses the target");
            if (none)
                check.require(std::abs(z.norm() - ln.norm()) <= 1e-9, "zero noise should give equality");
            else if (noise.norm() > 1e-6)
                check.require(ln.norm() < z.norm(), "noisy z not strictly longer");
            check.require(ln.norm() <= z.norm() + 1e-9, "least-norm beaten");
            ++comparisons;
        }
    }
    return check.done(std::to_string(comparisons) + " comparisons");
}

// Narrow lattice-aligned boxes keep the exhaustive grid tractable at d = 4.
QPProblem lattice_problem(std::mt19937_64& rng, Eigen::Index d) {
    const long max_steps = d == 2 ? 2000 : d == 3 ? 1000 : 100;
    std::uniform_int_distribution<long> width(1, max_steps), offset(-max_steps, max_steps / 2);
    std::uniform_int_distribution<int> lock_coin(0, 4);
    QPProblem p = QPProblem::unconstrained(testing::random_orthonormal(d, rng),
                                           testing::random_vector(2, rng, 0.2 * static_cast<double>(max_steps) * 1e-3));
    for (Eigen::Index i = 0; i < d; ++i) {
        const long lo = offset(rng), w = width(rng);
        p.lower[i] = static_cast<double>(lo) * 1e-3;
        p.upper[i] = static_cast<double>(lo + w) * 1e-3;
        if (lock_coin(rng) == 0) {
            std::uniform_int_distribution<long> at(lo, lo + w);
            p.locked[static_cast<std::size_t>(i)] = true;
            p.locked_values[i] = static_cast<double>(at(rng)) * 1e-3;
        }
    }
    return p;
}

Outcome qp_vs_grid() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(301);
    Check check;
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const Eigen::Index d = 2 + k % 3;
        const QPProblem p = lattice_problem(rng, d);
        const QPSolution s = solve_qp(p);
        const double obj = (p.basis.transpose() * s.delta_x - p.target).squaredNorm();
        const double grid = testing::grid_search(p, 1e-3).objective;
        worst = std::max(worst, std::abs(obj - grid));
        check.require(std::abs(obj - grid) <= 1e-4, "instance " + std::to_string(k) + " off by " + fmt(obj - grid));
        check.require(obj <= grid + 1e-12, "instance " + std::to_string(k) + " worse than the grid");
        for (Eigen::Index i = 0; i < d; ++i) {
            if (p.locked[static_cast<std::size_t>(i)])
                check.require(s.delta_x[i] == p.locked_values[i], "lock moved");
            check.require(s.delta_x[i] >= p.lower[i] - 1e-12 && s.delta_x[i] <= p.upper[i] + 1e-12, "bound violated");
        }
    }
    const double elapsed = seconds_since(t0);
    check.require(elapsed < 60.0, "took " + fmt(elapsed) + " s");
    return check.done("max |objective - grid| " + fmt(worst) + ", " + fmt(elapsed) + " s");
}

Outcome worked_example() {
    const Vector x = (Vector(4) << 174, 68, 30, 8.5).finished();
    ConstraintSet c(4);
    c.set_bounds(0, 0.0, kUnbounded);
    c.set_bounds(1, 0.0, kUnbounded);
    c.lock(2, 30.0);
    c.set_bounds(3, 8.0, 10.0);
    const DeltaConstraints d = c.to_delta(x);
    const Vector lb = (Vector(4) << -174, -68, -kUnbounded, -0.5).finished();
    const Vector ub = (Vector(4) << kUnbounded, kUnbounded, kUnbounded, 1.5).finished();
    Check check;
    check.require(d.lower == lb, "lower bounds differ");
    check.require(d.upper == ub, "upper bounds differ");
    check.require(d.locked == std::vector<bool>{false, false, true, false} && d.locked_values[2] == 0.0,
                  "age lock not carried as a zero change");
    return check.done("lb = [-174, -68, -inf, -0.5], ub = [inf, inf, inf, 1.5]");
}

Outcome gradient_check() {
    const std::vector<Activation> acts{Activation::relu, Activation::sigmoid, Activation::relu, Activation::sigmoid};
    Network net = Network::xavier({6, 4, 2, 4, 6}, acts, 501);
    std::mt19937_64 rng(502);
    std::uniform_real_distribution<double> u(0.0, 1.0), b(-0.1, 0.1);
    for (auto& l : net.layers())
        for (Eigen::Index k = 0; k < l.bias.size(); ++k) l.bias[k] = b(rng);
    Eigen::MatrixXd x(16, 6);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = u(rng);
    std::vector<LayerGradient> grads;
    net.mse_gradients(x, x, grads);

    auto numeric = [&](double& param) {
        const double saved = param;
        param = saved + 1e-4;
        const double up = net.mse(x, x);
        param = saved - 1e-4;
        const double down = net.mse(x, x);
        param = saved;
        return (up - down) / 2e-4;
    };
    auto rel = [](double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-7}); };
    double worst = 0.0;
    std::size_t params = 0;
    for (std::size_t k = 0; k < net.layers().size(); ++k) {
        auto& l = net.layers()[k];
        for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
            for (Eigen::Index c = 0; c < l.weights.cols(); ++c, ++params)
                worst = std::max(worst, rel(grads[k].weights(r, c), numeric(l.weights(r, c))));
        for (Eigen::Index c = 0; c < l.bias.size(); ++c, ++params)
            worst = std::max(worst, rel(grads[k].bias[c], numeric(l.bias[c])));
    }
    Check check;
    check.require(worst < 1e-3, "max relative error " + fmt(worst));
    return check.done("max relative error " + fmt(worst) + " over " + std::to_string(params) + " parameters");
}

Outcome benchmark_shape() {
    const auto t0 = std::chrono::steady_clock::now();
    BenchConfig config;
    config.sample_counts = {100, 1000, 10000};
    config.dimension_counts = {};
    config.fixed_d = 10;
    config.k = 10;
    config.repeats = 20;
    config.seed = 42;
    const auto rows = run_benchmark(config);

    auto find = [&](const std::vector<BenchRow>& rs, std::size_t n, const std::string& op) -> const BenchRow& {
        for (const auto& r : rs)
            if (r.setting_axis == "n" && r.setting_value == n && r.model == "pca" && r.op == op) return r;
        throw std::runtime_error("missing benchmark row");
    };
    Check check;
    std::string summary;
    double previous = 2.0;
    for (std::size_t n : config.sample_counts) {
        const double fwd = find(rows, n, "forward").median_us, refit = find(rows, n, "recompute").median_us;
        check.require(fwd < refit, "n=" + std::to_string(n) + ": forward not faster than refit");
        if (n == 10000) check.require(refit / fwd >= 100.0, "speedup at n=10000 only " + fmt(refit / fwd));
        const double acc = find(rows, n, "forward").accuracy_mean;
        check.require(acc <= previous + 0.05, "accuracy rises at n=" + std::to_string(n));
        previous = acc;
        summary += "n=" + std::to_string(n) + " speedup " + fmt(refit / fwd) + "x acc " + fmt(acc) + "; ";
    }

    config.forward_fraction = 0.0;
    config.backward_fraction = 0.0;
    for (const auto& r : run_benchmark(config))
        if (r.op != "recompute")
            check.require(r.accuracy_mean == 1.0, "zero perturbation scored " + fmt(r.accuracy_mean));
    const double elapsed = seconds_since(t0);
    check.require(elapsed < 300.0, "took " + fmt(elapsed) + " s");
    return check.done(summary + "zero perturbation exact; " + fmt(elapsed) + " s");
}

Outcome proline_geometry() {
    Check check;
    double worst_line = 0.0, worst_len = 0.0;
    std::size_t count = 0;
    for (const Dataset& data : {testing::oecd(), testing::random_dataset(60, 12, 701)}) {
        const PcaModel pca = fit_pca(data);
        const Model model = pca;
        for (std::size_t point = 0; point < data.rows(); point += 5) {
            const Vector x = data.row(point);
            for (const Proline& p : compute_prolines(model, data, point, x)) {
                ++count;
                const auto f = static_cast<Eigen::Index>(p.feature_index);
                const auto& st = data.stats()[p.feature_index];
                const Vector2 a = p.samples.front().position, b = p.samples.back().position;
                const double len = (b - a).norm();
                for (const auto& s : p.samples) {
                    const Vector2 v = s.position - a;
                    const double dev = len > 0 ? std::abs((b - a)[0] * v[1] - (b - a)[1] * v[0]) / len : v.norm();
                    worst_line = std::max(worst_line, dev);
                }
                Vector probe = x;
                probe[f] = st.min;
                check.require(p.samples.front().feature_value == st.min && a == pca.project(probe), "min endpoint");
                probe[f] = st.max;
                check.require(p.samples.back().feature_value == st.max && b == pca.project(probe), "max endpoint");
                const double closed = (st.max - st.min) / st.std * pca.components().row(f).norm();
                worst_len = std::max(worst_len, std::abs(p.arc_length() - closed));
            }
        }
    }
    check.require(worst_line <= 1e-9, "collinearity deviation " + fmt(worst_line));
    check.require(worst_len <= 1e-8, "arc length deviation " + fmt(worst_len));
    return check.done(std::to_string(count) + " prolines, max line deviation " + fmt(worst_line) +
                      ", max length deviation " + fmt(worst_len));
}

Outcome feasibility_monotonicity() {
    const Dataset data = testing::random_dataset(80, 8, 801);
    const PcaModel pca = fit_pca(data);
    const Model model = pca;
    const PlaneBounds bounds = plane_bounds_of(pca.project_all(data.values()));
    std::mt19937_64 rng(802);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> row(0, data.rows() - 1), feature(0, data.cols() - 1);
    Check check;
    std::size_t cells = 0, loose_total = 0, tight_total = 0;
    for (int k = 0; k < 50; ++k) {
        const Vector x = data.row(row(rng));
        ConstraintSet a(data.cols());
        for (std::size_t i = 0; i < data.cols(); ++i) {
            const double xi = x[static_cast<Eigen::Index>(i)], s = data.stats()[i].std, r = u(rng);
            if (r < 0.3) a.lock(i, xi);
            else if (r < 0.9) a.set_bounds(i, xi - 1.5 * s * u(rng), xi + 1.5 * s * u(rng));
        }
        const std::size_t i = feature(rng);
        const double xi = x[static_cast<Eigen::Index>(i)], s = data.stats()[i].std;
        FeatureConstraint extra;
        if (u(rng) < 0.3) {
            extra.locked = true;
            extra.lock_value = xi;
        } else {
            extra.lower = xi - 0.5 * s * u(rng);
            extra.upper = xi + 0.5 * s * u(rng);
        }
        const ConstraintSet b = a.tightened(i, extra);
        const auto ma = compute_feasibility_map(model, x, a, {32, 32}, bounds);
        const auto mb = compute_feasibility_map(model, x, b, {32, 32}, bounds);
        for (std::size_t c = 0; c < ma.mask.size(); ++c, ++cells)
            check.require(!mb.mask[c] || ma.mask[c], "pair " + std::to_string(k) + " cell " + std::to_string(c));
        loose_total += ma.feasible_count();
        tight_total += mb.feasible_count();

        const auto empty = compute_feasibility_map(model, x, ConstraintSet(data.cols()), {32, 32}, bounds);
        check.require(empty.feasible_count() == 32 * 32, "empty constraints not all feasible");
    }
    return check.done("50 pairs, " + std::to_string(cells) + " cells, feasible " + std::to_string(loose_total) +
                      " -> " + std::to_string(tight_total));
}

Outcome neighborhood_cases() {
    Check check;
    const auto same = neighborhood_correlation({4, 2, 9, 1}, {4, 2, 9, 1}, 4);
    const auto disjoint = neighborhood_correlation({1, 2, 3}, {4, 5, 6}, 3);
    const auto swapped = neighborhood_correlation({10, 11, 12}, {11, 10, 12}, 3);
    check.require(same.score == 1.0, "identical lists scored " + fmt(same.score));
    check.require(disjoint.score == 0.0, "disjoint lists scored " + fmt(disjoint.score));
    check.require(swapped.score == 0.75, "swapped pair scored " + fmt(swapped.score));
    return check.done("1.0 / 0.0 / 0.75");
}

Outcome service_statefulness() {
    Service service;
    auto call = [&](const std::string& method, const std::string& path, const Json& body,
                    std::map<std::string, std::string> query = {}) {
        return service.handle({method, path, std::move(query), body.is_null() ? std::string() : body.dump()});
    };
    Check check;
    const auto loaded = service.handle({"POST", "/datasets", {{"id_column", "country"}},
                                        testing::read_file(testing::data_dir() / "oecd_like.csv")});
    if (loaded.status != 201) return {false, "dataset upload returned " + std::to_string(loaded.status)};
    const std::string ds = loaded.body.at("dataset_id");
    const auto fitted = call("POST", "/datasets/" + ds + "/models", {{"method", "pca"}});
    if (fitted.status != 201) return {false, "fit returned " + std::to_string(fitted.status)};
    const std::string m = "/models/" + std::string(fitted.body.at("model_id"));

    const std::string dataset_bytes = call("GET", "/datasets/" + ds, nullptr).body.dump();
    const std::string model_bytes = call("GET", m, nullptr).body.dump();
    const auto first = call("POST", m + "/forward", {{"point_id", "Portugal"}, {"features", Json::object()}});
    const Vector2 original = vector2_from_json(first.body.at("position"));

    const auto fwd = call("POST", m + "/forward", {{"point_id", "Portugal"}, {"features", {{"StudentSkills", 530.0}}}});
    check.require(fwd.status == 200, "forward failed");
    const auto bwd = call("POST", m + "/backward",
                          {{"point_id", "Portugal"}, {"target_position", to_json(Vector2(original + Vector2(1.0, -0.5)))},
                           {"constrained", false}});
    check.require(bwd.status == 200 && bwd.body.at("position_feasible") == true, "backward failed");
    const auto reset = call("POST", m + "/reset", {{"point_id", "Portugal"}});
    check.require(reset.status == 200, "reset failed");
    const auto after = call("POST", m + "/forward", {{"point_id", "Portugal"}, {"features", Json::object()}});
    const double drift = (vector2_from_json(after.body.at("position")) - original).norm();
    check.require(drift <= 1e-9, "position drifted by " + fmt(drift));
    check.require(vector2_from_json(reset.body.at("position")) == original, "reset position differs");
    check.require(call("GET", "/datasets/" + ds, nullptr).body.dump() == dataset_bytes, "dataset bytes changed");
    check.require(call("GET", m, nullptr).body.dump() == model_bytes, "model bytes changed");
    return check.done("dataset and model unchanged, position drift " + fmt(drift) + "; no UI build involved");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"OOS exactness (PCA)", oos_exactness},
        {"Least-norm optimality", least_norm_optimality},
        {"QP vs grid oracle", qp_vs_grid},
        {"Worked constraint translation", worked_example},
        {"AE gradient check", gradient_check},
        {"Benchmark shape", benchmark_shape},
        {"Proline geometry", proline_geometry},
        {"Feasibility monotonicity", feasibility_monotonicity},
        {"Neighborhood index unit cases", neighborhood_cases},
        {"Service statefulness", service_statefulness},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    return failures;
}
