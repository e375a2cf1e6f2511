#include "dimx/evaluation.hpp"
#include "dimx/errors.hpp"
#include "dimx/feasibility.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

namespace dimx {

Dataset gen_gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
    if (n < 2 || d < 2) throw PreconditionError("gen_gaussian: need n >= 2 and d >= 2");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    Vector sd(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j)
        sd[static_cast<Eigen::Index>(j)] = std::sqrt(static_cast<double>(j + 1) / static_cast<double>(d));
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index j = 0; j < values.cols(); ++j) values(i, j) = sd[j] * normal(rng);

    std::vector<std::string> ids(n), names(d);
    for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
    for (std::size_t j = 0; j < d; ++j) names[j] = "f" + std::to_string(j);
    return Dataset(std::move(ids), std::move(names), std::move(values));
}

std::vector<Neighbor> knn(const Matrix& positions, std::size_t query, std::size_t k) {
    const auto n = static_cast<std::size_t>(positions.rows());
    if (positions.cols() != 2) throw PreconditionError("knn: positions must be n x 2");
    if (query >= n) throw PreconditionError("knn: query index out of range");
    if (k >= n) throw PreconditionError("knn: k must be smaller than the number of points");

    const auto q = static_cast<Eigen::Index>(query);
    std::vector<Neighbor> all;
    all.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == query) continue;
        all.push_back({i, (positions.row(static_cast<Eigen::Index>(i)) - positions.row(q)).norm()});
    }
    auto closer = [](const Neighbor& a, const Neighbor& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
    };
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), closer);
    all.resize(k);
    return all;
}

NeighborhoodScore neighborhood_correlation(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                                           std::size_t k) {
    if (k == 0 || a.size() != k || b.size() != k)
        throw PreconditionError("neighborhood_correlation: both lists must have length k > 0");

    std::unordered_map<std::size_t, std::size_t> pos_b;
    for (std::size_t r = 0; r < b.size(); ++r) pos_b.emplace(b[r], r);

    // Shared ids in a's order, paired with their position in b.
    std::vector<std::size_t> b_positions;
    for (std::size_t id : a)
        if (auto it = pos_b.find(id); it != pos_b.end()) b_positions.push_back(it->second);

    NeighborhoodScore s;
    s.overlap = b_positions.size();
    if (s.overlap > 1) {
        // Ranks within a are 0..m-1 by construction; ranks within b come from
        // ordering the b positions.
        const std::size_t m = b_positions.size();
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return b_positions[x] < b_positions[y]; });
        std::vector<double> rank_b(m);
        for (std::size_t r = 0; r < m; ++r) rank_b[order[r]] = static_cast<double>(r);
        double sum_sq = 0.0;
        for (std::size_t r = 0; r < m; ++r) sum_sq += (static_cast<double>(r) - rank_b[r]) * (static_cast<double>(r) - rank_b[r]);
        const double md = static_cast<double>(m);
        s.rank_corr = 1.0 - 6.0 * sum_sq / (md * (md * md - 1.0));
    }
    s.score = (static_cast<double>(s.overlap) / static_cast<double>(k)) * (1.0 + s.rank_corr) / 2.0;
    return s;
}

NeighborhoodScore neighborhood_correlation(const std::vector<Neighbor>& a, const std::vector<Neighbor>& b,
                                           std::size_t k) {
    std::vector<std::size_t> ia, ib;
    for (const auto& nb : a) ia.push_back(nb.index);
    for (const auto& nb : b) ib.push_back(nb.index);
    return neighborhood_correlation(ia, ib, k);
}

void BenchConfig::validate() const {
    if (fixed_d < 2 || fixed_n < 2 || k == 0 || repeats == 0)
        throw PreconditionError("bench: fixed_d, fixed_n, k and repeats must be positive (d, n >= 2)");
    if (forward_fraction < 0.0 || backward_fraction < 0.0) throw PreconditionError("bench: negative perturbation");
    for (auto n : sample_counts)
        if (n < 2 || k >= n) throw PreconditionError("bench: every sample count must exceed k");
    for (auto d : dimension_counts)
        if (d < 2) throw PreconditionError("bench: dimension counts must be >= 2");
    if (k >= fixed_n && !dimension_counts.empty()) throw PreconditionError("bench: k must be below fixed_n");
    if (include_autoencoder) ae_config.validate();
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

namespace {

using Clock = std::chrono::steady_clock;

template <class F>
double time_us(F&& f) {
    const auto t0 = Clock::now();
    f();
    const auto t1 = Clock::now();
    return std::chrono::duration<double, std::micro>(t1 - t0).count();
}

// Keeps the optimizer from discarding timed work.
volatile double sink = 0.0;

struct Accumulator {
    std::vector<double> times;
    std::vector<double> scores;
};

std::pair<double, double> mean_std(const std::vector<double>& v) {
    if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

Model fit_model(ModelKind kind, const Dataset& data, const BenchConfig& config) {
    if (kind == ModelKind::pca) return fit_pca(data);
    TrainConfig tc = config.ae_config;
    tc.batch_size = std::min<int>(tc.batch_size, static_cast<int>(data.rows()));
    return train_autoencoder(data, tc);
}

void bench_setting(const BenchConfig& config, const std::string& axis, std::size_t n, std::size_t d, ModelKind kind,
                   std::uint64_t setting_seed, std::vector<BenchRow>& rows) {
    const Dataset data = gen_gaussian(n, d, setting_seed);
    const Model model = fit_model(kind, data, config);
    const Matrix base = project_all(model, data.values());
    const double plane_width = plane_bounds_of(base).width();

    std::mt19937_64 rng(setting_seed ^ 0x5851f42d4c957f2dULL);
    std::uniform_int_distribution<std::size_t> pick_point(0, n - 1), pick_feature(0, d - 1);
    std::uniform_real_distribution<double> pick_angle(0.0, 2.0 * std::numbers::pi);

    Accumulator fwd, bwd;
    std::vector<double> recompute_times;

    auto recompute_score = [&](std::size_t p, const Vector& modified, const Matrix& oos) {
        const Dataset changed = data.with_row(p, modified);
        Matrix refit_positions;
        recompute_times.push_back(time_us([&] {
            const Model refit = fit_model(kind, changed, config);
            refit_positions = project_all(refit, changed.values());
        }));
        return neighborhood_correlation(knn(oos, p, config.k), knn(refit_positions, p, config.k), config.k).score;
    };

    for (std::size_t r = 0; r < config.repeats; ++r) {
        const std::size_t p = pick_point(rng);
        const std::size_t j = pick_feature(rng);
        const double angle = pick_angle(rng);
        const Vector x = data.row(p);
        const Vector2 y = base.row(static_cast<Eigen::Index>(p)).transpose();

        // Forward: nudge one feature by a fraction of its sigma.
        Vector dx = Vector::Zero(static_cast<Eigen::Index>(d));
        dx[static_cast<Eigen::Index>(j)] = config.forward_fraction * data.stats()[j].std;
        const Vector x_fwd = x + dx;
        Vector2 y_fwd;
        fwd.times.push_back(time_us([&] {
            if (kind == ModelKind::pca)
                y_fwd = y + std::get<PcaModel>(model).forward(dx);
            else
                y_fwd = std::get<AeModel>(model).encode(x_fwd);
            sink = y_fwd[0];
        }));
        Matrix oos = base;
        oos.row(static_cast<Eigen::Index>(p)) = y_fwd.transpose();
        fwd.scores.push_back(recompute_score(p, x_fwd, oos));

        // Backward: move the point a fraction of the plane width.
        const Vector2 dy = config.backward_fraction * plane_width * Vector2(std::cos(angle), std::sin(angle));
        Vector x_bwd;
        bwd.times.push_back(time_us([&] {
            if (kind == ModelKind::pca)
                x_bwd = x + std::get<PcaModel>(model).backward(dy);
            else
                x_bwd = x + (std::get<AeModel>(model).decode(y + dy) - std::get<AeModel>(model).decode(y));
            sink = x_bwd[0];
        }));
        oos = base;
        oos.row(static_cast<Eigen::Index>(p)) = (y + dy).transpose();
        bwd.scores.push_back(recompute_score(p, x_bwd, oos));
    }

    const std::string name = to_string(kind);
    const std::size_t value = axis == "n" ? n : d;
    auto emit = [&](const std::string& op, const Accumulator& acc) {
        const auto [m, s] = mean_std(acc.scores);
        rows.push_back({axis, value, name, op, median(acc.times), m, s, config.repeats, config.seed});
    };
    emit("forward", fwd);
    emit("backward", bwd);
    rows.push_back({axis, value, name, "recompute", median(recompute_times), std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN(), config.repeats, config.seed});
}

}  // namespace

std::vector<BenchRow> run_benchmark(const BenchConfig& config) {
    config.validate();
    std::vector<ModelKind> kinds;
    if (config.include_pca) kinds.push_back(ModelKind::pca);
    if (config.include_autoencoder) kinds.push_back(ModelKind::autoencoder);

    std::vector<BenchRow> rows;
    std::uint64_t setting = 0;
    for (std::size_t n : config.sample_counts) {
        ++setting;
        for (auto kind : kinds) bench_setting(config, "n", n, config.fixed_d, kind, config.seed * 1000003ULL + setting, rows);
    }
    for (std::size_t d : config.dimension_counts) {
        ++setting;
        for (auto kind : kinds) bench_setting(config, "d", config.fixed_n, d, kind, config.seed * 1000003ULL + setting, rows);
    }
    return rows;
}

void write_benchmark_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << "setting_axis,setting_value,model,op,median_us,accuracy_mean,accuracy_std,repeats,seed\n";
    auto num = [&](double v) {
        if (std::isfinite(v)) out << v;
    };
    const auto old_precision = out.precision(10);
    for (const auto& r : rows) {
        out << r.setting_axis << ',' << r.setting_value << ',' << r.model << ',' << r.op << ',';
        num(r.median_us);
        out << ',';
        num(r.accuracy_mean);
        out << ',';
        num(r.accuracy_std);
        out << ',' << r.repeats << ',' << r.seed << '\n';
    }
    out.precision(old_precision);
}

}  // namespace dimx
