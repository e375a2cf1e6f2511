#include "dimx/prolines.hpp"
#include "dimx/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace dimx {

double Proline::arc_length() const {
    double total = 0.0;
    for (std::size_t k = 1; k < samples.size(); ++k) total += (samples[k].position - samples[k - 1].position).norm();
    return total;
}

std::vector<double> proline_values(const FeatureStats& stats, double current, const ProlineOptions& options) {
    if (!(options.step_factor > 0.0)) throw PreconditionError("proline: step factor must be > 0");
    if (options.max_samples < 2) throw PreconditionError("proline: sample cap must be >= 2");
    const double range = stats.max - stats.min;
    if (stats.std <= 0.0 || range <= 0.0) return {current};

    double step = options.step_factor * stats.std;
    double steps = range / step;
    // Regular samples min + k*step for k = 0..whole, then max unless the
    // last regular sample already lands on it.
    auto whole = static_cast<std::size_t>(std::floor(steps + 1e-9));
    bool lands_on_max = std::abs(static_cast<double>(whole) * step - range) <= 1e-9 * range;
    if (whole + (lands_on_max ? 1 : 2) > options.max_samples) {
        whole = options.max_samples - 1;
        step = range / static_cast<double>(whole);
        lands_on_max = true;
    }

    std::vector<double> values;
    values.reserve(whole + 2);
    for (std::size_t k = 0; k <= whole; ++k) values.push_back(stats.min + static_cast<double>(k) * step);
    if (lands_on_max)
        values.back() = stats.max;
    else
        values.push_back(stats.max);
    return values;
}

namespace {

std::size_t nearest_index(const std::vector<ProlineSample>& samples, double value) {
    auto it = std::lower_bound(samples.begin(), samples.end(), value,
                               [](const ProlineSample& s, double v) { return s.feature_value < v; });
    if (it == samples.end()) return samples.size() - 1;
    const auto hi = static_cast<std::size_t>(it - samples.begin());
    if (hi == 0) return 0;
    return (value - samples[hi - 1].feature_value <= it->feature_value - value) ? hi - 1 : hi;
}

std::optional<IndexRange> range_for(const std::vector<ProlineSample>& samples, double lo, double hi,
                                    const FeatureStats& stats) {
    lo = std::max(lo, stats.min);
    hi = std::min(hi, stats.max);
    if (lo > hi) return std::nullopt;
    return IndexRange{nearest_index(samples, lo), nearest_index(samples, hi)};
}

}  // namespace

Proline compute_proline(const Model& model, const Dataset& data, std::size_t point, const Vector& x,
                        std::size_t feature, const ProlineOptions& options) {
    if (point >= data.rows()) throw PreconditionError("proline: point index out of range");
    if (feature >= data.cols()) throw PreconditionError("proline: feature index out of range");
    if (static_cast<std::size_t>(x.size()) != data.cols()) throw PreconditionError("proline: dimension mismatch");

    const auto& stats = data.stats()[feature];
    const auto fi = static_cast<Eigen::Index>(feature);
    const double current = x[fi];

    Proline p;
    p.point_id = data.ids()[point];
    p.feature_index = feature;
    Vector probe = x;
    for (double v : proline_values(stats, current, options)) {
        probe[fi] = v;
        p.samples.push_back({v, project(model, probe)});
    }
    if (p.samples.size() == 1) return p;

    p.mean_index = nearest_index(p.samples, stats.mean);
    if (stats.mean - stats.std >= stats.min) p.sigma_lo_index = nearest_index(p.samples, stats.mean - stats.std);
    if (stats.mean + stats.std <= stats.max) p.sigma_hi_index = nearest_index(p.samples, stats.mean + stats.std);
    p.current_index = nearest_index(p.samples, current);
    p.green_range = range_for(p.samples, current, stats.mean + stats.std, stats);
    p.red_range = range_for(p.samples, stats.mean - stats.std, current, stats);
    return p;
}

Proline compute_proline(const Model& model, const Dataset& data, const std::string& point_id, std::size_t feature,
                        double step_factor) {
    const auto point = data.index_of(point_id);
    if (!point) throw PreconditionError("proline: unknown point '" + point_id + "'");
    ProlineOptions options;
    options.step_factor = step_factor;
    return compute_proline(model, data, *point, data.row(*point), feature, options);
}

std::vector<Proline> compute_prolines(const Model& model, const Dataset& data, std::size_t point, const Vector& x,
                                      const ProlineOptions& options, Exec exec) {
    const auto d = static_cast<long>(data.cols());
    std::vector<Proline> out(data.cols());
    if (exec == Exec::serial) {
        for (long i = 0; i < d; ++i)
            out[static_cast<std::size_t>(i)] = compute_proline(model, data, point, x, static_cast<std::size_t>(i), options);
        return out;
    }

    // Exceptions may not cross the parallel region.
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < d; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = compute_proline(model, data, point, x, static_cast<std::size_t>(i), options);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

std::vector<ProlineLength> rank_by_length(const std::vector<Proline>& prolines) {
    std::vector<ProlineLength> ranked;
    ranked.reserve(prolines.size());
    for (const auto& p : prolines) ranked.push_back({p.feature_index, p.arc_length()});
    std::stable_sort(ranked.begin(), ranked.end(), [](const ProlineLength& a, const ProlineLength& b) {
        if (a.length != b.length) return a.length > b.length;
        return a.feature < b.feature;
    });
    return ranked;
}

std::vector<ProlineLength> proline_lengths(const Model& model, const Dataset& data, const std::string& point_id,
                                           double step_factor) {
    const auto point = data.index_of(point_id);
    if (!point) throw PreconditionError("proline: unknown point '" + point_id + "'");
    ProlineOptions options;
    options.step_factor = step_factor;
    return rank_by_length(compute_prolines(model, data, *point, data.row(*point), options));
}

std::string to_string(Direction d) {
    switch (d) {
    case Direction::decreasing: return "decreasing";
    case Direction::unchanged: return "unchanged";
    case Direction::increasing: return "increasing";
    }
    return "unchanged";
}

std::vector<ProjectionMark> projection_marks(const Model& model, const Vector& original_x, const Vector& current_x) {
    if (original_x.size() != current_x.size()) throw PreconditionError("projection_marks: dimension mismatch");
    if (!current_x.allFinite()) throw PreconditionError("projection_marks: non-finite values");
    constexpr double dead_band = 1e-9;
    std::vector<ProjectionMark> marks;
    marks.reserve(static_cast<std::size_t>(original_x.size()));
    Vector probe = original_x;
    for (Eigen::Index i = 0; i < original_x.size(); ++i) {
        probe[i] = current_x[i];
        ProjectionMark m;
        m.feature = static_cast<std::size_t>(i);
        m.position = project(model, probe);
        const double diff = current_x[i] - original_x[i];
        m.direction = diff > dead_band ? Direction::increasing
                      : diff < -dead_band ? Direction::decreasing
                                          : Direction::unchanged;
        marks.push_back(m);
        probe[i] = original_x[i];
    }
    return marks;
}

}  // namespace dimx
