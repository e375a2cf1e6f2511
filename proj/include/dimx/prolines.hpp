#pragma once

#include "dimx/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dimx {

struct ProlineSample {
    double feature_value = 0.0;
    Vector2 position = Vector2::Zero();
};

// Inclusive sample index interval.
struct IndexRange {
    std::size_t first = 0;
    std::size_t last = 0;
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Forward-projection path of one point while one feature sweeps
/// [min, max] in steps of c * sigma, other features held at their current
/// values. Index fields name the sample nearest to the annotated value.
struct Proline {
    std::string point_id;
    std::size_t feature_index = 0;
    std::vector<ProlineSample> samples;
    std::size_t mean_index = 0;
    std::optional<std::size_t> sigma_lo_index;  // absent when mu - sigma < min
    std::optional<std::size_t> sigma_hi_index;  // absent when mu + sigma > max
    std::size_t current_index = 0;
    std::optional<IndexRange> green_range;  // [current, mu + sigma], clipped
    std::optional<IndexRange> red_range;    // [mu - sigma, current], clipped

    double arc_length() const;
};

struct ProlineOptions {
    double step_factor = 0.25;  // c
    std::size_t max_samples = 200;
};

// Feature values visited by a proline for a feature with the given stats.
// A constant feature yields the single value `current`.
std::vector<double> proline_values(const FeatureStats& stats, double current, const ProlineOptions& options = {});

// x is the point's current feature vector (the working copy).
Proline compute_proline(const Model& model, const Dataset& data, std::size_t point, const Vector& x,
                        std::size_t feature, const ProlineOptions& options = {});
Proline compute_proline(const Model& model, const Dataset& data, const std::string& point_id, std::size_t feature,
                        double step_factor = 0.25);

// One proline per feature.
std::vector<Proline> compute_prolines(const Model& model, const Dataset& data, std::size_t point, const Vector& x,
                                      const ProlineOptions& options = {}, Exec exec = Exec::parallel);

struct ProlineLength {
    std::size_t feature = 0;
    double length = 0.0;
};

// Descending by length, ties by feature index.
std::vector<ProlineLength> rank_by_length(const std::vector<Proline>& prolines);
std::vector<ProlineLength> proline_lengths(const Model& model, const Dataset& data, const std::string& point_id,
                                           double step_factor = 0.25);

enum class Direction { decreasing, unchanged, increasing };
std::string to_string(Direction d);

struct ProjectionMark {
    std::size_t feature = 0;
    Vector2 position = Vector2::Zero();
    Direction direction = Direction::unchanged;
};

// Mark i sits where the original point lands with only feature i set to
// current_x[i].
std::vector<ProjectionMark> projection_marks(const Model& model, const Vector& original_x, const Vector& current_x);

inline Vector2 snap_state(const Vector2& last_feasible, const Vector2& candidate, bool feasible) {
    return feasible ? candidate : last_feasible;
}

}  // namespace dimx
