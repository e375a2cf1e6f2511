#pragma once

#include <Eigen/Core>

#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dimx {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Vector2 = Eigen::Vector2d;

struct FeatureStats {
    double mean = 0.0;
    double std = 0.0;  // population (divide by n)
    double min = 0.0;
    double max = 0.0;
};

// Population statistics of one column. Requires at least two finite values.
FeatureStats compute_stats(std::span<const double> column);
FeatureStats compute_stats(const Eigen::Ref<const Vector>& column);

/// Immutable n x d numeric table. Rows are data points, columns features.
class Dataset {
public:
    Dataset(std::vector<std::string> ids, std::vector<std::string> feature_names, Matrix values);

    std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }

    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const Matrix& values() const { return values_; }
    const std::vector<FeatureStats>& stats() const { return stats_; }

    Vector row(std::size_t i) const { return values_.row(static_cast<Eigen::Index>(i)).transpose(); }

    std::optional<std::size_t> index_of(std::string_view id) const;
    std::optional<std::size_t> feature_index(std::string_view name) const;

    // Copy with row i replaced; used by recompute-style evaluations.
    Dataset with_row(std::size_t i, const Vector& x) const;

private:
    std::vector<std::string> ids_;
    std::vector<std::string> feature_names_;
    Matrix values_;
    std::vector<FeatureStats> stats_;
};

// Parses an RFC-4180 style CSV with a header row. When id_column is given the
// named column supplies row ids; otherwise ids are "0", "1", ...
Dataset load_csv(std::istream& in, const std::optional<std::string>& id_column = std::nullopt);
Dataset load_csv(std::string_view text, const std::optional<std::string>& id_column = std::nullopt);

// Writes ids in a leading "id" column followed by the features, using
// shortest round-trip formatting for doubles.
std::string to_csv(const Dataset& data, std::string_view id_header = "id");

}  // namespace dimx
