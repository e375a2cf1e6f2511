#pragma once

#include "dimx/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dimx {

// Rows i.i.d. from N(0, diag(1, 2, ..., d) / d).
Dataset gen_gaussian(std::size_t n, std::size_t d, std::uint64_t seed);

struct Neighbor {
    std::size_t index = 0;
    double distance = 0.0;
    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// k nearest rows of positions (n x 2) to row `query`, excluding the query,
// ascending by distance with ties broken by index.
std::vector<Neighbor> knn(const Matrix& positions, std::size_t query, std::size_t k);

struct NeighborhoodScore {
    std::size_t overlap = 0;
    double rank_corr = 1.0;
    double score = 0.0;  // (overlap / k) * (1 + rank_corr) / 2
};

// Compares two ordered neighbor id lists of length k. rank_corr is the
// Spearman correlation between the positions of the shared ids in a and in
// b; it is 1 when at most one id is shared.
NeighborhoodScore neighborhood_correlation(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                                           std::size_t k);
NeighborhoodScore neighborhood_correlation(const std::vector<Neighbor>& a, const std::vector<Neighbor>& b,
                                           std::size_t k);

struct BenchConfig {
    std::vector<std::size_t> sample_counts = {100, 1000, 10000};
    std::vector<std::size_t> dimension_counts = {10, 100, 1000};
    std::size_t fixed_d = 10;
    std::size_t fixed_n = 100;
    std::size_t k = 10;
    double forward_fraction = 1.0 / 8.0;   // of the feature's sigma
    double backward_fraction = 1.0 / 80.0; // of the plane width m
    std::size_t repeats = 20;
    std::uint64_t seed = 42;
    bool include_pca = true;
    bool include_autoencoder = false;
    TrainConfig ae_config{.epochs = 10, .batch_size = 64, .learning_rate = 1e-3, .seed = 7, .hidden = {32, 8}};

    void validate() const;
};

struct BenchRow {
    std::string setting_axis;  // "n" or "d"
    std::size_t setting_value = 0;
    std::string model;         // "pca" or "autoencoder"
    std::string op;            // "forward", "backward", "recompute"
    double median_us = 0.0;
    double accuracy_mean = 0.0;  // NaN for recompute rows
    double accuracy_std = 0.0;
    std::size_t repeats = 0;
    std::uint64_t seed = 0;
};

std::vector<BenchRow> run_benchmark(const BenchConfig& config);

void write_benchmark_csv(std::ostream& out, const std::vector<BenchRow>& rows);

double median(std::vector<double> values);

}  // namespace dimx
