#pragma once

#include "dimx/constraints.hpp"
#include "dimx/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dimx {

enum class Activation { linear, relu, sigmoid };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct DenseLayer {
    Eigen::MatrixXd weights;  // in x out
    Eigen::RowVectorXd bias;  // out
    Activation activation = Activation::linear;

    Eigen::Index inputs() const { return weights.rows(); }
    Eigen::Index outputs() const { return weights.cols(); }
};

struct LayerGradient {
    Eigen::MatrixXd weights;
    Eigen::RowVectorXd bias;
};

/// Plain fully connected network operating on row batches.
class Network {
public:
    Network() = default;
    explicit Network(std::vector<DenseLayer> layers);

    // Sizes [in, h1, ..., out]; Xavier-uniform weights, zero biases.
    static Network xavier(const std::vector<int>& sizes, const std::vector<Activation>& activations,
                          std::uint64_t seed);

    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<int> sizes() const;

    // Runs layers [first, last) on a batch.
    Eigen::MatrixXd run(const Eigen::MatrixXd& batch, std::size_t first, std::size_t last) const;
    Eigen::MatrixXd run(const Eigen::MatrixXd& batch) const { return run(batch, 0, layers_.size()); }

    // Mean squared reconstruction error of batch against target, averaged
    // over every entry, with its gradient for each layer.
    double mse_gradients(const Eigen::MatrixXd& batch, const Eigen::MatrixXd& target,
                         std::vector<LayerGradient>& grads) const;
    double mse(const Eigen::MatrixXd& batch, const Eigen::MatrixXd& target) const;

    bool all_finite() const;

private:
    std::vector<DenseLayer> layers_;
};

struct TrainConfig {
    int epochs = 100;
    int batch_size = 64;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    // Encoder widths between the input and the 2-unit bottleneck; the decoder
    // mirrors them.
    std::vector<int> hidden = {128, 32};

    void validate() const;
};

struct TrainReport {
    double initial_mse = 0.0;
    std::vector<double> epoch_mse;  // full-data MSE after each epoch
};

/// Autoencoder DR model: encode is forward projection, decode is backward.
///
/// Inputs are mapped to [0, 1] per feature with the training min/max. The
/// sigmoid bottleneck output s is placed on the plane as y = 2s - 1.
class AeModel {
public:
    AeModel(Network network, Vector input_min, Vector input_max, Vector lock_tolerance, std::uint64_t seed);

    std::size_t dims() const { return static_cast<std::size_t>(input_min_.size()); }
    const Network& network() const { return network_; }
    const Vector& input_min() const { return input_min_; }
    const Vector& input_max() const { return input_max_; }
    const Vector& lock_tolerance() const { return lock_tolerance_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t bottleneck_layer() const { return bottleneck_; }  // index of the layer producing the code

    Vector scale(const Vector& x) const;
    Vector unscale(const Vector& s) const;
    Eigen::MatrixXd scale_rows(const Matrix& rows) const;

    Vector2 encode(const Vector& x) const;
    Matrix encode_all(const Matrix& rows) const;  // n x 2
    Vector decode(const Vector2& y) const;

    double reconstruction_mse(const Matrix& rows) const;  // in scaled units

private:
    Network network_;
    Vector input_min_;
    Vector input_max_;
    Vector lock_tolerance_;
    std::uint64_t seed_;
    std::size_t bottleneck_ = 0;
};

// Adam (0.9, 0.999, 1e-8) on minibatch MSE; shuffling and init driven by
// config.seed so identical inputs give bitwise identical models.
AeModel train_autoencoder(const Dataset& data, const TrainConfig& config, TrainReport* report = nullptr);

struct Violation {
    enum class Kind { lock, lower, upper };
    std::size_t feature = 0;
    Kind kind = Kind::lock;
    double value = 0.0;
    double limit = 0.0;
};

std::string to_string(Violation::Kind k);

struct AeFeasibility {
    bool feasible = true;
    Vector x;
    std::vector<Violation> violations;
};

// Decodes y and tests the result against constraints. Locks hold within the
// model's per-feature tolerance max(1e-6, 0.01 sigma).
AeFeasibility ae_feasibility(const AeModel& model, const Vector2& y, const ConstraintSet& constraints);
AeFeasibility check_constraints(const Vector& x, const ConstraintSet& constraints, const Vector& lock_tolerance);

}  // namespace dimx
