#include "dimx/autoencoder.hpp"
#include "dimx/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dimx {

std::string to_string(Activation a) {
    switch (a) {
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    }
    return "linear";
}

Activation activation_from_string(const std::string& name) {
    if (name == "linear") return Activation::linear;
    if (name == "relu") return Activation::relu;
    if (name == "sigmoid") return Activation::sigmoid;
    throw ParseError("unknown activation '" + name + "'");
}

std::string to_string(Violation::Kind k) {
    switch (k) {
    case Violation::Kind::lock: return "lock";
    case Violation::Kind::lower: return "lower";
    case Violation::Kind::upper: return "upper";
    }
    return "lock";
}

namespace {

void apply_activation(Eigen::MatrixXd& z, Activation a) {
    switch (a) {
    case Activation::linear: break;
    case Activation::relu: z = z.cwiseMax(0.0); break;
    case Activation::sigmoid: z = (1.0 + (-z.array()).exp()).inverse().matrix(); break;
    }
}

// Derivative expressed through the activation output where possible.
Eigen::MatrixXd activation_derivative(const Eigen::MatrixXd& pre, const Eigen::MatrixXd& out, Activation a) {
    switch (a) {
    case Activation::linear: return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
    case Activation::relu: return (pre.array() > 0.0).cast<double>().matrix();
    case Activation::sigmoid: return (out.array() * (1.0 - out.array())).matrix();
    }
    return {};
}

}  // namespace

Network::Network(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& l = layers_[i];
        if (l.bias.size() != l.outputs()) throw PreconditionError("layer " + std::to_string(i) + ": bias size mismatch");
        if (i > 0 && layers_[i - 1].outputs() != l.inputs())
            throw PreconditionError("layer " + std::to_string(i) + ": input width does not match previous layer");
    }
}

Network Network::xavier(const std::vector<int>& sizes, const std::vector<Activation>& activations,
                        std::uint64_t seed) {
    if (sizes.size() < 2 || activations.size() != sizes.size() - 1)
        throw PreconditionError("xavier: need one activation per layer");
    std::mt19937_64 rng(seed);
    std::vector<DenseLayer> layers;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        const int in = sizes[i], out = sizes[i + 1];
        if (in < 1 || out < 1) throw PreconditionError("xavier: layer widths must be positive");
        const double limit = std::sqrt(6.0 / (in + out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        DenseLayer l;
        l.weights.resize(in, out);
        for (Eigen::Index r = 0; r < in; ++r)
            for (Eigen::Index c = 0; c < out; ++c) l.weights(r, c) = dist(rng);
        l.bias = Eigen::RowVectorXd::Zero(out);
        l.activation = activations[i];
        layers.push_back(std::move(l));
    }
    return Network(std::move(layers));
}

std::vector<int> Network::sizes() const {
    std::vector<int> s;
    if (layers_.empty()) return s;
    s.push_back(static_cast<int>(layers_.front().inputs()));
    for (const auto& l : layers_) s.push_back(static_cast<int>(l.outputs()));
    return s;
}

Eigen::MatrixXd Network::run(const Eigen::MatrixXd& batch, std::size_t first, std::size_t last) const {
    Eigen::MatrixXd a = batch;
    for (std::size_t i = first; i < last; ++i) {
        const auto& l = layers_[i];
        Eigen::MatrixXd z = a * l.weights;
        z.rowwise() += l.bias;
        apply_activation(z, l.activation);
        a = std::move(z);
    }
    return a;
}

double Network::mse(const Eigen::MatrixXd& batch, const Eigen::MatrixXd& target) const {
    return (run(batch) - target).squaredNorm() / static_cast<double>(target.size());
}

double Network::mse_gradients(const Eigen::MatrixXd& batch, const Eigen::MatrixXd& target,
                              std::vector<LayerGradient>& grads) const {
    const std::size_t nl = layers_.size();
    std::vector<Eigen::MatrixXd> inputs(nl), pre(nl);
    Eigen::MatrixXd a = batch;
    for (std::size_t i = 0; i < nl; ++i) {
        inputs[i] = a;
        pre[i] = a * layers_[i].weights;
        pre[i].rowwise() += layers_[i].bias;
        a = pre[i];
        apply_activation(a, layers_[i].activation);
    }
    const Eigen::MatrixXd diff = a - target;
    const double count = static_cast<double>(target.size());
    const double loss = diff.squaredNorm() / count;

    grads.resize(nl);
    Eigen::MatrixXd delta = (2.0 / count) * diff;  // dL/d(output)
    Eigen::MatrixXd out = std::move(a);
    for (std::size_t k = nl; k-- > 0;) {
        const auto& l = layers_[k];
        delta = delta.cwiseProduct(activation_derivative(pre[k], out, l.activation));
        grads[k].weights = inputs[k].transpose() * delta;
        grads[k].bias = delta.colwise().sum();
        if (k > 0) {
            delta = delta * l.weights.transpose();
            out = inputs[k];
        }
    }
    return loss;
}

bool Network::all_finite() const {
    return std::all_of(layers_.begin(), layers_.end(),
                       [](const DenseLayer& l) { return l.weights.allFinite() && l.bias.allFinite(); });
}

void TrainConfig::validate() const {
    if (epochs < 1) throw PreconditionError("train_autoencoder: epochs must be >= 1");
    if (batch_size < 1) throw PreconditionError("train_autoencoder: batch_size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw PreconditionError("train_autoencoder: learning_rate must be > 0");
    for (int h : hidden)
        if (h < 1) throw PreconditionError("train_autoencoder: hidden widths must be positive");
}

AeModel::AeModel(Network network, Vector input_min, Vector input_max, Vector lock_tolerance, std::uint64_t seed)
    : network_(std::move(network)),
      input_min_(std::move(input_min)),
      input_max_(std::move(input_max)),
      lock_tolerance_(std::move(lock_tolerance)),
      seed_(seed) {
    const auto sizes = network_.sizes();
    const auto d = input_min_.size();
    if (sizes.empty() || sizes.front() != d || sizes.back() != d)
        throw PreconditionError("AeModel: network input/output width must equal feature count");
    if (input_max_.size() != d || lock_tolerance_.size() != d)
        throw PreconditionError("AeModel: scale vectors must match feature count");
    if ((input_max_.array() < input_min_.array()).any()) throw PreconditionError("AeModel: input max below min");
    auto it = std::find(sizes.begin() + 1, sizes.end() - 1, 2);
    if (it == sizes.end() - 1) throw PreconditionError("AeModel: no width-2 bottleneck layer");
    bottleneck_ = static_cast<std::size_t>(it - sizes.begin()) - 1;
    if (!network_.all_finite()) throw PreconditionError("AeModel: non-finite parameters");
}

namespace {

Vector feature_range(const Vector& lo, const Vector& hi) {
    Vector r = hi - lo;
    for (Eigen::Index i = 0; i < r.size(); ++i)
        if (r[i] <= 0.0) r[i] = 1.0;
    return r;
}

}  // namespace

Vector AeModel::scale(const Vector& x) const {
    return (x - input_min_).cwiseQuotient(feature_range(input_min_, input_max_));
}

Vector AeModel::unscale(const Vector& s) const {
    return s.cwiseProduct(feature_range(input_min_, input_max_)) + input_min_;
}

Eigen::MatrixXd AeModel::scale_rows(const Matrix& rows) const {
    const Vector range = feature_range(input_min_, input_max_);
    return ((rows.rowwise() - input_min_.transpose()).array().rowwise() / range.transpose().array()).matrix();
}

Vector2 AeModel::encode(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != dims())
        throw PreconditionError("ae_encode: expected " + std::to_string(dims()) + " features, got " +
                                std::to_string(x.size()));
    if (!x.allFinite()) throw PreconditionError("ae_encode: non-finite input");
    const Eigen::MatrixXd code = network_.run(scale(x).transpose(), 0, bottleneck_ + 1);
    return Vector2(2.0 * code(0, 0) - 1.0, 2.0 * code(0, 1) - 1.0);
}

Matrix AeModel::encode_all(const Matrix& rows) const {
    if (static_cast<std::size_t>(rows.cols()) != dims()) throw PreconditionError("ae_encode: dimension mismatch");
    const Eigen::MatrixXd code = network_.run(scale_rows(rows), 0, bottleneck_ + 1);
    return (2.0 * code.array() - 1.0).matrix();
}

Vector AeModel::decode(const Vector2& y) const {
    if (!y.allFinite()) throw PreconditionError("ae_decode: non-finite position");
    Eigen::MatrixXd code(1, 2);
    code << 0.5 * (y[0] + 1.0), 0.5 * (y[1] + 1.0);
    const Eigen::MatrixXd out = network_.run(code, bottleneck_ + 1, network_.layers().size());
    return unscale(out.row(0).transpose());
}

double AeModel::reconstruction_mse(const Matrix& rows) const {
    const Eigen::MatrixXd s = scale_rows(rows);
    return network_.mse(s, s);
}

AeModel train_autoencoder(const Dataset& data, const TrainConfig& config, TrainReport* report) {
    config.validate();
    const auto n = static_cast<Eigen::Index>(data.rows());
    const int d = static_cast<int>(data.cols());
    if (n < config.batch_size) throw PreconditionError("train_autoencoder: fewer rows than batch_size");

    std::vector<int> sizes{d};
    std::vector<Activation> acts;
    for (int h : config.hidden) {
        sizes.push_back(h);
        acts.push_back(Activation::relu);
    }
    sizes.push_back(2);
    acts.push_back(Activation::sigmoid);
    for (auto it = config.hidden.rbegin(); it != config.hidden.rend(); ++it) {
        sizes.push_back(*it);
        acts.push_back(Activation::relu);
    }
    sizes.push_back(d);
    acts.push_back(Activation::sigmoid);

    Vector lo(d), hi(d), tol(d);
    for (int j = 0; j < d; ++j) {
        const auto& s = data.stats()[static_cast<std::size_t>(j)];
        lo[j] = s.min;
        hi[j] = s.max;
        tol[j] = std::max(1e-6, 0.01 * s.std);
    }

    Network net = Network::xavier(sizes, acts, config.seed);
    AeModel scaler(net, lo, hi, tol, config.seed);
    const Eigen::MatrixXd x = scaler.scale_rows(data.values());

    TrainReport local;
    TrainReport& rep = report ? *report : local;
    rep.epoch_mse.clear();
    rep.initial_mse = net.mse(x, x);

    // Adam state.
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<LayerGradient> m(net.layers().size()), v(net.layers().size()), grads;
    for (std::size_t k = 0; k < m.size(); ++k) {
        const auto& l = net.layers()[k];
        m[k] = {Eigen::MatrixXd::Zero(l.inputs(), l.outputs()), Eigen::RowVectorXd::Zero(l.outputs())};
        v[k] = m[k];
    }

    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    long step = 0;
    Eigen::MatrixXd batch;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index start = 0; start < n; start += config.batch_size) {
            const Eigen::Index count = std::min<Eigen::Index>(config.batch_size, n - start);
            batch.resize(count, d);
            for (Eigen::Index r = 0; r < count; ++r) batch.row(r) = x.row(order[static_cast<std::size_t>(start + r)]);

            const double loss = net.mse_gradients(batch, batch, grads);
            if (!std::isfinite(loss))
                throw TrainingError("train_autoencoder: non-finite loss at epoch " + std::to_string(epoch), epoch);

            ++step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (std::size_t k = 0; k < grads.size(); ++k) {
                auto& layer = net.layers()[k];
                m[k].weights = beta1 * m[k].weights + (1.0 - beta1) * grads[k].weights;
                v[k].weights = beta2 * v[k].weights + (1.0 - beta2) * grads[k].weights.cwiseAbs2();
                m[k].bias = beta1 * m[k].bias + (1.0 - beta1) * grads[k].bias;
                v[k].bias = beta2 * v[k].bias + (1.0 - beta2) * grads[k].bias.cwiseAbs2();
                layer.weights.array() -=
                    config.learning_rate * (m[k].weights.array() / c1) / ((v[k].weights.array() / c2).sqrt() + eps);
                layer.bias.array() -=
                    config.learning_rate * (m[k].bias.array() / c1) / ((v[k].bias.array() / c2).sqrt() + eps);
            }
        }
        const double epoch_loss = net.mse(x, x);
        if (!std::isfinite(epoch_loss) || !net.all_finite())
            throw TrainingError("train_autoencoder: non-finite loss at epoch " + std::to_string(epoch), epoch);
        rep.epoch_mse.push_back(epoch_loss);
    }
    return AeModel(std::move(net), std::move(lo), std::move(hi), std::move(tol), config.seed);
}

AeFeasibility check_constraints(const Vector& x, const ConstraintSet& constraints, const Vector& lock_tolerance) {
    if (constraints.size() != static_cast<std::size_t>(x.size()))
        throw PreconditionError("constraint set dimension does not match point");
    AeFeasibility out;
    out.x = x;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const auto& c = constraints[i];
        const double xi = x[static_cast<Eigen::Index>(i)];
        if (c.locked && std::abs(xi - c.lock_value) > lock_tolerance[static_cast<Eigen::Index>(i)])
            out.violations.push_back({i, Violation::Kind::lock, xi, c.lock_value});
        if (xi < c.lower) out.violations.push_back({i, Violation::Kind::lower, xi, c.lower});
        if (xi > c.upper) out.violations.push_back({i, Violation::Kind::upper, xi, c.upper});
    }
    out.feasible = out.violations.empty();
    return out;
}

AeFeasibility ae_feasibility(const AeModel& model, const Vector2& y, const ConstraintSet& constraints) {
    return check_constraints(model.decode(y), constraints, model.lock_tolerance());
}

}  // namespace dimx
