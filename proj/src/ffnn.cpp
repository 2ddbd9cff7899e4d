#include "simbench/ffnn.hpp"

#include "simbench/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace simbench {

namespace {

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

} // namespace

FfnnModel::FfnnModel(int input_size, const std::vector<int>& hidden_sizes,
                     int output_size) {
    if (input_size < 1 || output_size < 1) {
        throw ParameterError("network input and output sizes must be >= 1");
    }
    sizes_.push_back(input_size);
    for (int h : hidden_sizes) {
        if (h < 1) throw ParameterError("hidden layer size must be >= 1");
        sizes_.push_back(h);
    }
    sizes_.push_back(output_size);

    Eigen::Index offset = 0;
    for (int l = 0; l < num_layers(); ++l) {
        weight_offsets_.push_back(offset);
        offset += static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l];
        bias_offsets_.push_back(offset);
        offset += sizes_[l + 1];
    }
    params_ = Eigen::VectorXd::Zero(offset);
}

Eigen::Map<const Eigen::MatrixXd> FfnnModel::weight(int layer) const {
    return {params_.data() + weight_offsets_[layer], sizes_[layer + 1],
            sizes_[layer]};
}

Eigen::Map<const Eigen::VectorXd> FfnnModel::bias(int layer) const {
    return {params_.data() + bias_offsets_[layer], sizes_[layer + 1]};
}

void FfnnModel::initialize(double init_std, Rng& rng) {
    for (Eigen::Index i = 0; i < params_.size(); ++i) {
        params_[i] = rng.normal(0.0, init_std);
    }
}

Eigen::VectorXd FfnnModel::forward(const Eigen::VectorXd& input) const {
    if (input.size() != sizes_.front()) {
        throw ParameterError("network input width mismatch");
    }
    Eigen::VectorXd activation = input;
    for (int l = 0; l < num_layers(); ++l) {
        Eigen::VectorXd pre = weight(l) * activation + bias(l);
        if (l + 1 < num_layers()) {
            activation = pre.array().tanh().matrix();
        } else {
            activation = std::move(pre);
        }
    }
    return activation;
}

Eigen::MatrixXd FfnnModel::predict(const Eigen::MatrixXd& inputs) const {
    Eigen::MatrixXd out(inputs.rows(), sizes_.back());
    for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
        out.row(r) = forward(inputs.row(r).transpose()).transpose();
    }
    return out;
}

double FfnnModel::loss(const Eigen::MatrixXd& inputs,
                       const Eigen::MatrixXd& targets, double l2) const {
    double total = 0.0;
    for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
        const Eigen::VectorXd out = forward(inputs.row(r).transpose());
        total += (out - targets.row(r).transpose()).cwiseAbs().sum();
    }
    double penalty = 0.0;
    for (int l = 0; l < num_layers(); ++l) {
        penalty += weight(l).squaredNorm();
    }
    return total / static_cast<double>(inputs.rows() * targets.cols()) +
           0.5 * l2 * penalty;
}

double FfnnModel::loss_and_gradient(const Eigen::MatrixXd& inputs,
                                    const Eigen::MatrixXd& targets, double l2,
                                    Eigen::VectorXd& grad) const {
    if (inputs.rows() != targets.rows()) {
        throw ParameterError("input/target row mismatch");
    }
    grad = Eigen::VectorXd::Zero(params_.size());
    const double denom = static_cast<double>(inputs.rows() * targets.cols());
    double total = 0.0;

    std::vector<Eigen::VectorXd> activations(static_cast<std::size_t>(num_layers()) + 1);
    for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
        activations[0] = inputs.row(r).transpose();
        for (int l = 0; l < num_layers(); ++l) {
            Eigen::VectorXd pre = weight(l) * activations[static_cast<std::size_t>(l)] + bias(l);
            activations[static_cast<std::size_t>(l) + 1] =
                (l + 1 < num_layers()) ? pre.array().tanh().matrix() : pre;
        }
        const Eigen::VectorXd error =
            activations.back() - targets.row(r).transpose();
        total += error.cwiseAbs().sum();

        Eigen::VectorXd delta = error.unaryExpr(&sign_of) / denom;
        for (int l = num_layers() - 1; l >= 0; --l) {
            const Eigen::VectorXd& below = activations[static_cast<std::size_t>(l)];
            Eigen::Map<Eigen::MatrixXd> dW(grad.data() + weight_offsets_[l],
                                           sizes_[l + 1], sizes_[l]);
            Eigen::Map<Eigen::VectorXd> db(grad.data() + bias_offsets_[l],
                                           sizes_[l + 1]);
            dW.noalias() += delta * below.transpose();
            db += delta;
            if (l > 0) {
                Eigen::VectorXd back = weight(l).transpose() * delta;
                // derivative of tanh through the stored activation
                delta = back.cwiseProduct(
                    (1.0 - below.array().square()).matrix());
            }
        }
    }

    double penalty = 0.0;
    for (int l = 0; l < num_layers(); ++l) {
        penalty += weight(l).squaredNorm();
        Eigen::Map<Eigen::MatrixXd> dW(grad.data() + weight_offsets_[l],
                                       sizes_[l + 1], sizes_[l]);
        dW += l2 * weight(l);
    }
    return total / denom + 0.5 * l2 * penalty;
}

FfnnModel fit_ffnn(const WindowBatch& batch, const FfnnConfig& config) {
    if (batch.rows() == 0) {
        throw DataError("cannot train a network on an empty window batch");
    }
    const int m = static_cast<int>(batch.inputs.cols());
    const int h = static_cast<int>(batch.targets.cols());
    if (config.hidden_sizes.empty()) {
        throw ParameterError("at least one hidden layer is required");
    }
    for (int size : config.hidden_sizes) {
        if (size < 3 || size > m) {
            throw ParameterError("hidden layer size " + std::to_string(size) +
                                 " outside the allowed range [3, " +
                                 std::to_string(m) + "]");
        }
    }
    const NnTrainingConfig& train = config.train;
    if (train.epochs < 1 || train.epoch_size < 1 || train.minibatch < 1) {
        throw ParameterError("epochs, epoch size, and minibatch must be >= 1");
    }

    FfnnModel model(m, config.hidden_sizes, h);
    Rng rng(train.seed);
    model.initialize(train.init_std, rng);
    AdamOptimizer adam(model.parameters().size(), train.learning_rate);

    const Eigen::Index rows = batch.inputs.rows();
    const Eigen::Index mb =
        std::min<Eigen::Index>(train.minibatch, rows);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(rows));
    std::iota(order.begin(), order.end(), 0);

    Eigen::VectorXd grad;
    Eigen::MatrixXd noisy(mb, m);
    Eigen::MatrixXd target(mb, h);
    for (int epoch = 0; epoch < train.epochs; ++epoch) {
        for (int rep = 0; rep < train.epoch_size; ++rep) {
            shuffle_in_place(order, rng);
            for (Eigen::Index start = 0; start < rows; start += mb) {
                const Eigen::Index count = std::min(mb, rows - start);
                noisy.resize(count, m);
                target.resize(count, h);
                for (Eigen::Index i = 0; i < count; ++i) {
                    const Eigen::Index row = order[static_cast<std::size_t>(start + i)];
                    for (int c = 0; c < m; ++c) {
                        noisy(i, c) = batch.inputs(row, c) +
                                      rng.normal(0.0, train.input_noise_std);
                    }
                    target.row(i) = batch.targets.row(row);
                }
                const double step_loss = model.loss_and_gradient(
                    noisy, target, train.l2_lambda, grad);
                if (!std::isfinite(step_loss)) {
                    throw FitError("feed-forward training diverged at epoch " +
                                   std::to_string(epoch));
                }
                adam.step(model.parameters(), grad);
            }
        }
        model.training_trace.push_back(
            model.loss(batch.inputs, batch.targets, train.l2_lambda));
    }
    return model;
}

} // namespace simbench
