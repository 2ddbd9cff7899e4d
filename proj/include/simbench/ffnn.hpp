#pragma once

#include "simbench/nn_common.hpp"
#include "simbench/preprocess.hpp"

#include <Eigen/Dense>

#include <vector>

namespace simbench {

struct FfnnConfig {
    std::vector<int> hidden_sizes; // each within [3, input size]
    NnTrainingConfig train;
};

/// Fully connected network: tanh on hidden layers, identity on the output
/// layer. Trained with mean absolute error plus L2 weight decay. Parameters
/// live in one flat vector so the optimizer and finite-difference checks can
/// treat the model as a plain function of that vector.
class FfnnModel {
public:
    FfnnModel() = default;
    FfnnModel(int input_size, const std::vector<int>& hidden_sizes, int output_size);

    int input_size() const { return sizes_.front(); }
    int output_size() const { return sizes_.back(); }
    const std::vector<int>& layer_sizes() const { return sizes_; }

    Eigen::VectorXd& parameters() { return params_; }
    const Eigen::VectorXd& parameters() const { return params_; }

    /// Draws every parameter from N(0, init_std).
    void initialize(double init_std, Rng& rng);

    Eigen::VectorXd forward(const Eigen::VectorXd& input) const;

    /// One forecast row per input row.
    Eigen::MatrixXd predict(const Eigen::MatrixXd& inputs) const;

    /// Mean |output - target| over all elements plus (l2/2) * sum of squared
    /// weight-matrix entries (biases carry no decay).
    double loss(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                double l2) const;

    /// Same value as loss(); also fills the analytic gradient with respect to
    /// the flat parameter vector.
    double loss_and_gradient(const Eigen::MatrixXd& inputs,
                             const Eigen::MatrixXd& targets, double l2,
                             Eigen::VectorXd& grad) const;

    std::vector<double> training_trace; // clean train loss per epoch

private:
    std::vector<int> sizes_;                    // [input, hidden..., output]
    std::vector<Eigen::Index> weight_offsets_;  // per layer into params_
    std::vector<Eigen::Index> bias_offsets_;
    Eigen::VectorXd params_;

    Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
    Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
    int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }

    friend FfnnModel fit_ffnn(const WindowBatch&, const FfnnConfig&);
};

/// Trains on a MIMO window batch. Hidden sizes outside [3, input size] are
/// rejected. Throws FitError with the epoch index if the loss diverges.
FfnnModel fit_ffnn(const WindowBatch& batch, const FfnnConfig& config);

} // namespace simbench
