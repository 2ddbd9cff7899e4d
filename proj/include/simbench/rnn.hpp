#pragma once

#include "simbench/nn_common.hpp"
#include "simbench/preprocess.hpp"

#include <Eigen/Dense>

#include <vector>

namespace simbench {

/// One training series: its window inputs in temporal order and the matching
/// multi-output targets.
struct SeriesSequence {
    Eigen::MatrixXd inputs;  // steps x input_size
    Eigen::MatrixXd targets; // steps x horizon
};

struct RnnConfig {
    int cell_dim = 20;
    int num_layers = 1;
    double grad_clip_norm = 5.0;
    NnTrainingConfig train;
};

/// Stacked recurrent network of gated memory cells with peephole access to
/// the cell state, residual input additions from the second layer upward
/// (layer 1's input width differs from the cell dimension, so no addition is
/// possible there), and a final bias-free affine map from the cell dimension
/// to the forecast horizon. Hidden and cell state start at zero for every
/// series; training backpropagates through the full sequence.
class RnnModel {
public:
    RnnModel() = default;
    RnnModel(int input_size, int cell_dim, int num_layers, int horizon);

    int input_size() const { return input_size_; }
    int cell_dim() const { return cell_dim_; }
    int num_layers() const { return num_layers_; }
    int horizon() const { return horizon_; }

    Eigen::VectorXd& parameters() { return params_; }
    const Eigen::VectorXd& parameters() const { return params_; }

    /// Draws every parameter from N(0, init_std).
    void initialize(double init_std, Rng& rng);

    /// Network output at every step of one series (state starts at zero).
    Eigen::MatrixXd forward_sequence(const Eigen::MatrixXd& inputs) const;

    /// Output at the final step only — the prediction path feeds the training
    /// windows followed by the forecast window and reads this vector.
    Eigen::VectorXd forward_last(const Eigen::MatrixXd& inputs) const;

    /// Mean |output - target| over every step and horizon element of every
    /// sequence, plus (l2/2) * squared norm of the non-bias parameters.
    double loss(const std::vector<SeriesSequence>& sequences, double l2) const;

    /// Same value as loss(); fills the analytic gradient with respect to the
    /// flat parameter vector via backpropagation through time.
    double loss_and_gradient(const std::vector<SeriesSequence>& sequences,
                             double l2, Eigen::VectorXd& grad) const;

    std::vector<double> training_trace; // clean train loss per epoch

private:
    struct LayerOffsets {
        Eigen::Index w = 0; // gate input weights, 4d x in
        Eigen::Index u = 0; // gate recurrent weights, 4d x d
        Eigen::Index b = 0; // gate biases, 4d
        Eigen::Index p = 0; // peepholes, 3d (input, forget, output gates)
        int in = 0;
    };

    int input_size_ = 0;
    int cell_dim_ = 0;
    int num_layers_ = 0;
    int horizon_ = 0;
    std::vector<LayerOffsets> layers_;
    Eigen::Index d_offset_ = 0; // output map, horizon x cell_dim
    Eigen::VectorXd params_;

    /// Per-sequence MAE-part gradient: adds sign(error) * scale contributions
    /// into grad and returns the summed absolute error.
    double sequence_gradient(const Eigen::MatrixXd& inputs,
                             const Eigen::MatrixXd& targets, double scale,
                             Eigen::VectorXd& grad) const;

    /// Adds l2 * w for every non-bias parameter and returns the penalty term.
    double apply_l2(double l2, Eigen::VectorXd& grad) const;

    friend RnnModel fit_rnn(const std::vector<SeriesSequence>&, const RnnConfig&,
                            int);
};

/// Groups a MIMO window batch into per-series ordered sequences.
std::vector<SeriesSequence> sequences_from_batch(const WindowBatch& batch);

/// Trains on per-series sequences; `horizon` is the target width. Minibatches
/// group whole series; gradients are clipped at the configured global norm.
RnnModel fit_rnn(const std::vector<SeriesSequence>& sequences,
                 const RnnConfig& config, int horizon);

} // namespace simbench
