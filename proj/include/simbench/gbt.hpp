#pragma once

#include "simbench/preprocess.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace simbench {

/// Axis-aligned regression tree stored as a flat node array.
struct TreeNode {
    bool leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;  // node index, rows with feature value <= threshold
    int right = -1; // node index, rows with feature value > threshold
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes; // node 0 is the root
    double predict(const Eigen::RowVectorXd& row) const;
    bool single_leaf() const { return nodes.size() == 1; }
};

/// Boosted ensemble for one horizon step: base prediction plus scaled trees.
struct GbtStepEnsemble {
    double base = 0.0;
    std::vector<RegressionTree> trees;
    double predict(const Eigen::RowVectorXd& row, double learning_rate) const;
};

struct GbtConfig {
    double learning_rate = 0.075;
    int max_rounds = 1200;
    int early_stopping_rounds = 5;
    int max_depth = 6;
    int max_leaves = 31;
    int min_leaf_rows = 20;
    double validation_fraction = 0.3; // shuffled 7:3 train/validation split
    std::uint64_t seed = 1;
};

/// One boosted ensemble per horizon step, each trained on the absolute-error
/// objective: trees fit the sign of the residuals, leaf values are residual
/// medians, and training stops early when validation MAE fails to improve.
struct GbtModel {
    double learning_rate = 0.075;
    std::vector<GbtStepEnsemble> per_step;     // length = output size
    std::vector<int> rounds_used;              // trees kept per step
    std::vector<double> validation_mae;        // best validation MAE per step
    std::vector<std::vector<double>> train_mae_trace; // per step, per round

    Eigen::MatrixXd predict(const Eigen::MatrixXd& inputs) const;
};

GbtModel fit_gbt(const WindowBatch& batch, const GbtConfig& config);

} // namespace simbench
