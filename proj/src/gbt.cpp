#include "simbench/gbt.hpp"

#include "simbench/errors.hpp"
#include "simbench/nn_common.hpp"
#include "simbench/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace simbench {

double RegressionTree::predict(const Eigen::RowVectorXd& row) const {
    int node = 0;
    while (!nodes[static_cast<std::size_t>(node)].leaf) {
        const TreeNode& n = nodes[static_cast<std::size_t>(node)];
        node = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(node)].value;
}

double GbtStepEnsemble::predict(const Eigen::RowVectorXd& row,
                                double learning_rate) const {
    double value = base;
    for (const RegressionTree& tree : trees) {
        value += learning_rate * tree.predict(row);
    }
    return value;
}

namespace {

double median_of(std::vector<double> values) {
    if (values.empty()) {
        throw InternalError("median of an empty set");
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<long>(mid),
                     values.end());
    double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    std::nth_element(values.begin(), values.begin() + static_cast<long>(mid) - 1,
                     values.end());
    return (values[mid - 1] + upper) / 2.0;
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

/// Best variance-reduction split of `rows` on the gradient targets: maximizes
/// S_L^2/n_L + S_R^2/n_R - S^2/n with both sides >= min_leaf_rows.
SplitChoice best_split(const Eigen::MatrixXd& inputs,
                       const std::vector<double>& gradient,
                       const std::vector<int>& rows, int min_leaf_rows) {
    SplitChoice choice;
    const int n = static_cast<int>(rows.size());
    if (n < 2 * min_leaf_rows) {
        return choice;
    }
    double total = 0.0;
    for (int r : rows) total += gradient[static_cast<std::size_t>(r)];
    const double parent_score = total * total / static_cast<double>(n);

    std::vector<int> order(rows);
    for (int feature = 0; feature < inputs.cols(); ++feature) {
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return inputs(a, feature) < inputs(b, feature);
        });
        double left_sum = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            left_sum += gradient[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
            const int left_count = i + 1;
            const int right_count = n - left_count;
            if (left_count < min_leaf_rows) continue;
            if (right_count < min_leaf_rows) break;
            const double lo = inputs(order[static_cast<std::size_t>(i)], feature);
            const double hi = inputs(order[static_cast<std::size_t>(i) + 1], feature);
            if (!(lo < hi)) continue; // cannot separate equal values
            const double right_sum = total - left_sum;
            const double gain = left_sum * left_sum / left_count +
                                right_sum * right_sum / right_count - parent_score;
            if (gain > choice.gain) {
                choice.found = true;
                choice.feature = feature;
                choice.threshold = (lo + hi) / 2.0;
                choice.gain = gain;
            }
        }
    }
    return choice;
}

struct OpenLeaf {
    int node_index = 0;
    int depth = 0;
    std::vector<int> rows;
    SplitChoice split;
};

/// Grows a tree best-first on the sign-of-residual targets, then sets each
/// leaf to the median residual of its rows.
RegressionTree grow_tree(const Eigen::MatrixXd& inputs,
                         const std::vector<double>& residuals,
                         const std::vector<double>& gradient,
                         const std::vector<int>& rows, const GbtConfig& config) {
    RegressionTree tree;
    tree.nodes.emplace_back();

    auto leaf_cmp = [](const OpenLeaf& a, const OpenLeaf& b) {
        if (a.split.gain != b.split.gain) return a.split.gain < b.split.gain;
        return a.node_index > b.node_index; // deterministic tie-break
    };
    std::priority_queue<OpenLeaf, std::vector<OpenLeaf>, decltype(leaf_cmp)>
        open(leaf_cmp);

    OpenLeaf root;
    root.node_index = 0;
    root.depth = 0;
    root.rows = rows;
    root.split = best_split(inputs, gradient, root.rows, config.min_leaf_rows);

    int leaves = 1;
    std::vector<std::pair<int, std::vector<int>>> leaf_rows;
    if (root.split.found) {
        open.push(std::move(root));
    } else {
        leaf_rows.emplace_back(0, root.rows);
    }

    while (!open.empty() && leaves < config.max_leaves) {
        OpenLeaf leaf = open.top();
        open.pop();
        TreeNode& node = tree.nodes[static_cast<std::size_t>(leaf.node_index)];
        node.leaf = false;
        node.feature = leaf.split.feature;
        node.threshold = leaf.split.threshold;
        node.left = static_cast<int>(tree.nodes.size());
        node.right = node.left + 1;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        ++leaves;

        std::vector<int> left_rows;
        std::vector<int> right_rows;
        for (int r : leaf.rows) {
            if (inputs(r, leaf.split.feature) <= leaf.split.threshold) {
                left_rows.push_back(r);
            } else {
                right_rows.push_back(r);
            }
        }
        const int left_index = tree.nodes[static_cast<std::size_t>(leaf.node_index)].left;
        const int right_index = tree.nodes[static_cast<std::size_t>(leaf.node_index)].right;
        const int child_depth = leaf.depth + 1;
        auto enqueue = [&](int node_index, std::vector<int>&& child_rows) {
            OpenLeaf child;
            child.node_index = node_index;
            child.depth = child_depth;
            child.rows = std::move(child_rows);
            if (child_depth < config.max_depth) {
                child.split =
                    best_split(inputs, gradient, child.rows, config.min_leaf_rows);
            }
            if (child.split.found) {
                open.push(std::move(child));
            } else {
                leaf_rows.emplace_back(node_index, std::move(child.rows));
            }
        };
        enqueue(left_index, std::move(left_rows));
        enqueue(right_index, std::move(right_rows));
    }
    while (!open.empty()) {
        leaf_rows.emplace_back(open.top().node_index, open.top().rows);
        open.pop();
    }

    for (auto& [node_index, members] : leaf_rows) {
        std::vector<double> leaf_residuals;
        leaf_residuals.reserve(members.size());
        for (int r : members) {
            leaf_residuals.push_back(residuals[static_cast<std::size_t>(r)]);
        }
        tree.nodes[static_cast<std::size_t>(node_index)].value =
            leaf_residuals.empty() ? 0.0 : median_of(std::move(leaf_residuals));
    }
    return tree;
}

} // namespace

GbtModel fit_gbt(const WindowBatch& batch, const GbtConfig& config) {
    const Eigen::Index rows = batch.inputs.rows();
    if (rows < 10) {
        throw ParameterError("boosted-tree training needs at least 10 windows, got " +
                             std::to_string(rows));
    }
    if (config.learning_rate <= 0.0 || config.max_rounds < 1 ||
        config.early_stopping_rounds < 1) {
        throw ParameterError("invalid boosting configuration");
    }

    // One shuffled train/validation partition shared by every horizon step.
    std::vector<int> shuffled(static_cast<std::size_t>(rows));
    std::iota(shuffled.begin(), shuffled.end(), 0);
    Rng rng(config.seed);
    shuffle_in_place(shuffled, rng);
    const int val_count = std::max<int>(
        1, static_cast<int>(std::lround(config.validation_fraction *
                                        static_cast<double>(rows))));
    const std::vector<int> val_rows(shuffled.begin(), shuffled.begin() + val_count);
    const std::vector<int> train_rows(shuffled.begin() + val_count, shuffled.end());
    if (train_rows.empty()) {
        throw ParameterError("training split is empty");
    }

    const int horizon = static_cast<int>(batch.targets.cols());
    GbtModel model;
    model.learning_rate = config.learning_rate;
    model.per_step.resize(static_cast<std::size_t>(horizon));
    model.rounds_used.resize(static_cast<std::size_t>(horizon), 0);
    model.validation_mae.resize(static_cast<std::size_t>(horizon), 0.0);
    model.train_mae_trace.resize(static_cast<std::size_t>(horizon));

    std::vector<double> residual(static_cast<std::size_t>(rows), 0.0);
    std::vector<double> gradient(static_cast<std::size_t>(rows), 0.0);
    std::vector<double> prediction(static_cast<std::size_t>(rows), 0.0);

    for (int step = 0; step < horizon; ++step) {
        GbtStepEnsemble& ensemble = model.per_step[static_cast<std::size_t>(step)];
        const Eigen::VectorXd y = batch.targets.col(step);

        std::vector<double> train_targets;
        train_targets.reserve(train_rows.size());
        for (int r : train_rows) train_targets.push_back(y[r]);
        ensemble.base = median_of(train_targets);
        std::fill(prediction.begin(), prediction.end(), ensemble.base);

        double best_val = std::numeric_limits<double>::infinity();
        int best_round = 0;
        int stall = 0;
        for (int round = 1; round <= config.max_rounds; ++round) {
            for (int r : train_rows) {
                residual[static_cast<std::size_t>(r)] =
                    y[r] - prediction[static_cast<std::size_t>(r)];
                const double res = residual[static_cast<std::size_t>(r)];
                gradient[static_cast<std::size_t>(r)] =
                    res > 0.0 ? 1.0 : (res < 0.0 ? -1.0 : 0.0);
            }
            RegressionTree tree =
                grow_tree(batch.inputs, residual, gradient, train_rows, config);

            double train_abs = 0.0;
            for (int r : train_rows) {
                prediction[static_cast<std::size_t>(r)] +=
                    config.learning_rate * tree.predict(batch.inputs.row(r));
                train_abs += std::abs(y[r] - prediction[static_cast<std::size_t>(r)]);
            }
            double val_abs = 0.0;
            for (int r : val_rows) {
                prediction[static_cast<std::size_t>(r)] +=
                    config.learning_rate * tree.predict(batch.inputs.row(r));
                val_abs += std::abs(y[r] - prediction[static_cast<std::size_t>(r)]);
            }
            ensemble.trees.push_back(std::move(tree));
            model.train_mae_trace[static_cast<std::size_t>(step)].push_back(
                train_abs / static_cast<double>(train_rows.size()));

            const double val_mae = val_abs / static_cast<double>(val_rows.size());
            if (val_mae < best_val) {
                best_val = val_mae;
                best_round = round;
                stall = 0;
            } else if (++stall >= config.early_stopping_rounds) {
                break;
            }
        }
        ensemble.trees.resize(static_cast<std::size_t>(best_round));
        model.rounds_used[static_cast<std::size_t>(step)] = best_round;
        model.validation_mae[static_cast<std::size_t>(step)] = best_val;
    }
    return model;
}

Eigen::MatrixXd GbtModel::predict(const Eigen::MatrixXd& inputs) const {
    Eigen::MatrixXd out(inputs.rows(), static_cast<Eigen::Index>(per_step.size()));
    for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
        for (std::size_t h = 0; h < per_step.size(); ++h) {
            out(r, static_cast<Eigen::Index>(h)) =
                per_step[h].predict(inputs.row(r), learning_rate);
        }
    }
    return out;
}

} // namespace simbench
