#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "simbench/errors.hpp"
#include "simbench/ffnn.hpp"
#include "simbench/gbt.hpp"
#include "simbench/rnn.hpp"
#include "simbench/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

using namespace simbench;

namespace {

/// Central finite differences over every coordinate of `params`; returns the
/// worst relative disagreement with the analytic gradient. The denominator is
/// floored well above the finite-difference noise floor so near-zero
/// coordinates do not produce spurious ratios.
template <typename LossFn>
double worst_gradient_error(Eigen::VectorXd& params, const Eigen::VectorXd& analytic,
                            LossFn&& loss_at) {
    const double h = 1e-5;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + h;
        const double up = loss_at();
        params[i] = saved - h;
        const double down = loss_at();
        params[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double denom = std::max(1e-6, std::abs(fd) + std::abs(analytic[i]));
        worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
    }
    return worst;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = rng.normal();
        }
    }
    return m;
}

/// Window batch whose targets are a fixed function of the single input used.
WindowBatch function_batch(int rows, int window_size, int output_size, Rng& rng) {
    WindowBatch batch;
    batch.window_size = window_size;
    batch.output_size = output_size;
    batch.inputs = random_matrix(rows, window_size, rng);
    batch.targets.resize(rows, output_size);
    for (int r = 0; r < rows; ++r) {
        const double s = batch.inputs.row(r).sum();
        for (int h = 0; h < output_size; ++h) {
            batch.targets(r, h) = 0.5 * s + 0.1 * static_cast<double>(h + 1);
        }
        batch.series_index.push_back(r % 2);
        batch.window_index.push_back(r / 2);
    }
    return batch;
}

} // namespace

TEST_CASE("feed-forward analytic gradient matches central finite differences") {
    FfnnModel model(4, {4, 3}, 2);
    Rng rng(2024);
    model.initialize(0.3, rng);

    const Eigen::MatrixXd inputs = random_matrix(5, 4, rng);
    const Eigen::MatrixXd targets = random_matrix(5, 2, rng);
    const double l2 = 0.001;

    Eigen::VectorXd analytic;
    const double value = model.loss_and_gradient(inputs, targets, l2, analytic);
    CHECK(value == doctest::Approx(model.loss(inputs, targets, l2)).epsilon(1e-12));
    REQUIRE(analytic.size() == model.parameters().size());

    const double worst = worst_gradient_error(
        model.parameters(), analytic,
        [&]() { return model.loss(inputs, targets, l2); });
    CHECK(worst < 1e-4);
}

TEST_CASE("recurrent analytic gradient matches central finite differences") {
    RnnModel model(3, 4, 2, 2);
    Rng rng(4096);
    model.initialize(0.3, rng);

    std::vector<SeriesSequence> sequences(2);
    sequences[0].inputs = random_matrix(3, 3, rng);
    sequences[0].targets = random_matrix(3, 2, rng);
    sequences[1].inputs = random_matrix(4, 3, rng);
    sequences[1].targets = random_matrix(4, 2, rng);
    const double l2 = 0.001;

    Eigen::VectorXd analytic;
    const double value = model.loss_and_gradient(sequences, l2, analytic);
    CHECK(value == doctest::Approx(model.loss(sequences, l2)).epsilon(1e-12));
    REQUIRE(analytic.size() == model.parameters().size());

    const double worst = worst_gradient_error(model.parameters(), analytic,
                                              [&]() { return model.loss(sequences, l2); });
    CHECK(worst < 1e-4);
}

TEST_CASE("recurrent final-step output equals the last row of the full pass") {
    RnnModel model(3, 5, 2, 4);
    Rng rng(7);
    model.initialize(0.2, rng);
    const Eigen::MatrixXd inputs = random_matrix(6, 3, rng);
    const Eigen::MatrixXd all_steps = model.forward_sequence(inputs);
    const Eigen::VectorXd last = model.forward_last(inputs);
    REQUIRE(all_steps.rows() == 6);
    REQUIRE(all_steps.cols() == 4);
    CHECK(all_steps.row(5).transpose() == last);
}

TEST_CASE("feed-forward training reduces the loss on a learnable target") {
    Rng rng(31);
    const WindowBatch batch = function_batch(60, 4, 2, rng);
    FfnnConfig config;
    config.hidden_sizes = {4};
    config.train.epochs = 40;
    config.train.minibatch = 60;
    config.train.learning_rate = 0.02;
    config.train.init_std = 0.05;
    config.train.seed = 3;

    const FfnnModel model = fit_ffnn(batch, config);
    REQUIRE(model.training_trace.size() == 40);
    CHECK(model.training_trace.back() < 0.7 * model.training_trace.front());

    const Eigen::MatrixXd out = model.predict(batch.inputs);
    CHECK(out.rows() == 60);
    CHECK(out.cols() == 2);
}

TEST_CASE("feed-forward training validates architecture and schedule") {
    Rng rng(32);
    const WindowBatch batch = function_batch(30, 4, 1, rng);
    FfnnConfig config;
    config.hidden_sizes = {2}; // below the minimum width
    CHECK_THROWS_AS(fit_ffnn(batch, config), ParameterError);
    config.hidden_sizes = {5}; // wider than the input
    CHECK_THROWS_AS(fit_ffnn(batch, config), ParameterError);
    config.hidden_sizes = {};
    CHECK_THROWS_AS(fit_ffnn(batch, config), ParameterError);
    config.hidden_sizes = {4};
    config.train.epochs = 0;
    CHECK_THROWS_AS(fit_ffnn(batch, config), ParameterError);
}

TEST_CASE("window batches group into per-series ordered sequences") {
    WindowBatch batch;
    batch.window_size = 2;
    batch.output_size = 1;
    batch.inputs.resize(4, 2);
    batch.inputs << 1, 2, 9, 8, 3, 4, 5, 6;
    batch.targets.resize(4, 1);
    batch.targets << 10, 90, 20, 30;
    // Series 0 rows arrive out of temporal order; series 1 has one window.
    batch.series_index = {0, 1, 0, 0};
    batch.window_index = {0, 0, 2, 1};

    const std::vector<SeriesSequence> sequences = sequences_from_batch(batch);
    REQUIRE(sequences.size() == 2);
    REQUIRE(sequences[0].inputs.rows() == 3);
    CHECK(sequences[0].inputs(0, 0) == 1);
    CHECK(sequences[0].inputs(1, 0) == 5); // window_index 1 sorts second
    CHECK(sequences[0].inputs(2, 0) == 3);
    CHECK(sequences[0].targets(1, 0) == 30);
    REQUIRE(sequences[1].inputs.rows() == 1);
    CHECK(sequences[1].inputs(0, 0) == 9);
    CHECK(sequences[1].targets(0, 0) == 90);

    WindowBatch empty;
    CHECK_THROWS_AS(sequences_from_batch(empty), DataError);
}

TEST_CASE("recurrent training reduces the loss on a learnable target") {
    Rng rng(33);
    const WindowBatch batch = function_batch(40, 3, 2, rng);
    const std::vector<SeriesSequence> sequences = sequences_from_batch(batch);
    REQUIRE(sequences.size() == 2);

    RnnConfig config;
    config.cell_dim = 6;
    config.num_layers = 1;
    config.train.epochs = 15;
    config.train.minibatch = 1;
    config.train.learning_rate = 0.02;
    config.train.init_std = 0.1;
    config.train.seed = 5;

    const RnnModel model = fit_rnn(sequences, config, 2);
    REQUIRE(model.training_trace.size() == 15);
    CHECK(model.training_trace.back() < model.training_trace.front());
    CHECK(model.horizon() == 2);
    CHECK(model.forward_last(sequences[0].inputs).size() == 2);
}

TEST_CASE("recurrent training validates its inputs") {
    CHECK_THROWS_AS(fit_rnn({}, RnnConfig{}, 2), DataError);

    Rng rng(34);
    std::vector<SeriesSequence> mismatched(2);
    mismatched[0].inputs = random_matrix(3, 3, rng);
    mismatched[0].targets = random_matrix(3, 2, rng);
    mismatched[1].inputs = random_matrix(3, 4, rng); // different input width
    mismatched[1].targets = random_matrix(3, 2, rng);
    CHECK_THROWS_AS(fit_rnn(mismatched, RnnConfig{}, 2), ParameterError);

    std::vector<SeriesSequence> wrong_horizon(1);
    wrong_horizon[0].inputs = random_matrix(3, 3, rng);
    wrong_horizon[0].targets = random_matrix(3, 2, rng);
    CHECK_THROWS_AS(fit_rnn(wrong_horizon, RnnConfig{}, 5), ParameterError);
}

TEST_CASE("boosted trees on a constant target reduce to the base prediction") {
    Rng rng(35);
    WindowBatch batch = function_batch(40, 3, 1, rng);
    batch.targets.setConstant(4.2);

    GbtConfig config;
    config.seed = 9;
    const GbtModel model = fit_gbt(batch, config);

    REQUIRE(model.per_step.size() == 1);
    CHECK(model.per_step[0].base == 4.2);
    CHECK(model.rounds_used[0] == 1);
    CHECK(model.validation_mae[0] == 0.0);
    REQUIRE(model.per_step[0].trees.size() == 1);
    CHECK(model.per_step[0].trees[0].single_leaf());
    CHECK(model.per_step[0].trees[0].nodes[0].value == 0.0);

    const Eigen::MatrixXd out = model.predict(batch.inputs);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        CHECK(out(r, 0) == 4.2);
    }
}

TEST_CASE("boosted trees learn a sharp step function") {
    Rng rng(36);
    WindowBatch batch;
    batch.window_size = 1;
    batch.output_size = 1;
    batch.inputs.resize(300, 1);
    batch.targets.resize(300, 1);
    for (int r = 0; r < 300; ++r) {
        const double x = rng.uniform(0.0, 1.0);
        batch.inputs(r, 0) = x;
        batch.targets(r, 0) = x <= 0.5 ? 1.0 : 5.0;
        batch.series_index.push_back(0);
        batch.window_index.push_back(r);
    }

    GbtConfig config;
    config.learning_rate = 0.3;
    config.max_rounds = 200;
    config.early_stopping_rounds = 10;
    config.max_depth = 3;
    config.max_leaves = 7;
    config.min_leaf_rows = 10;
    config.seed = 4;
    const GbtModel model = fit_gbt(batch, config);

    Eigen::RowVectorXd low(1);
    low << 0.25;
    Eigen::RowVectorXd high(1);
    high << 0.75;
    CHECK(std::abs(model.per_step[0].predict(low, model.learning_rate) - 1.0) < 0.1);
    CHECK(std::abs(model.per_step[0].predict(high, model.learning_rate) - 5.0) < 0.1);

    const std::vector<double>& trace = model.train_mae_trace[0];
    REQUIRE_FALSE(trace.empty());
    CHECK(trace.back() < trace.front());
    CHECK(model.rounds_used[0] <= config.max_rounds);
    CHECK(static_cast<std::size_t>(model.rounds_used[0]) <= trace.size());
}

TEST_CASE("boosted trees train one ensemble per horizon step") {
    Rng rng(37);
    const WindowBatch batch = function_batch(80, 3, 4, rng);
    GbtConfig config;
    config.max_rounds = 60;
    config.min_leaf_rows = 5;
    const GbtModel model = fit_gbt(batch, config);

    REQUIRE(model.per_step.size() == 4);
    REQUIRE(model.rounds_used.size() == 4);
    REQUIRE(model.validation_mae.size() == 4);
    REQUIRE(model.train_mae_trace.size() == 4);
    for (std::size_t s = 0; s < 4; ++s) {
        CHECK(model.rounds_used[s] >= 1);
        CHECK(model.rounds_used[s] <= 60);
        CHECK(std::isfinite(model.validation_mae[s]));
        CHECK(model.per_step[s].trees.size() ==
              static_cast<std::size_t>(model.rounds_used[s]));
    }
    const Eigen::MatrixXd out = model.predict(batch.inputs);
    CHECK(out.rows() == 80);
    CHECK(out.cols() == 4);
}

TEST_CASE("boosted-tree training is bit-reproducible for a fixed seed") {
    Rng rng(38);
    const WindowBatch batch = function_batch(60, 3, 2, rng);
    GbtConfig config;
    config.max_rounds = 40;
    config.min_leaf_rows = 5;
    config.seed = 11;
    const GbtModel first = fit_gbt(batch, config);
    const GbtModel second = fit_gbt(batch, config);
    CHECK(first.predict(batch.inputs) == second.predict(batch.inputs));
    CHECK(first.rounds_used == second.rounds_used);
    CHECK(first.validation_mae == second.validation_mae);
}

TEST_CASE("boosted-tree training validates rows and configuration") {
    Rng rng(39);
    const WindowBatch tiny = function_batch(8, 2, 1, rng);
    CHECK_THROWS_AS(fit_gbt(tiny, GbtConfig{}), ParameterError);

    const WindowBatch batch = function_batch(40, 2, 1, rng);
    GbtConfig bad;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(fit_gbt(batch, bad), ParameterError);
    bad = GbtConfig{};
    bad.max_rounds = 0;
    CHECK_THROWS_AS(fit_gbt(batch, bad), ParameterError);
    bad = GbtConfig{};
    bad.early_stopping_rounds = 0;
    CHECK_THROWS_AS(fit_gbt(batch, bad), ParameterError);
}
