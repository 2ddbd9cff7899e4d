#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "simbench/errors.hpp"
#include "simbench/local_models.hpp"
#include "simbench/model_zoo.hpp"
#include "simbench/pooled.hpp"
#include "simbench/preprocess.hpp"
#include "simbench/rng.hpp"
#include "simbench/scenario.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <variant>
#include <vector>

using namespace simbench;

namespace {

ScenarioSpec ar_spec(ScenarioKind kind, int length, int num_series, int horizon) {
    ScenarioSpec spec;
    spec.name = "pooled-test";
    spec.dgp = DgpKind::Ar;
    spec.scenario = kind;
    spec.series_length = length;
    spec.num_series = num_series;
    spec.horizon = horizon;
    spec.num_replicates = 1;
    spec.base_seed = 77;
    spec.ar_order = 3;
    return spec;
}

PipelineConfig linear_one_step(int window_size) {
    PipelineConfig config;
    config.scale = false;
    config.log = false;
    config.normalize_windows = false;
    config.window_size = window_size;
    config.one_step = true;
    return config;
}

/// Noise-free linear windows with a known oldest-first coefficient layout.
WindowBatch synthetic_batch(int rows, double intercept, const std::vector<double>& theta,
                            Rng& rng) {
    WindowBatch batch;
    const int m = static_cast<int>(theta.size());
    batch.window_size = m;
    batch.output_size = 1;
    batch.inputs.resize(rows, m);
    batch.targets.resize(rows, 1);
    for (int r = 0; r < rows; ++r) {
        double target = intercept;
        for (int c = 0; c < m; ++c) {
            batch.inputs(r, c) = rng.normal();
            target += theta[static_cast<std::size_t>(c)] * batch.inputs(r, c);
        }
        batch.targets(r, 0) = target;
        batch.series_index.push_back(0);
        batch.window_index.push_back(r);
    }
    return batch;
}

} // namespace

TEST_CASE("pooled one-step fit on a single series matches the direct lag fit") {
    const ScenarioSpec spec = ar_spec(ScenarioKind::Single, 300, 1, 3);
    const SeriesDataset dataset = build_ss(spec, 0);
    const PreparedData prepared = prepare(dataset, linear_one_step(3));

    const FittedAr pooled = fit_pooled_regression(prepared.batch).as_ar();
    const TrainTestView view = train_test_view(dataset.series[0], 3);
    const FittedAr direct = fit_ar(view.train, 3);

    REQUIRE(pooled.order() == 3);
    CHECK(std::abs(pooled.intercept - direct.intercept) < 1e-9);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::abs(pooled.phi[k] - direct.phi[k]) < 1e-9);
    }
    CHECK(pooled.total_sse == doctest::Approx(direct.total_sse).epsilon(1e-9));
}

TEST_CASE("pooled coefficients are stored oldest-first and invert to lag order") {
    Rng rng(123);
    const WindowBatch batch = synthetic_batch(60, 0.7, {1.0, 2.0, 3.0}, rng);
    const PooledRegressionModel model = fit_pooled_regression(batch);

    REQUIRE(model.window_size == 3);
    CHECK(model.intercept == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(model.theta[0] == doctest::Approx(1.0).epsilon(1e-9)); // oldest cell
    CHECK(model.theta[1] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(model.theta[2] == doctest::Approx(3.0).epsilon(1e-9)); // newest cell
    CHECK(model.total_sse < 1e-12);

    const FittedAr as_lags = model.as_ar();
    CHECK(as_lags.phi[0] == doctest::Approx(3.0).epsilon(1e-9)); // lag 1
    CHECK(as_lags.phi[1] == doctest::Approx(2.0).epsilon(1e-9)); // lag 2
    CHECK(as_lags.phi[2] == doctest::Approx(1.0).epsilon(1e-9)); // lag 3
    CHECK(as_lags.lag_stride == 1);

    // One recursive step over a window reproduces the window's dot product.
    const std::vector<double> tail{0.5, -1.0, 2.0}; // oldest first
    const std::vector<double> step = forecast_recursive(as_lags, tail, 1);
    CHECK(step[0] == doctest::Approx(0.7 + 1.0 * 0.5 + 2.0 * -1.0 + 3.0 * 2.0).epsilon(1e-9));
}

TEST_CASE("pooling across homogeneous series recovers the shared recursion") {
    const ScenarioSpec spec = ar_spec(ScenarioKind::MultiHomLong, 200, 8, 3);
    const SeriesDataset dataset = build_ms_hom_long(spec, 0);
    // The production pooled-regression pipeline: per-series mean scaling is
    // what makes pooling valid — without it the between-series level
    // differences bias the shared lag weights toward a sum of one.
    const PreparedData prepared =
        prepare(dataset, pipeline_for(parse_model_spec("pr:3"), spec.horizon));

    // Every training sequence contributes its windows to one design matrix.
    const int per_series = (200 - 3) - 3 - 1 + 1;
    CHECK(prepared.batch.rows() == 8 * per_series);

    const std::vector<double>& truth =
        std::get<ArCoefficients>(dataset.series[0].params).phi;
    const FittedAr pooled = fit_pooled_regression(prepared.batch).as_ar();
    for (std::size_t k = 0; k < truth.size(); ++k) {
        CHECK(std::abs(pooled.phi[k] - truth[k]) < 0.1);
    }

    // The same pool without the scaling stage drifts away from the truth —
    // the reason the stage exists.
    const PreparedData unscaled = prepare(dataset, linear_one_step(3));
    const FittedAr biased = fit_pooled_regression(unscaled.batch).as_ar();
    double drift = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        drift = std::max(drift, std::abs(biased.phi[k] - truth[k]));
    }
    CHECK(drift > 0.1);
}

TEST_CASE("pooled fit rejects multi-step batches and starved designs") {
    Rng rng(5);
    WindowBatch multi = synthetic_batch(40, 0.0, {0.5, 0.5}, rng);
    multi.output_size = 2;
    CHECK_THROWS_AS(fit_pooled_regression(multi), ParameterError);

    const WindowBatch starved = synthetic_batch(3, 0.0, {0.5, 0.5}, rng);
    CHECK_THROWS_AS(fit_pooled_regression(starved), ParameterError);
}

TEST_CASE("group one-hot block widens the pooled design per series label") {
    Rng rng(9);
    WindowBatch batch = synthetic_batch(4, 0.0, {1.0, 1.0}, rng);
    batch.series_index = {0, 1, 2, 0};
    const Eigen::MatrixXd original_inputs = batch.inputs;
    const Eigen::MatrixXd original_targets = batch.targets;

    const std::vector<int> labels{0, 1, 2};
    append_group_feature(batch, labels, 3);

    REQUIRE(batch.inputs.cols() == 5);
    CHECK(batch.inputs.leftCols(2) == original_inputs);
    CHECK(batch.targets == original_targets);
    const std::vector<std::vector<double>> expected_onehot{
        {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 0}};
    for (int r = 0; r < 4; ++r) {
        for (int g = 0; g < 3; ++g) {
            CHECK(batch.inputs(r, 2 + g) == expected_onehot[r][g]);
            CHECK(batch.group_onehot(r, g) == expected_onehot[r][g]);
        }
    }
}

TEST_CASE("group one-hot block validates labels and coverage") {
    Rng rng(11);
    WindowBatch batch = synthetic_batch(3, 0.0, {1.0}, rng);
    batch.series_index = {0, 1, 2};
    CHECK_THROWS_AS(append_group_feature(batch, {0, 3, 1}, 3), ParameterError);
    CHECK_THROWS_AS(append_group_feature(batch, {0, 1}, 3), ParameterError);
    CHECK_THROWS_AS(append_group_feature(batch, {0, 1, 2}, 0), ParameterError);
}

TEST_CASE("group one-hot row extension places a single indicator") {
    Eigen::RowVectorXd row(2);
    row << 1.0, 2.0;
    const Eigen::RowVectorXd widened = append_group_feature_row(row, 1, 3);
    REQUIRE(widened.size() == 5);
    CHECK(widened[0] == 1.0);
    CHECK(widened[1] == 2.0);
    CHECK(widened[2] == 0.0);
    CHECK(widened[3] == 1.0);
    CHECK(widened[4] == 0.0);

    const Eigen::RowVectorXd first = append_group_feature_row(row, 0, 2);
    CHECK(first[2] == 1.0);
    CHECK(first[3] == 0.0);

    CHECK_THROWS_AS(append_group_feature_row(row, 3, 3), ParameterError);
    CHECK_THROWS_AS(append_group_feature_row(row, -1, 3), ParameterError);
    CHECK_THROWS_AS(append_group_feature_row(row, 0, 0), ParameterError);
}

TEST_CASE("ensemble median is elementwise and shape-checked") {
    Eigen::MatrixXd base(2, 2);
    base << 1.0, 2.0, 3.0, 4.0;

    SUBCASE("odd member count picks the middle value") {
        const Eigen::MatrixXd median = ensemble_median({base * 3.0, base, base * 2.0});
        CHECK(median == base * 2.0);
    }
    SUBCASE("even member count averages the two middle values") {
        const Eigen::MatrixXd median =
            ensemble_median({base * 10.0, base * 2.0, base, base * 3.0});
        CHECK(median == base * 2.5);
    }
    SUBCASE("a single member passes through unchanged") {
        CHECK(ensemble_median({base}) == base);
    }
    SUBCASE("one outlier member cannot move the median") {
        Eigen::MatrixXd outlier = base;
        outlier(0, 0) = 1e9;
        const Eigen::MatrixXd median = ensemble_median({base, outlier, base});
        CHECK(median == base);
    }
    SUBCASE("degenerate inputs are rejected") {
        CHECK_THROWS_AS(ensemble_median({}), ParameterError);
        Eigen::MatrixXd other(2, 3);
        other.setZero();
        CHECK_THROWS_AS(ensemble_median({base, other}), ParameterError);
    }
}
