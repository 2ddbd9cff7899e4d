#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "simbench/errors.hpp"
#include "simbench/model_zoo.hpp"
#include "simbench/scenario.hpp"
#include "simbench/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

using namespace simbench;

namespace {

ScenarioSpec small_spec(DgpKind dgp, ScenarioKind kind, int length, int num_series,
                        int horizon) {
    ScenarioSpec spec;
    spec.name = "zoo-test";
    spec.dgp = dgp;
    spec.scenario = kind;
    spec.series_length = length;
    spec.num_series = num_series;
    spec.horizon = horizon;
    spec.num_replicates = 1;
    spec.base_seed = 4711;
    spec.ar_order = 3;
    return spec;
}

GlobalModelSettings tiny_settings() {
    GlobalModelSettings settings;
    settings.ffnn.hidden_sizes = {3};
    settings.ffnn.train.epochs = 2;
    settings.ffnn.train.minibatch = 32;
    settings.rnn.cell_dim = 5;
    settings.rnn.train.epochs = 2;
    settings.rnn.train.minibatch = 2;
    settings.gbt.max_rounds = 10;
    settings.gbt.min_leaf_rows = 10;
    return settings;
}

} // namespace

TEST_CASE("model ids parse and print consistently") {
    const ModelSpec ar = parse_model_spec("ar:3");
    CHECK(ar.kind == ModelKind::Ar);
    CHECK(ar.order == 3);
    CHECK(ar.id() == "ar:3");

    const ModelSpec sar_default = parse_model_spec("sar");
    CHECK(sar_default.kind == ModelKind::Sar);
    CHECK(sar_default.order == 1);
    CHECK(sar_default.id() == "sar:1");

    const ModelSpec setar = parse_model_spec("setar");
    CHECK(setar.kind == ModelKind::Setar);
    CHECK(setar.id() == "setar");

    CHECK(parse_model_spec("pr:10").kind == ModelKind::PooledRegression);
    CHECK(parse_model_spec("ffnn:15").order == 15);
    CHECK(parse_model_spec("gbt:3").kind == ModelKind::Gbt);
    CHECK(parse_model_spec("rnn:12").id() == "rnn:12");

    CHECK_THROWS_AS(parse_model_spec("ar:0"), ParameterError);
    CHECK_THROWS_AS(parse_model_spec("ar"), ParameterError);
    CHECK_THROWS_AS(parse_model_spec("ar:x"), ParameterError);
    CHECK_THROWS_AS(parse_model_spec("setar:2"), ParameterError);
    CHECK_THROWS_AS(parse_model_spec("bogus:3"), ParameterError);
    CHECK_THROWS_AS(parse_model_spec(""), ParameterError);
}

TEST_CASE("model family traits drive pooling, tuning, and ensembling") {
    CHECK_FALSE(model_is_global(ModelKind::Ar));
    CHECK_FALSE(model_is_global(ModelKind::Sar));
    CHECK_FALSE(model_is_global(ModelKind::Setar));
    CHECK(model_is_global(ModelKind::PooledRegression));
    CHECK(model_is_global(ModelKind::Ffnn));
    CHECK(model_is_global(ModelKind::Gbt));
    CHECK(model_is_global(ModelKind::Rnn));

    CHECK(model_is_tunable(ModelKind::Ffnn));
    CHECK(model_is_tunable(ModelKind::Rnn));
    CHECK_FALSE(model_is_tunable(ModelKind::Gbt));
    CHECK_FALSE(model_is_tunable(ModelKind::Ar));

    CHECK(model_uses_ensemble(ModelKind::Ffnn));
    CHECK(model_uses_ensemble(ModelKind::Rnn));
    CHECK_FALSE(model_uses_ensemble(ModelKind::Gbt));
    CHECK_FALSE(model_uses_ensemble(ModelKind::PooledRegression));
}

TEST_CASE("each model family runs its own preprocessing stages") {
    const PipelineConfig pooled = pipeline_for(parse_model_spec("pr:5"), 3);
    CHECK(pooled.scale);
    CHECK_FALSE(pooled.log);
    CHECK_FALSE(pooled.normalize_windows);
    CHECK(pooled.one_step);
    CHECK(pooled.window_size == 5);

    for (const char* id : {"ffnn:7", "gbt:7", "rnn:7"}) {
        const PipelineConfig nonlinear = pipeline_for(parse_model_spec(id), 3);
        CHECK(nonlinear.scale);
        CHECK(nonlinear.log);
        CHECK(nonlinear.normalize_windows);
        CHECK_FALSE(nonlinear.one_step);
        CHECK(nonlinear.window_size == 7);
    }

    for (const char* id : {"ar:4", "sar:1", "setar"}) {
        const PipelineConfig local = pipeline_for(parse_model_spec(id), 3);
        CHECK_FALSE(local.scale);
        CHECK_FALSE(local.log);
        CHECK_FALSE(local.normalize_windows);
    }
}

TEST_CASE("default search ranges depend on the dataset shape") {
    const HyperRanges rnn_many_long = default_rnn_ranges(true, true);
    CHECK(rnn_many_long.epochs.lo == 5);
    CHECK(rnn_many_long.epochs.hi == 30);
    CHECK(rnn_many_long.minibatch.lo == 10);
    CHECK(rnn_many_long.minibatch.hi == 100);

    const HyperRanges rnn_many_short = default_rnn_ranges(true, false);
    CHECK(rnn_many_short.minibatch.lo == 1);

    const HyperRanges rnn_single = default_rnn_ranges(false, false);
    CHECK(rnn_single.epochs.lo == 20);
    CHECK(rnn_single.epochs.hi == 300);
    CHECK_FALSE(rnn_single.many_series);

    const HyperRanges ffnn_wide = default_ffnn_ranges(true, false, 15);
    CHECK(ffnn_wide.epochs.hi == 60);
    CHECK(ffnn_wide.hidden_nodes.lo == 3);
    CHECK(ffnn_wide.hidden_nodes.hi == 15);

    const HyperRanges ffnn_narrow = default_ffnn_ranges(true, false, 2);
    CHECK(ffnn_narrow.hidden_nodes.hi == 3);
}

TEST_CASE("sampled configurations stay inside the declared bounds") {
    const HyperRanges ranges = default_ffnn_ranges(true, false, 15);
    Rng rng(42);
    for (int i = 0; i < 200; ++i) {
        const FfnnConfig config = sample_ffnn_config(ranges, 15, rng);
        REQUIRE_FALSE(config.hidden_sizes.empty());
        CHECK(config.hidden_sizes.size() <= 5);
        for (int size : config.hidden_sizes) {
            CHECK(size >= 3);
            CHECK(size <= 15);
        }
        CHECK(config.train.epochs >= 5);
        CHECK(config.train.epochs <= 60);
        CHECK(config.train.minibatch >= 1);
        CHECK(config.train.minibatch <= 100);
        CHECK(config.train.epoch_size >= 1);
        CHECK(config.train.epoch_size <= 10);
        CHECK(config.train.learning_rate >= 0.0001);
        CHECK(config.train.learning_rate <= 0.1);
        CHECK(config.train.l2_lambda >= 0.0001);
        CHECK(config.train.l2_lambda <= 0.0008);
        CHECK(config.train.input_noise_std <= 0.0008);
        CHECK(config.train.init_std <= 0.0008);
    }

    const HyperRanges rnn_ranges = default_rnn_ranges(true, true);
    for (int i = 0; i < 200; ++i) {
        const RnnConfig config = sample_rnn_config(rnn_ranges, rng);
        CHECK(config.cell_dim >= 20);
        CHECK(config.cell_dim <= 50);
        CHECK(config.num_layers >= 1);
        CHECK(config.num_layers <= 2);
        CHECK(config.train.minibatch >= 10);
    }
}

TEST_CASE("sampling is deterministic in the generator state") {
    const HyperRanges ranges = default_ffnn_ranges(true, false, 10);
    Rng first(7);
    Rng second(7);
    for (int i = 0; i < 20; ++i) {
        const std::string a = ffnn_config_to_json(sample_ffnn_config(ranges, 10, first));
        const std::string b = ffnn_config_to_json(sample_ffnn_config(ranges, 10, second));
        CHECK(a == b);
    }
}

TEST_CASE("single-series sampling fixes the batch schedule") {
    const HyperRanges ffnn_ranges = default_ffnn_ranges(false, false, 10);
    const HyperRanges rnn_ranges = default_rnn_ranges(false, false);
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
        const FfnnConfig ffnn = sample_ffnn_config(ffnn_ranges, 10, rng);
        CHECK(ffnn.train.minibatch == std::numeric_limits<int>::max());
        CHECK(ffnn.train.epoch_size == 1);
        const RnnConfig rnn = sample_rnn_config(rnn_ranges, rng);
        CHECK(rnn.train.minibatch == 1);
        CHECK(rnn.train.epoch_size == 1);
    }
}

TEST_CASE("the learning rate is drawn log-uniformly across its decades") {
    const HyperRanges ranges = default_ffnn_ranges(true, false, 10);
    Rng rng(123);
    std::vector<double> rates;
    for (int i = 0; i < 2000; ++i) {
        rates.push_back(sample_ffnn_config(ranges, 10, rng).train.learning_rate);
    }
    std::sort(rates.begin(), rates.end());
    const double median = rates[rates.size() / 2];
    // Log-uniform over [1e-4, 1e-1]: median ~ 3.16e-3, and two thirds of the
    // mass lies below 1e-2. A linear draw would put the median near 0.05.
    CHECK(median > 0.001);
    CHECK(median < 0.01);
    const double below = static_cast<double>(
                             std::lower_bound(rates.begin(), rates.end(), 0.01) -
                             rates.begin()) /
                         static_cast<double>(rates.size());
    CHECK(below > 0.60);
    CHECK(below < 0.73);
}

TEST_CASE("random search keeps the best finite trial and records failures") {
    const auto sampler = [](Rng& rng) {
        return std::string("{\"x\":") + std::to_string(rng.uniform01()) + "}";
    };
    const std::vector<double> scores{3.0, -1.0, 2.0, 0.5, 0.9};
    const auto evaluate = [&](const std::string&, int index) {
        if (index == 1) throw FitError("diverged");
        return scores[static_cast<std::size_t>(index)];
    };

    const TuningOutcome outcome = random_search_tune(5, 99, sampler, evaluate);
    CHECK(outcome.best_index == 3);
    CHECK(outcome.best_score == 0.5);
    REQUIRE(outcome.trials.size() == 5);
    CHECK(outcome.trials[1].failed);
    CHECK_FALSE(outcome.trials[1].error.empty());
    CHECK(outcome.trials[1].score == std::numeric_limits<double>::infinity());
    CHECK_FALSE(outcome.trials[3].failed);
    CHECK(outcome.best_config_json == outcome.trials[3].config_json);
}

TEST_CASE("random search ties keep the earliest trial") {
    const auto sampler = [](Rng&) { return std::string("{}"); };
    const auto evaluate = [](const std::string&, int index) {
        return index == 0 ? 2.0 : 1.0;
    };
    const TuningOutcome outcome = random_search_tune(3, 1, sampler, evaluate);
    CHECK(outcome.best_index == 1);
}

TEST_CASE("random search rejects degenerate setups") {
    const auto sampler = [](Rng&) { return std::string("{}"); };
    const auto all_fail = [](const std::string&, int) -> double {
        throw FitError("nope");
    };
    CHECK_THROWS_AS(random_search_tune(3, 1, sampler, all_fail), FitError);
    const auto fine = [](const std::string&, int) { return 1.0; };
    CHECK_THROWS_AS(random_search_tune(0, 1, sampler, fine), ParameterError);

    const auto non_finite = [](const std::string&, int index) {
        return index == 0 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    };
    const TuningOutcome outcome = random_search_tune(2, 1, sampler, non_finite);
    CHECK(outcome.trials[0].failed);
    CHECK(outcome.best_index == 1);
}

TEST_CASE("validation slices shorten every series and score all of them") {
    const ScenarioSpec spec = small_spec(DgpKind::Ar, ScenarioKind::MultiHomShort, 40, 3, 3);
    const SeriesDataset dataset = build_dataset(spec, 0);
    REQUIRE((dataset.evaluation_mask == std::vector<bool>{false, false, true}));

    const SeriesDataset inner = validation_slice(dataset);
    CHECK(inner.spec.series_length == 37);
    for (const RawSeries& series : inner.series) {
        CHECK(series.values.size() == 37);
    }
    CHECK((inner.evaluation_mask == std::vector<bool>{true, true, true}));
    // The inner training region is a prefix of the outer one.
    for (std::size_t i = 0; i < 37; ++i) {
        CHECK(inner.series[0].values[i] == dataset.series[0].values[i]);
    }

    // Carving the validation region needs series_length > 2 * horizon.
    const ScenarioSpec cramped = small_spec(DgpKind::Ar, ScenarioKind::Single, 6, 1, 3);
    const SeriesDataset tiny = build_dataset(cramped, 0);
    CHECK_THROWS_AS(validation_slice(tiny), DataError);
}

TEST_CASE("validation scores are finite and reproducible") {
    const ScenarioSpec spec = small_spec(DgpKind::Ar, ScenarioKind::Single, 60, 1, 3);
    const SeriesDataset dataset = build_dataset(spec, 0);
    const GlobalModelSettings settings = tiny_settings();
    const double first = validation_score(dataset, parse_model_spec("ar:3"), settings);
    const double second = validation_score(dataset, parse_model_spec("ar:3"), settings);
    CHECK(std::isfinite(first));
    CHECK(first >= 0.0);
    CHECK(first == second);
}

TEST_CASE("cell runs forecast exactly the evaluated series with true actuals") {
    const ScenarioSpec spec = small_spec(DgpKind::Ar, ScenarioKind::MultiHomLong, 60, 4, 3);
    const SeriesDataset dataset = build_dataset(spec, 0);
    const GlobalModelSettings settings = tiny_settings();

    for (const char* id : {"ar:3", "pr:3", "ffnn:3", "gbt:3", "rnn:3"}) {
        CAPTURE(id);
        const CellForecast cell =
            run_model_on_dataset(dataset, parse_model_spec(id), settings);
        REQUIRE((cell.series == std::vector<int>{0, 1, 2, 3}));
        REQUIRE(cell.forecasts.rows() == 4);
        REQUIRE(cell.forecasts.cols() == 3);
        REQUIRE(cell.actuals.rows() == 4);
        for (int s = 0; s < 4; ++s) {
            const std::vector<double>& values = dataset.series[static_cast<std::size_t>(s)].values;
            for (int k = 0; k < 3; ++k) {
                CHECK(cell.actuals(s, k) == values[values.size() - 3 + static_cast<std::size_t>(k)]);
            }
            for (int k = 0; k < 3; ++k) {
                CHECK(std::isfinite(cell.forecasts(s, k)));
            }
        }
        const CellForecast again =
            run_model_on_dataset(dataset, parse_model_spec(id), settings);
        CHECK(cell.forecasts == again.forecasts);
    }
}

TEST_CASE("short-segment datasets only forecast the final segment") {
    const ScenarioSpec spec = small_spec(DgpKind::Ar, ScenarioKind::MultiHomShort, 40, 3, 3);
    const SeriesDataset dataset = build_dataset(spec, 0);
    const CellForecast cell =
        run_model_on_dataset(dataset, parse_model_spec("ar:3"), tiny_settings());
    CHECK(cell.series == std::vector<int>{2});
    CHECK(cell.forecasts.rows() == 1);
}

TEST_CASE("seasonal and threshold locals run on their native processes") {
    const ScenarioSpec sar_spec = small_spec(DgpKind::Sar, ScenarioKind::Single, 120, 1, 6);
    const SeriesDataset sar_data = build_dataset(sar_spec, 0);
    const CellForecast sar_cell =
        run_model_on_dataset(sar_data, parse_model_spec("sar:1"), tiny_settings());
    CHECK(sar_cell.forecasts.cols() == 6);

    const ScenarioSpec setar_spec = small_spec(DgpKind::Setar, ScenarioKind::Single, 150, 1, 6);
    const SeriesDataset setar_data = build_dataset(setar_spec, 0);
    const CellForecast setar_cell =
        run_model_on_dataset(setar_data, parse_model_spec("setar"), tiny_settings());
    CHECK(setar_cell.forecasts.cols() == 6);
    for (int k = 0; k < 6; ++k) {
        CHECK(std::isfinite(setar_cell.forecasts(0, k)));
    }
}

TEST_CASE("network configurations survive a json round trip without the seed") {
    FfnnConfig ffnn;
    ffnn.hidden_sizes = {4, 7};
    ffnn.train.epochs = 17;
    ffnn.train.epoch_size = 3;
    ffnn.train.minibatch = 25;
    ffnn.train.learning_rate = 0.0123;
    ffnn.train.l2_lambda = 0.0005;
    ffnn.train.input_noise_std = 0.0002;
    ffnn.train.init_std = 0.0007;
    ffnn.train.seed = 999; // per-member, assigned at run time

    const FfnnConfig ffnn_back = ffnn_config_from_json(ffnn_config_to_json(ffnn));
    CHECK(ffnn_back.hidden_sizes == ffnn.hidden_sizes);
    CHECK(ffnn_back.train.epochs == 17);
    CHECK(ffnn_back.train.epoch_size == 3);
    CHECK(ffnn_back.train.minibatch == 25);
    CHECK(ffnn_back.train.learning_rate == ffnn.train.learning_rate);
    CHECK(ffnn_back.train.l2_lambda == ffnn.train.l2_lambda);
    CHECK(ffnn_back.train.input_noise_std == ffnn.train.input_noise_std);
    CHECK(ffnn_back.train.init_std == ffnn.train.init_std);
    CHECK(ffnn_back.train.seed == 1);

    RnnConfig rnn;
    rnn.cell_dim = 33;
    rnn.num_layers = 2;
    rnn.grad_clip_norm = 7.5;
    rnn.train.epochs = 9;
    rnn.train.learning_rate = 0.004;
    rnn.train.seed = 555;
    const RnnConfig rnn_back = rnn_config_from_json(rnn_config_to_json(rnn));
    CHECK(rnn_back.cell_dim == 33);
    CHECK(rnn_back.num_layers == 2);
    CHECK(rnn_back.grad_clip_norm == 7.5);
    CHECK(rnn_back.train.epochs == 9);
    CHECK(rnn_back.train.learning_rate == 0.004);
    CHECK(rnn_back.train.seed == 1);

    CHECK_THROWS_AS(ffnn_config_from_json("not json"), IoError);
    CHECK_THROWS_AS(rnn_config_from_json("{\"cell_dim\": 3}"), IoError);
}
