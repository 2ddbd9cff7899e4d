#include "simbench/model_zoo.hpp"

#include "simbench/errors.hpp"
#include "simbench/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace simbench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

} // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::Ar: return "ar";
    case ModelKind::Sar: return "sar";
    case ModelKind::Setar: return "setar";
    case ModelKind::PooledRegression: return "pr";
    case ModelKind::Ffnn: return "ffnn";
    case ModelKind::Gbt: return "gbt";
    case ModelKind::Rnn: return "rnn";
    }
    throw InternalError("unknown model kind");
}

std::string ModelSpec::id() const {
    if (kind == ModelKind::Setar) {
        return to_string(kind);
    }
    return to_string(kind) + ":" + std::to_string(order);
}

ModelSpec parse_model_spec(const std::string& id) {
    std::string kind_text = id;
    int order = 0;
    bool has_order = false;
    if (const auto colon = id.find(':'); colon != std::string::npos) {
        kind_text = id.substr(0, colon);
        try {
            order = std::stoi(id.substr(colon + 1));
        } catch (const std::exception&) {
            throw ParameterError("bad model order in id '" + id + "'");
        }
        has_order = true;
    }
    ModelSpec spec;
    if (kind_text == "ar") spec.kind = ModelKind::Ar;
    else if (kind_text == "sar") spec.kind = ModelKind::Sar;
    else if (kind_text == "setar") spec.kind = ModelKind::Setar;
    else if (kind_text == "pr") spec.kind = ModelKind::PooledRegression;
    else if (kind_text == "ffnn") spec.kind = ModelKind::Ffnn;
    else if (kind_text == "gbt") spec.kind = ModelKind::Gbt;
    else if (kind_text == "rnn") spec.kind = ModelKind::Rnn;
    else throw ParameterError("unknown model kind '" + kind_text + "'");

    if (spec.kind == ModelKind::Setar) {
        if (has_order) {
            throw ParameterError("threshold model takes no order: '" + id + "'");
        }
        return spec;
    }
    if (spec.kind == ModelKind::Sar && !has_order) {
        spec.order = 1;
        return spec;
    }
    if (!has_order || order < 1) {
        throw ParameterError("model id '" + id + "' needs a positive order");
    }
    spec.order = order;
    return spec;
}

bool model_is_global(ModelKind kind) {
    switch (kind) {
    case ModelKind::PooledRegression:
    case ModelKind::Ffnn:
    case ModelKind::Gbt:
    case ModelKind::Rnn:
        return true;
    default:
        return false;
    }
}

bool model_is_tunable(ModelKind kind) {
    return kind == ModelKind::Ffnn || kind == ModelKind::Rnn;
}

bool model_uses_ensemble(ModelKind kind) {
    return kind == ModelKind::Ffnn || kind == ModelKind::Rnn;
}

PipelineConfig pipeline_for(const ModelSpec& spec, int horizon) {
    (void)horizon;
    PipelineConfig config;
    config.window_size = spec.order;
    switch (spec.kind) {
    case ModelKind::PooledRegression:
        config.scale = true;
        config.log = false;
        config.normalize_windows = false;
        config.one_step = true;
        break;
    case ModelKind::Ffnn:
    case ModelKind::Gbt:
    case ModelKind::Rnn:
        config.scale = true;
        config.log = true;
        config.normalize_windows = true;
        config.one_step = false;
        break;
    default: // local models consume raw values, no pipeline
        config.scale = false;
        config.log = false;
        config.normalize_windows = false;
        config.one_step = false;
        break;
    }
    return config;
}

void append_group_feature(WindowBatch& batch, const std::vector<int>& group_labels,
                          int num_groups) {
    if (num_groups < 1) {
        throw ParameterError("group feature needs at least one group");
    }
    const Eigen::Index rows = batch.inputs.rows();
    Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(rows, num_groups);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const int series = batch.series_index[static_cast<std::size_t>(r)];
        if (series < 0 || series >= static_cast<int>(group_labels.size())) {
            throw ParameterError("window row references a series without a group label");
        }
        const int label = group_labels[static_cast<std::size_t>(series)];
        if (label < 0 || label >= num_groups) {
            throw ParameterError("group label " + std::to_string(label) +
                                 " outside [0, " + std::to_string(num_groups) + ")");
        }
        onehot(r, label) = 1.0;
    }
    Eigen::MatrixXd widened(rows, batch.inputs.cols() + num_groups);
    widened << batch.inputs, onehot;
    batch.inputs = std::move(widened);
    batch.group_onehot = std::move(onehot);
}

Eigen::RowVectorXd append_group_feature_row(const Eigen::RowVectorXd& row, int label,
                                            int num_groups) {
    if (num_groups < 1) {
        throw ParameterError("group feature needs at least one group");
    }
    if (label < 0 || label >= num_groups) {
        throw ParameterError("group label " + std::to_string(label) + " outside [0, " +
                             std::to_string(num_groups) + ")");
    }
    Eigen::RowVectorXd widened(row.size() + num_groups);
    widened << row, Eigen::RowVectorXd::Zero(num_groups);
    widened[row.size() + label] = 1.0;
    return widened;
}

Eigen::MatrixXd ensemble_median(const std::vector<Eigen::MatrixXd>& members) {
    if (members.empty()) {
        throw ParameterError("ensemble median of zero members");
    }
    for (const Eigen::MatrixXd& m : members) {
        if (m.rows() != members.front().rows() || m.cols() != members.front().cols()) {
            throw ParameterError("ensemble member shape mismatch");
        }
    }
    Eigen::MatrixXd result(members.front().rows(), members.front().cols());
    std::vector<double> values(members.size());
    for (Eigen::Index r = 0; r < result.rows(); ++r) {
        for (Eigen::Index c = 0; c < result.cols(); ++c) {
            for (std::size_t i = 0; i < members.size(); ++i) {
                values[i] = members[i](r, c);
            }
            std::sort(values.begin(), values.end());
            const std::size_t mid = values.size() / 2;
            result(r, c) = (values.size() % 2 == 1)
                               ? values[mid]
                               : (values[mid - 1] + values[mid]) / 2.0;
        }
    }
    return result;
}

namespace {

std::vector<int> evaluated_indices(const SeriesDataset& dataset) {
    std::vector<int> indices;
    for (int s = 0; s < static_cast<int>(dataset.series.size()); ++s) {
        if (dataset.evaluation_mask[static_cast<std::size_t>(s)]) {
            indices.push_back(s);
        }
    }
    if (indices.empty()) {
        throw DataError("dataset has no series marked for evaluation");
    }
    return indices;
}

bool uses_group_feature(const SeriesDataset& dataset) {
    return dataset.spec.scenario == ScenarioKind::GroupFeature &&
           dataset.spec.num_groups > 0;
}

/// Local fit + recursive forecast for one series' training region.
std::vector<double> local_forecast(const ModelSpec& spec,
                                   std::span<const double> train, int horizon,
                                   int seasonal_period) {
    switch (spec.kind) {
    case ModelKind::Ar: {
        const FittedAr model = fit_ar(train, spec.order);
        return forecast_recursive(model, train, horizon);
    }
    case ModelKind::Sar: {
        const FittedAr model = fit_sar(train, spec.order, seasonal_period);
        return forecast_recursive(model, train, horizon);
    }
    case ModelKind::Setar: {
        const FittedSetar model = fit_setar(train);
        return forecast_recursive(model, train, horizon);
    }
    default:
        throw InternalError("not a local model");
    }
}

/// Per-series prediction sequences for the recurrent model: the series'
/// training windows in order, with the forecast window appended as the final
/// step.
Eigen::MatrixXd rnn_prediction_sequence(const WindowBatch& batch, int series,
                                        const Eigen::RowVectorXd& forecast_row) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < batch.inputs.rows(); ++r) {
        if (batch.series_index[static_cast<std::size_t>(r)] == series) {
            rows.push_back(r);
        }
    }
    std::sort(rows.begin(), rows.end(), [&](Eigen::Index a, Eigen::Index b) {
        return batch.window_index[static_cast<std::size_t>(a)] <
               batch.window_index[static_cast<std::size_t>(b)];
    });
    Eigen::MatrixXd sequence(static_cast<Eigen::Index>(rows.size()) + 1,
                             batch.inputs.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        sequence.row(static_cast<Eigen::Index>(i)) = batch.inputs.row(rows[i]);
    }
    sequence.row(sequence.rows() - 1) = forecast_row;
    return sequence;
}

} // namespace

CellForecast run_model_on_dataset(const SeriesDataset& dataset, const ModelSpec& spec,
                                  const GlobalModelSettings& settings) {
    if (dataset.series.empty()) {
        throw DataError("empty dataset");
    }
    const int horizon = dataset.horizon();
    const std::vector<int> evaluated = evaluated_indices(dataset);
    const std::vector<TrainTestView> views = train_test_split(dataset);

    CellForecast cell;
    cell.series = evaluated;
    cell.forecasts.resize(static_cast<Eigen::Index>(evaluated.size()), horizon);
    cell.actuals.resize(static_cast<Eigen::Index>(evaluated.size()), horizon);
    for (std::size_t i = 0; i < evaluated.size(); ++i) {
        const std::span<const double> test = views[static_cast<std::size_t>(evaluated[i])].test;
        for (int k = 0; k < horizon; ++k) {
            cell.actuals(static_cast<Eigen::Index>(i), k) = test[static_cast<std::size_t>(k)];
        }
    }

    if (!model_is_global(spec.kind)) {
        const auto start = Clock::now();
        for (std::size_t i = 0; i < evaluated.size(); ++i) {
            const std::vector<double> forecast =
                local_forecast(spec, views[static_cast<std::size_t>(evaluated[i])].train,
                               horizon, dataset.spec.seasonal_period);
            for (int k = 0; k < horizon; ++k) {
                cell.forecasts(static_cast<Eigen::Index>(i), k) =
                    forecast[static_cast<std::size_t>(k)];
            }
        }
        cell.train_seconds = seconds_since(start);
        return cell;
    }

    // Global models: preprocessing stage.
    const auto preprocess_start = Clock::now();
    PreparedData prepared = prepare(dataset, pipeline_for(spec, horizon));
    cell.warnings = prepared.batch.warnings;
    const bool grouped = uses_group_feature(dataset);
    if (grouped) {
        append_group_feature(prepared.batch, dataset.group_labels,
                             dataset.spec.num_groups);
    }
    // Forecast inputs for every evaluated series (records window means).
    std::vector<Eigen::RowVectorXd> forecast_rows;
    forecast_rows.reserve(evaluated.size());
    for (int s : evaluated) {
        Eigen::RowVectorXd row =
            forecast_input(prepared.transformed, prepared.state, s);
        if (grouped) {
            row = append_group_feature_row(
                row, dataset.group_labels[static_cast<std::size_t>(s)],
                dataset.spec.num_groups);
        }
        forecast_rows.push_back(std::move(row));
    }
    cell.preprocess_seconds = seconds_since(preprocess_start);

    const auto train_start = Clock::now();
    auto finish = [&](const Eigen::MatrixXd& forecasts) {
        cell.forecasts = forecasts;
        cell.train_seconds = seconds_since(train_start);
    };

    switch (spec.kind) {
    case ModelKind::PooledRegression: {
        const PooledRegressionModel model = fit_pooled_regression(prepared.batch);
        const FittedAr as_ar = model.as_ar();
        Eigen::MatrixXd forecasts(static_cast<Eigen::Index>(evaluated.size()), horizon);
        for (std::size_t i = 0; i < evaluated.size(); ++i) {
            const int s = evaluated[i];
            const std::vector<double>& history =
                prepared.transformed.train[static_cast<std::size_t>(s)];
            const std::vector<double> raw =
                forecast_recursive(as_ar, history, horizon);
            const std::vector<double> restored =
                postprocess_forecasts(raw, prepared.state, s);
            for (int k = 0; k < horizon; ++k) {
                forecasts(static_cast<Eigen::Index>(i), k) =
                    restored[static_cast<std::size_t>(k)];
            }
        }
        finish(forecasts);
        return cell;
    }
    case ModelKind::Gbt: {
        const GbtModel model = fit_gbt(prepared.batch, settings.gbt);
        Eigen::MatrixXd forecasts(static_cast<Eigen::Index>(evaluated.size()), horizon);
        for (std::size_t i = 0; i < evaluated.size(); ++i) {
            const Eigen::RowVectorXd raw_row =
                model.predict(forecast_rows[i]).row(0);
            const std::vector<double> raw(raw_row.data(), raw_row.data() + raw_row.size());
            const std::vector<double> restored =
                postprocess_forecasts(raw, prepared.state, evaluated[i]);
            for (int k = 0; k < horizon; ++k) {
                forecasts(static_cast<Eigen::Index>(i), k) =
                    restored[static_cast<std::size_t>(k)];
            }
        }
        finish(forecasts);
        return cell;
    }
    case ModelKind::Ffnn: {
        std::vector<Eigen::MatrixXd> members;
        std::vector<std::size_t> failed;
        std::string first_error;
        for (std::size_t member = 0; member < settings.member_seeds.size(); ++member) {
            FfnnConfig config = settings.ffnn;
            config.train.seed = settings.member_seeds[member];
            try {
                const FfnnModel model = fit_ffnn(prepared.batch, config);
                Eigen::MatrixXd forecasts(static_cast<Eigen::Index>(evaluated.size()),
                                          horizon);
                for (std::size_t i = 0; i < evaluated.size(); ++i) {
                    const Eigen::VectorXd raw_col =
                        model.forward(forecast_rows[i].transpose());
                    const std::vector<double> raw(raw_col.data(),
                                                  raw_col.data() + raw_col.size());
                    const std::vector<double> restored =
                        postprocess_forecasts(raw, prepared.state, evaluated[i]);
                    for (int k = 0; k < horizon; ++k) {
                        forecasts(static_cast<Eigen::Index>(i), k) =
                            restored[static_cast<std::size_t>(k)];
                    }
                }
                members.push_back(std::move(forecasts));
            } catch (const std::exception& e) {
                failed.push_back(member);
                if (first_error.empty()) first_error = e.what();
            }
        }
        if (!failed.empty()) {
            std::string seeds;
            for (std::size_t f : failed) {
                if (!seeds.empty()) seeds += ", ";
                seeds += std::to_string(settings.member_seeds[f]);
            }
            throw FitError("ensemble members failed (seeds " + seeds +
                           "): " + first_error);
        }
        finish(ensemble_median(members));
        return cell;
    }
    case ModelKind::Rnn: {
        const std::vector<SeriesSequence> sequences =
            sequences_from_batch(prepared.batch);
        std::vector<Eigen::MatrixXd> prediction_sequences;
        prediction_sequences.reserve(evaluated.size());
        for (std::size_t i = 0; i < evaluated.size(); ++i) {
            prediction_sequences.push_back(rnn_prediction_sequence(
                prepared.batch, evaluated[i], forecast_rows[i]));
        }
        std::vector<Eigen::MatrixXd> members;
        std::vector<std::size_t> failed;
        std::string first_error;
        for (std::size_t member = 0; member < settings.member_seeds.size(); ++member) {
            RnnConfig config = settings.rnn;
            config.train.seed = settings.member_seeds[member];
            try {
                const RnnModel model = fit_rnn(sequences, config, horizon);
                Eigen::MatrixXd forecasts(static_cast<Eigen::Index>(evaluated.size()),
                                          horizon);
                for (std::size_t i = 0; i < evaluated.size(); ++i) {
                    const Eigen::VectorXd raw_col =
                        model.forward_last(prediction_sequences[i]);
                    const std::vector<double> raw(raw_col.data(),
                                                  raw_col.data() + raw_col.size());
                    const std::vector<double> restored =
                        postprocess_forecasts(raw, prepared.state, evaluated[i]);
                    for (int k = 0; k < horizon; ++k) {
                        forecasts(static_cast<Eigen::Index>(i), k) =
                            restored[static_cast<std::size_t>(k)];
                    }
                }
                members.push_back(std::move(forecasts));
            } catch (const std::exception& e) {
                failed.push_back(member);
                if (first_error.empty()) first_error = e.what();
            }
        }
        if (!failed.empty()) {
            std::string seeds;
            for (std::size_t f : failed) {
                if (!seeds.empty()) seeds += ", ";
                seeds += std::to_string(settings.member_seeds[f]);
            }
            throw FitError("ensemble members failed (seeds " + seeds +
                           "): " + first_error);
        }
        finish(ensemble_median(members));
        return cell;
    }
    default:
        throw InternalError("unhandled global model kind");
    }
}

SeriesDataset validation_slice(const SeriesDataset& dataset) {
    const int horizon = dataset.horizon();
    SeriesDataset inner = dataset;
    inner.spec.series_length = dataset.spec.series_length - horizon;
    if (inner.spec.series_length <= horizon) {
        throw DataError("series too short to carve out a validation region");
    }
    for (RawSeries& series : inner.series) {
        if (static_cast<int>(series.values.size()) <= 2 * horizon) {
            throw DataError("series '" + series.id +
                            "' too short to carve out a validation region");
        }
        series.values.resize(series.values.size() - static_cast<std::size_t>(horizon));
    }
    std::fill(inner.evaluation_mask.begin(), inner.evaluation_mask.end(), true);
    return inner;
}

double validation_score(const SeriesDataset& dataset, const ModelSpec& spec,
                        const GlobalModelSettings& settings) {
    const SeriesDataset inner = validation_slice(dataset);
    const CellForecast cell = run_model_on_dataset(inner, spec, settings);
    double total = 0.0;
    for (Eigen::Index r = 0; r < cell.forecasts.rows(); ++r) {
        const Eigen::RowVectorXd f = cell.forecasts.row(r);
        const Eigen::RowVectorXd y = cell.actuals.row(r);
        total += score_smape(std::span<const double>(f.data(), static_cast<std::size_t>(f.size())),
                             std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                             dataset.spec.dgp);
    }
    return total / static_cast<double>(cell.forecasts.rows());
}

namespace {

nlohmann::json train_config_to_json(const NnTrainingConfig& train) {
    return nlohmann::json{{"epochs", train.epochs},
                          {"epoch_size", train.epoch_size},
                          {"minibatch", train.minibatch},
                          {"learning_rate", train.learning_rate},
                          {"l2_lambda", train.l2_lambda},
                          {"input_noise_std", train.input_noise_std},
                          {"init_std", train.init_std}};
}

NnTrainingConfig train_config_from_json(const nlohmann::json& j) {
    NnTrainingConfig train;
    train.epochs = j.at("epochs").get<int>();
    train.epoch_size = j.at("epoch_size").get<int>();
    train.minibatch = j.at("minibatch").get<int>();
    train.learning_rate = j.at("learning_rate").get<double>();
    train.l2_lambda = j.at("l2_lambda").get<double>();
    train.input_noise_std = j.at("input_noise_std").get<double>();
    train.init_std = j.at("init_std").get<double>();
    return train;
}

} // namespace

std::string ffnn_config_to_json(const FfnnConfig& config) {
    nlohmann::json j{{"hidden_sizes", config.hidden_sizes},
                     {"train", train_config_to_json(config.train)}};
    return j.dump();
}

FfnnConfig ffnn_config_from_json(const std::string& text) {
    FfnnConfig config;
    try {
        const nlohmann::json j = nlohmann::json::parse(text);
        config.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
        config.train = train_config_from_json(j.at("train"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("bad network config: ") + e.what());
    }
    return config;
}

std::string rnn_config_to_json(const RnnConfig& config) {
    nlohmann::json j{{"cell_dim", config.cell_dim},
                     {"num_layers", config.num_layers},
                     {"grad_clip_norm", config.grad_clip_norm},
                     {"train", train_config_to_json(config.train)}};
    return j.dump();
}

RnnConfig rnn_config_from_json(const std::string& text) {
    RnnConfig config;
    try {
        const nlohmann::json j = nlohmann::json::parse(text);
        config.cell_dim = j.at("cell_dim").get<int>();
        config.num_layers = j.at("num_layers").get<int>();
        config.grad_clip_norm = j.at("grad_clip_norm").get<double>();
        config.train = train_config_from_json(j.at("train"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("bad network config: ") + e.what());
    }
    return config;
}

} // namespace simbench
