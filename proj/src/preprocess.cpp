#include "simbench/preprocess.hpp"

#include "simbench/errors.hpp"
#include "simbench/textio.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace simbench {

TransformedData mean_scale(const SeriesDataset& dataset, PreprocessState& state) {
    state.horizon = dataset.spec.horizon;
    if (state.per_series.empty()) state.per_series.resize(dataset.series.size());

    TransformedData data;
    data.train.reserve(dataset.series.size());
    const auto views = train_test_split(dataset);
    for (std::size_t i = 0; i < dataset.series.size(); ++i) {
        const auto train = views[i].train;
        double mean = 0.0;
        for (double x : train) mean += x;
        mean /= static_cast<double>(train.size());
        if (!(mean > 0.0)) {
            throw DataError("series " + dataset.series[i].id +
                            " has non-positive training mean; cannot mean-scale");
        }
        auto& transform = state.per_series[i];
        transform.scaled = true;
        transform.scale = mean;
        std::vector<double> scaled(train.begin(), train.end());
        for (double& x : scaled) x /= mean;
        data.train.push_back(std::move(scaled));
    }
    return data;
}

void log_transform(TransformedData& data, PreprocessState& state) {
    if (state.per_series.size() < data.train.size()) {
        state.per_series.resize(data.train.size());
    }
    for (std::size_t i = 0; i < data.train.size(); ++i) {
        auto& train = data.train[i];
        if (train.empty()) throw DataError("cannot log-transform an empty series");
        const double min = *std::min_element(train.begin(), train.end());
        if (min < 0.0) {
            throw DataError("log transform requires non-negative values (series index " +
                            std::to_string(i) + ")");
        }
        auto& transform = state.per_series[i];
        transform.log_applied = true;
        transform.plus_one_shift = min <= 0.0;
        const double shift = transform.plus_one_shift ? 1.0 : 0.0;
        for (double& x : train) x = std::log(x + shift);
    }
}

WindowBatch extract_windows(const TransformedData& data, PreprocessState& state, int m,
                            int horizon, bool one_step) {
    if (m < 1) throw ParameterError("window size must be >= 1");
    if (horizon < 1) throw ParameterError("output horizon must be >= 1");
    const int out = one_step ? 1 : horizon;

    state.window_size = m;
    state.output_size = out;
    state.window_means.assign(data.train.size(), {});

    WindowBatch batch;
    batch.window_size = m;
    batch.output_size = out;

    std::size_t total = 0;
    for (const auto& train : data.train) {
        const auto length = static_cast<std::ptrdiff_t>(train.size());
        total += static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, length - m - out + 1));
    }
    batch.inputs.resize(static_cast<Eigen::Index>(total), m);
    batch.targets.resize(static_cast<Eigen::Index>(total), out);
    batch.series_index.reserve(total);
    batch.window_index.reserve(total);

    Eigen::Index row = 0;
    for (std::size_t i = 0; i < data.train.size(); ++i) {
        const auto& train = data.train[i];
        const std::ptrdiff_t count =
            static_cast<std::ptrdiff_t>(train.size()) - m - out + 1;
        if (count < 1) {
            batch.warnings.push_back("series index " + std::to_string(i) +
                                     " too short for a single window; skipped");
            continue;
        }
        for (std::ptrdiff_t w = 0; w < count; ++w) {
            for (int j = 0; j < m; ++j) {
                batch.inputs(row, j) = train[static_cast<std::size_t>(w + j)];
            }
            for (int j = 0; j < out; ++j) {
                batch.targets(row, j) = train[static_cast<std::size_t>(w + m + j)];
            }
            batch.series_index.push_back(static_cast<int>(i));
            batch.window_index.push_back(static_cast<int>(w));
            ++row;
        }
    }
    if (row == 0) throw DataError("no series long enough to extract a single window");
    return batch;
}

void window_normalize(WindowBatch& batch, PreprocessState& state) {
    if (batch.rows() == 0) throw ParameterError("cannot normalize an empty window batch");
    state.windows_normalized = true;
    for (Eigen::Index r = 0; r < batch.rows(); ++r) {
        const double mean = batch.inputs.row(r).mean();
        batch.inputs.row(r).array() -= mean;
        batch.targets.row(r).array() -= mean;
        state.window_means[static_cast<std::size_t>(batch.series_index[static_cast<std::size_t>(r)])]
            .push_back(mean);
    }
}

Eigen::RowVectorXd forecast_input(const TransformedData& data, PreprocessState& state,
                                  int series) {
    const auto& train = data.train.at(static_cast<std::size_t>(series));
    const int m = state.window_size;
    if (m < 1) throw InternalError("forecast_input called before window extraction");
    if (static_cast<int>(train.size()) < m) {
        throw DataError("series index " + std::to_string(series) +
                        " shorter than the input window");
    }
    Eigen::RowVectorXd input(m);
    for (int j = 0; j < m; ++j) {
        input(j) = train[train.size() - static_cast<std::size_t>(m - j)];
    }
    auto& transform = state.per_series.at(static_cast<std::size_t>(series));
    if (state.windows_normalized) {
        const double mean = input.mean();
        input.array() -= mean;
        transform.forecast_window_mean = mean;
    } else {
        transform.forecast_window_mean = 0.0;
    }
    return input;
}

std::vector<double> postprocess_forecasts(std::span<const double> raw,
                                          const PreprocessState& state, int series) {
    const auto& transform = state.per_series.at(static_cast<std::size_t>(series));
    std::vector<double> values(raw.begin(), raw.end());
    for (double& x : values) {
        if (state.windows_normalized) x += transform.forecast_window_mean;
        if (transform.log_applied) {
            x = std::exp(x);
            if (transform.plus_one_shift) x -= 1.0;
        }
        if (transform.scaled) x *= transform.scale;
    }
    return values;
}

std::vector<double> apply_value_transforms(const PreprocessState& state, int series,
                                           std::span<const double> values) {
    const auto& transform = state.per_series.at(static_cast<std::size_t>(series));
    std::vector<double> out(values.begin(), values.end());
    for (double& x : out) {
        if (transform.scaled) x /= transform.scale;
        if (transform.log_applied) {
            const double shift = transform.plus_one_shift ? 1.0 : 0.0;
            if (x + shift < 0.0) {
                throw DataError("log transform domain error while transforming values");
            }
            x = std::log(x + shift);
        }
    }
    return out;
}

PreparedData prepare(const SeriesDataset& dataset, const PipelineConfig& config) {
    if (config.window_size < 1) throw ParameterError("pipeline window size must be set");
    PreparedData prepared;
    prepared.state.horizon = dataset.spec.horizon;
    prepared.state.per_series.resize(dataset.series.size());

    if (config.scale) {
        prepared.transformed = mean_scale(dataset, prepared.state);
    } else {
        const auto views = train_test_split(dataset);
        prepared.transformed.train.reserve(views.size());
        for (const auto& view : views) {
            prepared.transformed.train.emplace_back(view.train.begin(), view.train.end());
        }
    }
    if (config.log) log_transform(prepared.transformed, prepared.state);
    prepared.batch = extract_windows(prepared.transformed, prepared.state, config.window_size,
                                     dataset.spec.horizon, config.one_step);
    if (config.normalize_windows) window_normalize(prepared.batch, prepared.state);
    return prepared;
}

void write_window_batch_csv(std::ostream& out, const WindowBatch& batch,
                            const SeriesDataset& dataset) {
    out << "series_id,window_index";
    for (int j = 0; j < batch.window_size; ++j) out << ",x" << j;
    for (int j = 0; j < batch.output_size; ++j) out << ",y" << j;
    out << '\n';
    for (Eigen::Index r = 0; r < batch.rows(); ++r) {
        const auto series = static_cast<std::size_t>(batch.series_index[static_cast<std::size_t>(r)]);
        out << dataset.series.at(series).id << ',' << batch.window_index[static_cast<std::size_t>(r)];
        for (int j = 0; j < batch.window_size; ++j) {
            out << ',' << format_double(batch.inputs(r, j));
        }
        for (int j = 0; j < batch.output_size; ++j) {
            out << ',' << format_double(batch.targets(r, j));
        }
        out << '\n';
    }
}

} // namespace simbench
