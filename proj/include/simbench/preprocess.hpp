#pragma once

#include "simbench/scenario.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace simbench {

/// Everything recorded about one series while transforming it, sufficient to
/// invert every applied stage exactly.
struct SeriesTransform {
    bool scaled = false;
    double scale = 1.0;            // training-region mean used as the divisor
    bool log_applied = false;
    bool plus_one_shift = false;   // log(y + 1) was used (zero-containing series)
    double forecast_window_mean = 0.0; // mean subtracted from the prediction input
};

/// Write-once record of which stages ran and with what parameters.
struct PreprocessState {
    int horizon = 0;
    int window_size = 0;  // m
    int output_size = 0;  // H, or 1 for one-step batches
    bool windows_normalized = false;
    std::vector<SeriesTransform> per_series;
    /// Per-series, per-window input means subtracted by window_normalize
    /// (empty vectors for series that produced no windows).
    std::vector<std::vector<double>> window_means;
};

/// Training-region values of every series after the value transforms.
/// Models only ever see these sequences; test-region values stay untouched
/// in the dataset.
struct TransformedData {
    std::vector<std::vector<double>> train;
};

/// Pooled moving-window design: row r is the contiguous input slice
/// [window_index, window_index + m) of series series_index[r] paired with
/// the next `output_size` values.
struct WindowBatch {
    int window_size = 0;
    int output_size = 0;
    Eigen::MatrixXd inputs;   // rows x m
    Eigen::MatrixXd targets;  // rows x output_size
    std::vector<int> series_index;
    std::vector<int> window_index;
    Eigen::MatrixXd group_onehot; // rows x num_groups when a group feature is attached
    std::vector<std::string> warnings;

    Eigen::Index rows() const { return inputs.rows(); }
};

/// Divides each training region by its own mean and records the divisor.
/// Non-positive means are degenerate for the later log stage and raise a
/// data error.
TransformedData mean_scale(const SeriesDataset& dataset, PreprocessState& state);

/// Natural log in place. Series whose training minimum is <= 0 are shifted
/// by +1 first (recorded); negative values are a domain error.
void log_transform(TransformedData& data, PreprocessState& state);

/// Emits all fully in-range stride-1 windows of every training sequence:
/// counts = length - m - out + 1 per series. Series too short for a single
/// window are skipped with a warning; an entirely empty batch is an error.
WindowBatch extract_windows(const TransformedData& data, PreprocessState& state, int m,
                            int horizon, bool one_step);

/// Subtracts each row's input mean from its input and target cells and
/// stores the mean keyed by (series, window).
void window_normalize(WindowBatch& batch, PreprocessState& state);

/// The model input for forecasting one series: its last m transformed
/// training values, window-normalized when that stage ran (the subtracted
/// mean is recorded as the series' forecast_window_mean).
Eigen::RowVectorXd forecast_input(const TransformedData& data, PreprocessState& state,
                                  int series);

/// Inverts the applied stages on one series' raw model output, in reverse
/// stage order: add the forecast window mean, exponentiate, subtract the +1
/// shift, multiply by the stored series mean.
std::vector<double> postprocess_forecasts(std::span<const double> raw,
                                          const PreprocessState& state, int series);

/// Applies the fitted value transforms (scale divisor, log shift) of one
/// series to arbitrary values — used to express round-trip checks and to
/// carry recursive forecasts through the transformed space.
std::vector<double> apply_value_transforms(const PreprocessState& state, int series,
                                           std::span<const double> values);

/// Which stages a model family's pipeline runs.
struct PipelineConfig {
    bool scale = true;
    bool log = true;
    bool normalize_windows = true;
    int window_size = 0;
    bool one_step = false;
};

struct PreparedData {
    PreprocessState state;
    TransformedData transformed;
    WindowBatch batch;
};

/// Runs the configured stages in their fixed order: scale -> log -> window
/// extraction -> per-window normalization.
PreparedData prepare(const SeriesDataset& dataset, const PipelineConfig& config);

/// Debug dump: series_id, window_index, m input cells, output cells.
void write_window_batch_csv(std::ostream& out, const WindowBatch& batch,
                            const SeriesDataset& dataset);

} // namespace simbench
