#pragma once

#include "simbench/ffnn.hpp"
#include "simbench/gbt.hpp"
#include "simbench/pooled.hpp"
#include "simbench/rnn.hpp"
#include "simbench/scenario.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace simbench {

enum class ModelKind { Ar, Sar, Setar, PooledRegression, Ffnn, Gbt, Rnn };

std::string to_string(ModelKind kind);

/// A model id is "<kind>" or "<kind>:<order>" where order is the lag order
/// (local and pooled linear models) or the input window size (networks and
/// boosted trees), e.g. "ar:3", "pr:10", "ffnn:15", "setar", "sar:1".
struct ModelSpec {
    ModelKind kind = ModelKind::Ar;
    int order = 0;

    std::string id() const;
};

ModelSpec parse_model_spec(const std::string& id);

/// Globals pool training data across series; locals fit one series at a time.
bool model_is_global(ModelKind kind);

/// Networks have searched hyperparameters; the other models are fixed.
bool model_is_tunable(ModelKind kind);

/// Networks are trained once per ensemble seed and their forecasts combined
/// by the elementwise median.
bool model_uses_ensemble(ModelKind kind);

/// The preprocessing stages each family runs before windowing:
/// linear pooled regression scales only (its recursion inverts poorly under
/// the log), the nonlinear globals run the full scale -> log -> window ->
/// per-window normalization chain, and local models use raw values.
PipelineConfig pipeline_for(const ModelSpec& spec, int horizon);

/// Frozen training settings for one cell (model x replicate): per-family
/// configs plus the seeds that make the cell reproducible in isolation.
struct GlobalModelSettings {
    FfnnConfig ffnn;
    RnnConfig rnn;
    GbtConfig gbt;
    std::vector<std::uint64_t> member_seeds{1}; // one training per entry
};

/// Forecasts and actuals for every evaluated series of one dataset, in
/// original units, plus wall-clock accounting.
struct CellForecast {
    std::vector<int> series;   // evaluated series indices, ascending
    Eigen::MatrixXd forecasts; // one row per evaluated series, H columns
    Eigen::MatrixXd actuals;
    double preprocess_seconds = 0.0;
    double train_seconds = 0.0;
    std::vector<std::string> warnings;
};

/// Trains the model on the dataset's training regions and forecasts every
/// evaluated series. Deterministic given (dataset, spec, settings).
CellForecast run_model_on_dataset(const SeriesDataset& dataset, const ModelSpec& spec,
                                  const GlobalModelSettings& settings);

/// Appends a one-hot group block (width num_groups) to every input row.
void append_group_feature(WindowBatch& batch, const std::vector<int>& group_labels,
                          int num_groups);

Eigen::RowVectorXd append_group_feature_row(const Eigen::RowVectorXd& row, int label,
                                            int num_groups);

/// Elementwise median across equally shaped member forecasts.
Eigen::MatrixXd ensemble_median(const std::vector<Eigen::MatrixXd>& members);

/// Shortens every series to its training region, so the last horizon values
/// of each training region become the held-out validation region. All series
/// are marked for evaluation.
SeriesDataset validation_slice(const SeriesDataset& dataset);

/// Mean validation SMAPE of the model over the validation slice — the
/// objective minimized by hyperparameter search.
double validation_score(const SeriesDataset& dataset, const ModelSpec& spec,
                        const GlobalModelSettings& settings);

std::string ffnn_config_to_json(const FfnnConfig& config);
FfnnConfig ffnn_config_from_json(const std::string& text);
std::string rnn_config_to_json(const RnnConfig& config);
RnnConfig rnn_config_from_json(const std::string& text);

} // namespace simbench
