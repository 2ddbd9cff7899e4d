#pragma once

#include "simbench/metrics.hpp"
#include "simbench/model_zoo.hpp"
#include "simbench/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace simbench {

inline constexpr const char* kVersion = "0.1.0";

/// Everything needed to run one benchmark experiment end to end. Fields left
/// at their zero value are resolved from the scenario preset.
struct ExperimentConfig {
    ScenarioSpec scenario;
    std::vector<ModelSpec> models; // empty -> default roster for the scenario
    int tuner_trials = 8;          // random-search budget per tunable model & cell
    int ensemble_size = 5;         // trained copies of each network, median-combined
    int replicates = 0;            // 0 -> scenario default divided by `scale`
    int workers = 1;
    int scale = 1;                 // desk-scale divisor for replicates and epochs
    int gbt_rounds = 0;            // 0 -> published boosting budget (1200)
    std::uint64_t base_seed = 0;   // 0 -> scenario.base_seed
    std::string out_dir = "out";
    bool sweep = true;             // include the data-availability sweep cells
};

/// Parses the flat `key = value` config text (one pair per line, `#`
/// comments). `preset = <name>` must precede any scenario field override.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::filesystem::path& path);

/// Fills defaults (roster, seed, replicate count after scaling) and
/// validates; throws ParameterError on inconsistent settings.
ExperimentConfig resolve_config(ExperimentConfig config);

/// The shipped model roster for a scenario. Combinations the published
/// summary grid leaves blank are omitted (e.g. pooled regression never runs
/// on single-series scenarios).
std::vector<ModelSpec> default_roster(const ScenarioSpec& spec);

/// Which data-availability axis a scenario sweeps.
enum class SweepAxis { None, Length, Count };
SweepAxis sweep_axis(const ScenarioSpec& spec);
std::string to_string(SweepAxis axis);

/// Ascending axis values; the last entry is the primary (full-size) cell.
/// Scenarios without a sweep yield a single value.
std::vector<int> sweep_values(const ScenarioSpec& spec);

/// Deterministic per-model seed stream: mixing the model id into the base
/// seed gives every model an independent stream, so adding or removing one
/// model never shifts another's draws.
std::uint64_t model_stream(std::uint64_t base_seed, const std::string& model_id);

/// Completion record for one (model, axis value, replicate) cell.
struct CellStatus {
    std::string model;
    int axis_value = 0;
    int replicate = 0;
    bool ok = false;
    bool reused = false; // satisfied by a file from a previous run
    double preprocess_seconds = 0.0;
    double train_seconds = 0.0;
    std::string error;
};

/// Resolved snapshot of a run; serialized as manifest.json in the run
/// directory. The manifest plus the code version reproduce any cell.
struct RunManifest {
    std::string version = kVersion;
    ScenarioSpec scenario; // fully resolved
    std::vector<std::string> models;
    std::uint64_t base_seed = 0;
    int replicates = 0;
    int tuner_trials = 0;
    int ensemble_size = 0;
    int scale = 1;
    int gbt_rounds = 0;
    int workers = 1;
    SweepAxis axis = SweepAxis::None;
    std::vector<int> cells; // ascending; last = primary
    std::vector<std::uint64_t> replicate_seeds;
    std::map<std::string, std::string> tuned; // "<model>@<axis>" -> config JSON
    std::vector<CellStatus> statuses;         // canonical (model, axis, replicate) order

    long failure_count() const;
    int primary_axis_value() const;
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

/// The run directory of a config: <out_dir>/<scenario.name>.
std::filesystem::path run_directory(const ExperimentConfig& config);

/// Relative cell artifact path under forecasts/ for one cell.
std::string cell_filename(const std::string& model_id, SweepAxis axis, int axis_value,
                          int replicate);

/// Stored outcome of one cell: per-series forecasts, actuals, and scores.
struct StoredCell {
    std::string model;
    int axis_value = 0;
    int replicate = 0;
    double preprocess_seconds = 0.0;
    double train_seconds = 0.0;
    std::vector<std::string> series_ids;
    Eigen::MatrixXd forecasts;
    Eigen::MatrixXd actuals;
    std::vector<double> smape;
    std::vector<double> mase;
    std::vector<std::string> warnings;
};

std::string stored_cell_to_json(const StoredCell& cell);
StoredCell stored_cell_from_json(const std::string& text);

/// Builds the dataset of one sweep cell: the full replicate build restricted
/// to the cell's prefix along the sweep axis.
SeriesDataset dataset_for_cell(const ScenarioSpec& spec, int replicate, SweepAxis axis,
                               int axis_value);

/// Recomputes one cell exactly as the run pipeline would (bit-identical to
/// the stored artifact's forecasts).
StoredCell compute_cell(const RunManifest& manifest, const ModelSpec& model,
                        int axis_value, int replicate);

/// Runs the full pipeline: tune -> train/forecast every (model, cell,
/// replicate) -> evaluate -> statistics -> reports. Existing cell artifacts
/// under forecasts/ are reused, never recomputed, so an interrupted run can
/// be resumed by re-invoking with the same config. Per-cell failures are
/// recorded in the returned (and persisted) manifest; they do not abort the
/// run.
RunManifest run_experiment(const ExperimentConfig& config);

/// Re-reads a run directory's cell artifacts and writes
/// reports/{results,summary,availability}.csv. Returns the primary-cell
/// aggregate.
ErrorReport evaluate_run(const std::filesystem::path& run_dir);

/// Friedman omnibus + step-up post-hoc on per-replicate mean errors of the
/// primary cell; writes reports/{friedman,stats}.csv. Returns false when
/// fewer than two models have at least two fully shared replicates.
bool stats_run(const std::filesystem::path& run_dir);

/// Writes reports/timings.csv (and reports/availability.svg when the sweep
/// has at least two points).
void report_run(const std::filesystem::path& run_dir);

/// Cross-run summary grid: one row per model, one column per run (scenario),
/// cells "-" where a model was not part of a run. Writes grid_smape.csv,
/// grid_mase.csv and grid_pct_diff.csv under `out`.
void write_summary_grid(const std::vector<std::filesystem::path>& run_dirs,
                        const std::filesystem::path& out);

/// Writes `replicates` simulated datasets as CSV under
/// <run_dir>/datasets/rep<k>.csv (columns series_id, group, t, value).
void write_datasets(const ExperimentConfig& config, int replicates);

} // namespace simbench
