#pragma once

#include "simbench/dgp.hpp"
#include "simbench/rng.hpp"
#include "simbench/series.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace simbench {

/// Dataset shapes: one series; one mother series split into many short
/// segments; many long series from one parameter set; many series from
/// per-series parameter sets; grouped parameter sets with a group feature.
enum class ScenarioKind {
    Single,
    MultiHomShort,
    MultiHomLong,
    MultiHet,
    GroupFeature,
};

std::string to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(const std::string& text);

/// Full description of one benchmark scenario cell family. series_length and
/// num_series are the maxima; the optional sweep lists enumerate the data
/// availability axis (shorter cells are prefixes of the full build).
struct ScenarioSpec {
    std::string name;
    DgpKind dgp = DgpKind::Ar;
    ScenarioKind scenario = ScenarioKind::Single;
    int series_length = 0;
    int num_series = 1;
    int horizon = 1;
    int num_replicates = 1;
    std::uint64_t base_seed = 1;
    int num_groups = 0;      // GroupFeature only
    int ar_order = 3;        // AR DGP order
    int seasonal_period = 12; // SAR DGP period S
    double root_max = 5.0;   // AR stationary-root sampling bound
    int mase_period = 1;     // M in the scaled-error denominator (12 for SAR)
    std::vector<int> length_sweep; // ascending, last = series_length
    std::vector<int> count_sweep;  // ascending, last = num_series
};

/// Throws ParameterError when the spec is internally inconsistent.
void validate_spec(const ScenarioSpec& spec);

/// One constructed replicate: simulated + standardized series, group labels,
/// and the mask of series whose forecasts are scored.
struct SeriesDataset {
    ScenarioSpec spec; // resolved to this cell's concrete length/count
    int replicate = 0;
    std::vector<RawSeries> series;
    std::vector<int> group_labels;
    std::vector<bool> evaluation_mask;

    int horizon() const { return spec.horizon; }
};

SeriesDataset build_ss(const ScenarioSpec& spec, int replicate);
SeriesDataset build_ms_hom_short(const ScenarioSpec& spec, int replicate);
SeriesDataset build_ms_hom_long(const ScenarioSpec& spec, int replicate);
SeriesDataset build_ms_het(const ScenarioSpec& spec, int replicate);
SeriesDataset build_group_feature(const ScenarioSpec& spec, int replicate);

/// Dispatches to the builder for spec.scenario. Pure function of
/// (spec, spec.base_seed, replicate): rebuilding yields bit-identical data.
SeriesDataset build_dataset(const ScenarioSpec& spec, int replicate);

/// Restricts a built dataset to its first `num_series` series and the first
/// `series_length` observations of each (the data-availability sweep cells
/// are nested prefixes, never re-randomized). The evaluation mask is
/// recomputed for the restricted dataset.
SeriesDataset prefix_dataset(const SeriesDataset& full, int series_length, int num_series);

/// Fixed-origin holdout views: the last `horizon` points of a series are the
/// test region, the remainder the training region. Views alias the series.
struct TrainTestView {
    std::span<const double> train;
    std::span<const double> test;
};

TrainTestView train_test_view(const RawSeries& series, int horizon);
std::vector<TrainTestView> train_test_split(const SeriesDataset& dataset);

/// Samples one parameter set according to the DGP's heterogeneity rule
/// (fresh stationary AR roots; seasonal coefficient ~ U(-0.5, 0.5);
/// logistic r ~ U(0,4), y0 ~ U(0,1); SETAR coefficient jitter N(0, 0.007)
/// with stationarity reject-resampling; Mackey-Glass tau ~ U{17..100}).
DgpParams sample_heterogeneous_params(const ScenarioSpec& spec, Rng& rng);

/// The shared parameter set used by homogeneous scenarios: sampled for AR,
/// fixed published values for the other DGPs.
DgpParams homogeneous_params(const ScenarioSpec& spec, Rng& rng);

/// All shipped scenario presets (one per published dataset-characteristics
/// row, plus the grouped setup).
std::vector<ScenarioSpec> builtin_presets();

/// Looks up a preset by name; throws ParameterError when unknown.
ScenarioSpec find_preset(const std::string& name);

} // namespace simbench
