#include "simbench/scenario.hpp"

#include "simbench/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace simbench {

namespace {

std::string series_id(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%04d", index);
    return buf;
}

/// Simulates and standardizes one series for the spec's DGP, recording the
/// stream seed used. `length` is the raw simulated length.
RawSeries simulate_one(const ScenarioSpec& spec, const DgpParams& params, int length,
                       std::uint64_t seed) {
    Rng rng(seed);
    RawSeries series;
    switch (spec.dgp) {
        case DgpKind::Ar:
            series = simulate_ar(std::get<ArCoefficients>(params), length, kArBurnIn, rng);
            break;
        case DgpKind::Sar:
            series = simulate_sar(std::get<SarCoefficients>(params), length, kArBurnIn, rng);
            break;
        case DgpKind::LogisticMap:
            series = simulate_logistic_map(std::get<LogisticMapParams>(params), length,
                                           kLogisticBurnIn, rng);
            break;
        case DgpKind::Setar:
            series = simulate_setar(std::get<SetarParams>(params), length, rng);
            break;
        case DgpKind::MackeyGlass:
            series = simulate_mackey_glass(std::get<MackeyGlassParams>(params), length, rng);
            break;
    }
    series.seed = seed;
    standardize_series(series, standardize_mode_for(spec.dgp));
    return series;
}

/// The seed purpose of the simulation stream: Mackey-Glass consumes
/// randomness only for its initial-history jitter.
SeedPurpose simulation_purpose(DgpKind kind) {
    return kind == DgpKind::MackeyGlass ? SeedPurpose::InitialState : SeedPurpose::NoiseDraw;
}

void check_sweep(const std::vector<int>& sweep, int maximum, int minimum, const char* what) {
    if (sweep.empty()) return;
    if (!std::is_sorted(sweep.begin(), sweep.end())) {
        throw ParameterError(std::string(what) + " sweep must be ascending");
    }
    if (sweep.back() != maximum) {
        throw ParameterError(std::string(what) + " sweep must end at the spec maximum");
    }
    if (sweep.front() <= minimum) {
        throw ParameterError(std::string(what) + " sweep values too small");
    }
}

} // namespace

std::string to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::Single: return "ss";
        case ScenarioKind::MultiHomShort: return "ms-hom-short";
        case ScenarioKind::MultiHomLong: return "ms-hom-long";
        case ScenarioKind::MultiHet: return "ms-het";
        case ScenarioKind::GroupFeature: return "group-feature";
    }
    throw InternalError("to_string(ScenarioKind): unknown kind");
}

ScenarioKind parse_scenario_kind(const std::string& text) {
    if (text == "ss") return ScenarioKind::Single;
    if (text == "ms-hom-short") return ScenarioKind::MultiHomShort;
    if (text == "ms-hom-long") return ScenarioKind::MultiHomLong;
    if (text == "ms-het") return ScenarioKind::MultiHet;
    if (text == "group-feature") return ScenarioKind::GroupFeature;
    throw ParameterError("unknown scenario kind '" + text + "'");
}

void validate_spec(const ScenarioSpec& spec) {
    if (spec.series_length < 2) throw ParameterError("series_length must be >= 2");
    if (spec.horizon < 1) throw ParameterError("horizon must be >= 1");
    if (spec.series_length <= spec.horizon) {
        throw ParameterError("series_length must exceed the forecast horizon");
    }
    if (spec.num_series < 1) throw ParameterError("num_series must be >= 1");
    if (spec.num_replicates < 1) throw ParameterError("num_replicates must be >= 1");
    if (spec.dgp == DgpKind::Ar && spec.ar_order < 1) {
        throw ParameterError("ar_order must be >= 1");
    }
    if (spec.dgp == DgpKind::Sar && spec.seasonal_period < 1) {
        throw ParameterError("seasonal_period must be >= 1");
    }
    if (spec.scenario == ScenarioKind::GroupFeature) {
        if (spec.num_groups < 1) throw ParameterError("num_groups must be >= 1");
        if (spec.num_series % spec.num_groups != 0) {
            throw ParameterError("num_series must be divisible by num_groups");
        }
    }
    if (!spec.count_sweep.empty() && spec.scenario != ScenarioKind::MultiHomShort) {
        throw ParameterError("count sweeps only apply to the split-segment scenario");
    }
    if (!spec.length_sweep.empty() && spec.scenario == ScenarioKind::MultiHomShort) {
        throw ParameterError("the split-segment scenario sweeps series counts, not lengths");
    }
    check_sweep(spec.length_sweep, spec.series_length, spec.horizon, "length");
    check_sweep(spec.count_sweep, spec.num_series, 0, "count");
}

SeriesDataset build_ss(const ScenarioSpec& spec, int replicate) {
    if (spec.scenario != ScenarioKind::Single) {
        throw ParameterError("build_ss called with a non-SS spec");
    }
    validate_spec(spec);
    SeriesDataset ds;
    ds.spec = spec;
    ds.spec.num_series = 1;
    ds.replicate = replicate;

    Rng coeff_rng(derive_seed(spec.base_seed, static_cast<std::uint64_t>(replicate), 0,
                              SeedPurpose::CoefficientDraw));
    const DgpParams params = homogeneous_params(spec, coeff_rng);
    const std::uint64_t seed = derive_seed(spec.base_seed, static_cast<std::uint64_t>(replicate),
                                           0, simulation_purpose(spec.dgp));
    RawSeries series = simulate_one(spec, params, spec.series_length, seed);
    series.id = series_id(0);
    ds.series.push_back(std::move(series));
    ds.group_labels = {0};
    ds.evaluation_mask = {true};
    return ds;
}

SeriesDataset build_ms_hom_short(const ScenarioSpec& spec, int replicate) {
    if (spec.scenario != ScenarioKind::MultiHomShort) {
        throw ParameterError("build_ms_hom_short called with the wrong scenario kind");
    }
    validate_spec(spec);

    SeriesDataset ds;
    ds.spec = spec;
    ds.replicate = replicate;

    Rng coeff_rng(derive_seed(spec.base_seed, static_cast<std::uint64_t>(replicate), 0,
                              SeedPurpose::CoefficientDraw));
    const DgpParams params = homogeneous_params(spec, coeff_rng);
    const std::uint64_t seed = derive_seed(spec.base_seed, static_cast<std::uint64_t>(replicate),
                                           0, simulation_purpose(spec.dgp));
    const int mother_length = spec.num_series * spec.series_length;
    const RawSeries mother = simulate_one(spec, params, mother_length, seed);

    for (int i = 0; i < spec.num_series; ++i) {
        RawSeries segment;
        segment.id = series_id(i);
        segment.dgp = mother.dgp;
        segment.seed = mother.seed;
        segment.params = mother.params;
        segment.warnings = mother.warnings;
        const auto begin = mother.values.begin() + static_cast<std::ptrdiff_t>(i) * spec.series_length;
        segment.values.assign(begin, begin + spec.series_length);
        ds.series.push_back(std::move(segment));
        ds.group_labels.push_back(0);
        ds.evaluation_mask.push_back(i == spec.num_series - 1);
    }
    return ds;
}

SeriesDataset build_ms_hom_long(const ScenarioSpec& spec, int replicate) {
    if (spec.scenario != ScenarioKind::MultiHomLong) {
        throw ParameterError("build_ms_hom_long called with the wrong scenario kind");
    }
    validate_spec(spec);

    SeriesDataset ds;
    ds.spec = spec;
    ds.replicate = replicate;

    Rng coeff_rng(derive_seed(spec.base_seed, static_cast<std::uint64_t>(replicate), 0,
                              SeedPurpose::CoefficientDraw));
    const DgpParams params = homogeneous_params(spec, coeff_rng);
    for (int i = 0; i < spec.num_series; ++i) {
        const std::uint64_t seed =
            derive_seed(spec.base_seed, static_cast<std::uint64_t>(replicate),
                        static_cast<std::uint64_t>(i), simulation_purpose(spec.dgp));
        RawSeries series = simulate_one(spec, params, spec.series_length, seed);
        series.id = series_id(i);
        ds.series.push_back(std::move(series));
        ds.group_labels.push_back(0);
        ds.evaluation_mask.push_back(true);
    }
    return ds;
}

SeriesDataset build_ms_het(const ScenarioSpec& spec, int replicate) {
    if (spec.scenario != ScenarioKind::MultiHet) {
        throw ParameterError("build_ms_het called with the wrong scenario kind");
    }
    validate_spec(spec);

    SeriesDataset ds;
    ds.spec = spec;
    ds.replicate = replicate;

    for (int i = 0; i < spec.num_series; ++i) {
        Rng coeff_rng(derive_seed(spec.base_seed, static_cast<std::uint64_t>(replicate),
                                  static_cast<std::uint64_t>(i), SeedPurpose::CoefficientDraw));
        const DgpParams params = sample_heterogeneous_params(spec, coeff_rng);
        const std::uint64_t seed =
            derive_seed(spec.base_seed, static_cast<std::uint64_t>(replicate),
                        static_cast<std::uint64_t>(i), simulation_purpose(spec.dgp));
        RawSeries series = simulate_one(spec, params, spec.series_length, seed);
        series.id = series_id(i);
        ds.series.push_back(std::move(series));
        ds.group_labels.push_back(i); // every series is its own parameter group
        ds.evaluation_mask.push_back(true);
    }
    return ds;
}

SeriesDataset build_group_feature(const ScenarioSpec& spec, int replicate) {
    if (spec.scenario != ScenarioKind::GroupFeature) {
        throw ParameterError("build_group_feature called with the wrong scenario kind");
    }
    validate_spec(spec);

    SeriesDataset ds;
    ds.spec = spec;
    ds.replicate = replicate;

    const int per_group = spec.num_series / spec.num_groups;
    for (int g = 0; g < spec.num_groups; ++g) {
        Rng coeff_rng(derive_seed(spec.base_seed, static_cast<std::uint64_t>(replicate),
                                  static_cast<std::uint64_t>(g), SeedPurpose::CoefficientDraw));
        const DgpParams params = sample_heterogeneous_params(spec, coeff_rng);
        for (int j = 0; j < per_group; ++j) {
            const int i = g * per_group + j;
            const std::uint64_t seed =
                derive_seed(spec.base_seed, static_cast<std::uint64_t>(replicate),
                            static_cast<std::uint64_t>(i), simulation_purpose(spec.dgp));
            RawSeries series = simulate_one(spec, params, spec.series_length, seed);
            series.id = series_id(i);
            ds.series.push_back(std::move(series));
            ds.group_labels.push_back(g);
            ds.evaluation_mask.push_back(true);
        }
    }
    return ds;
}

SeriesDataset build_dataset(const ScenarioSpec& spec, int replicate) {
    switch (spec.scenario) {
        case ScenarioKind::Single: return build_ss(spec, replicate);
        case ScenarioKind::MultiHomShort: return build_ms_hom_short(spec, replicate);
        case ScenarioKind::MultiHomLong: return build_ms_hom_long(spec, replicate);
        case ScenarioKind::MultiHet: return build_ms_het(spec, replicate);
        case ScenarioKind::GroupFeature: return build_group_feature(spec, replicate);
    }
    throw InternalError("build_dataset: unknown scenario kind");
}

SeriesDataset prefix_dataset(const SeriesDataset& full, int series_length, int num_series) {
    if (num_series < 1 || num_series > static_cast<int>(full.series.size())) {
        throw ParameterError("prefix num_series out of range");
    }
    if (series_length <= full.spec.horizon || series_length > full.spec.series_length) {
        throw ParameterError("prefix series_length out of range");
    }

    SeriesDataset ds;
    ds.spec = full.spec;
    ds.spec.series_length = series_length;
    ds.spec.num_series = num_series;
    ds.spec.length_sweep.clear();
    ds.spec.count_sweep.clear();
    ds.replicate = full.replicate;
    for (int i = 0; i < num_series; ++i) {
        RawSeries series = full.series[static_cast<std::size_t>(i)];
        series.values.resize(static_cast<std::size_t>(series_length));
        ds.series.push_back(std::move(series));
        ds.group_labels.push_back(full.group_labels[static_cast<std::size_t>(i)]);
        const bool evaluated = full.spec.scenario == ScenarioKind::MultiHomShort
                                   ? i == num_series - 1
                                   : full.evaluation_mask[static_cast<std::size_t>(i)];
        ds.evaluation_mask.push_back(evaluated);
    }
    return ds;
}

TrainTestView train_test_view(const RawSeries& series, int horizon) {
    if (static_cast<int>(series.values.size()) <= horizon) {
        throw ParameterError("series " + series.id + " too short for the holdout horizon");
    }
    const std::size_t train_len = series.values.size() - static_cast<std::size_t>(horizon);
    return {std::span<const double>(series.values.data(), train_len),
            std::span<const double>(series.values.data() + train_len,
                                    static_cast<std::size_t>(horizon))};
}

std::vector<TrainTestView> train_test_split(const SeriesDataset& dataset) {
    std::vector<TrainTestView> views;
    views.reserve(dataset.series.size());
    for (const auto& series : dataset.series) {
        views.push_back(train_test_view(series, dataset.spec.horizon));
    }
    return views;
}

DgpParams homogeneous_params(const ScenarioSpec& spec, Rng& rng) {
    switch (spec.dgp) {
        case DgpKind::Ar:
            return sample_stationary_ar_coefficients(spec.ar_order, spec.root_max, rng);
        case DgpKind::Sar: {
            SarCoefficients sar;
            sar.intercept = 9072.24;
            sar.seasonal_phi = {0.85};
            sar.period = spec.seasonal_period;
            return sar;
        }
        case DgpKind::LogisticMap: return LogisticMapParams{};
        case DgpKind::Setar: {
            SetarParams setar;
            setar.regimes = {ArCoefficients{2.9, {-0.4, -0.1}, 1.0},
                             ArCoefficients{-1.5, {0.2, 0.3}, 1.0}};
            setar.thresholds = {2.0};
            setar.delay = 1;
            setar.initial_values = {2.8, 2.2};
            return setar;
        }
        case DgpKind::MackeyGlass: {
            MackeyGlassParams mg;
            mg.initial_level = std::numeric_limits<double>::quiet_NaN();
            return mg;
        }
    }
    throw InternalError("homogeneous_params: unknown DGP");
}

DgpParams sample_heterogeneous_params(const ScenarioSpec& spec, Rng& rng) {
    switch (spec.dgp) {
        case DgpKind::Ar:
            return sample_stationary_ar_coefficients(spec.ar_order, spec.root_max, rng);
        case DgpKind::Sar: {
            SarCoefficients sar;
            sar.intercept = 0.0;
            sar.seasonal_phi = {rng.uniform(-0.5, 0.5)};
            sar.period = spec.seasonal_period;
            return sar;
        }
        case DgpKind::LogisticMap: {
            LogisticMapParams lm;
            lm.r = rng.uniform(0.0, 4.0);
            lm.y0 = rng.uniform(0.0, 1.0);
            return lm;
        }
        case DgpKind::Setar: {
            const SetarParams base = std::get<SetarParams>(homogeneous_params(spec, rng));
            for (int attempt = 0; attempt < 1000; ++attempt) {
                SetarParams jittered = base;
                bool stationary = true;
                for (auto& regime : jittered.regimes) {
                    regime.intercept += rng.normal(0.0, 0.007);
                    for (double& coeff : regime.phi) coeff += rng.normal(0.0, 0.007);
                }
                for (const auto& regime : jittered.regimes) {
                    stationary = stationary && is_stationary_ar(regime.phi);
                }
                if (stationary) return jittered;
            }
            throw NumericError("SETAR heterogeneity sampling failed to find stationary regimes");
        }
        case DgpKind::MackeyGlass: {
            MackeyGlassParams mg;
            mg.tau = static_cast<int>(rng.uniform_int(17, 100));
            mg.initial_level = std::numeric_limits<double>::quiet_NaN();
            return mg;
        }
    }
    throw InternalError("sample_heterogeneous_params: unknown DGP");
}

namespace {

ScenarioSpec make_preset(std::string name, DgpKind dgp, ScenarioKind scenario, int length,
                         int num_series, int horizon, int replicates,
                         std::vector<int> length_sweep, std::vector<int> count_sweep) {
    ScenarioSpec spec;
    spec.name = std::move(name);
    spec.dgp = dgp;
    spec.scenario = scenario;
    spec.series_length = length;
    spec.num_series = num_series;
    spec.horizon = horizon;
    spec.num_replicates = replicates;
    spec.base_seed = 12345;
    spec.length_sweep = std::move(length_sweep);
    spec.count_sweep = std::move(count_sweep);
    if (dgp == DgpKind::Sar) spec.mase_period = 12;
    if (scenario == ScenarioKind::GroupFeature) spec.num_groups = 4;
    return spec;
}

} // namespace

std::vector<ScenarioSpec> builtin_presets() {
    std::vector<ScenarioSpec> presets;
    const std::vector<int> counts{1, 10, 25, 50, 100};

    // Linear AR process: horizon 3, lengths 18..1800.
    presets.push_back(make_preset("ar3-ss", DgpKind::Ar, ScenarioKind::Single, 1800, 1, 3, 1000,
                                  {18, 60, 180, 600, 1800}, {}));
    presets.push_back(make_preset("ar3-ms-hom-short", DgpKind::Ar, ScenarioKind::MultiHomShort,
                                  18, 100, 3, 1000, {}, counts));
    presets.push_back(make_preset("ar3-ms-hom-long", DgpKind::Ar, ScenarioKind::MultiHomLong,
                                  180, 100, 3, 1000, {18, 60, 180}, {}));
    presets.push_back(make_preset("ar3-ms-het", DgpKind::Ar, ScenarioKind::MultiHet, 180, 100, 3,
                                  1000, {18, 60, 180}, {}));

    // Seasonal process: horizon 3, lengths 24..2400, seasonal naive period 12.
    presets.push_back(make_preset("sar1-ss", DgpKind::Sar, ScenarioKind::Single, 2400, 1, 3,
                                  1000, {24, 80, 240, 800, 2400}, {}));
    presets.push_back(make_preset("sar1-ms-hom-short", DgpKind::Sar, ScenarioKind::MultiHomShort,
                                  24, 100, 3, 1000, {}, counts));
    presets.push_back(make_preset("sar1-ms-hom-long", DgpKind::Sar, ScenarioKind::MultiHomLong,
                                  240, 100, 3, 1000, {24, 80, 240}, {}));
    presets.push_back(make_preset("sar1-ms-het", DgpKind::Sar, ScenarioKind::MultiHet, 240, 100,
                                  3, 1000, {24, 80, 240}, {}));

    // Chaotic logistic map: horizon 12, lengths 60..6000.
    presets.push_back(make_preset("logistic-ss", DgpKind::LogisticMap, ScenarioKind::Single,
                                  6000, 1, 12, 1000, {60, 200, 600, 2000, 6000}, {}));
    presets.push_back(make_preset("logistic-ms-hom-short", DgpKind::LogisticMap,
                                  ScenarioKind::MultiHomShort, 60, 100, 12, 1000, {}, counts));
    presets.push_back(make_preset("logistic-ms-hom-long", DgpKind::LogisticMap,
                                  ScenarioKind::MultiHomLong, 600, 100, 12, 1000,
                                  {60, 200, 600}, {}));
    presets.push_back(make_preset("logistic-ms-het", DgpKind::LogisticMap, ScenarioKind::MultiHet,
                                  600, 100, 12, 1000, {60, 200, 600}, {}));

    // Threshold AR: fixed sizes, horizon 12.
    presets.push_back(
        make_preset("setar-ss", DgpKind::Setar, ScenarioKind::Single, 6000, 1, 12, 100, {}, {}));
    presets.push_back(make_preset("setar-ms-hom-short", DgpKind::Setar,
                                  ScenarioKind::MultiHomShort, 60, 100, 12, 100, {}, {}));
    presets.push_back(make_preset("setar-ms-hom-long", DgpKind::Setar,
                                  ScenarioKind::MultiHomLong, 240, 100, 12, 100, {}, {}));
    presets.push_back(
        make_preset("setar-ms-het", DgpKind::Setar, ScenarioKind::MultiHet, 240, 100, 12, 100,
                    {}, {}));

    // Delay recursion: fixed sizes, horizon 12.
    presets.push_back(make_preset("mackey-glass-ss", DgpKind::MackeyGlass, ScenarioKind::Single,
                                  6000, 1, 12, 100, {}, {}));
    presets.push_back(make_preset("mackey-glass-ms-hom-short", DgpKind::MackeyGlass,
                                  ScenarioKind::MultiHomShort, 60, 100, 12, 100, {}, {}));
    presets.push_back(make_preset("mackey-glass-ms-hom-long", DgpKind::MackeyGlass,
                                  ScenarioKind::MultiHomLong, 240, 100, 12, 100, {}, {}));
    presets.push_back(make_preset("mackey-glass-ms-het", DgpKind::MackeyGlass,
                                  ScenarioKind::MultiHet, 240, 100, 12, 100, {}, {}));

    // Grouped chaotic series with a subgroup indicator feature.
    presets.push_back(make_preset("logistic-group-feature", DgpKind::LogisticMap,
                                  ScenarioKind::GroupFeature, 600, 100, 12, 100, {}, {}));
    return presets;
}

ScenarioSpec find_preset(const std::string& name) {
    for (auto& preset : builtin_presets()) {
        if (preset.name == name) return preset;
    }
    throw ParameterError("unknown scenario preset '" + name + "'");
}

} // namespace simbench
