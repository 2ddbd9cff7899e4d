#include "simbench/experiment.hpp"

#include "simbench/errors.hpp"
#include "simbench/rng.hpp"
#include "simbench/stats_tests.hpp"
#include "simbench/textio.hpp"
#include "simbench/tuning.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace simbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        }
        out << content;
        if (!out) {
            throw IoError("short write to '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot move '" + tmp.string() + "' into place: " + ec.message());
    }
}

std::string sanitize_model_id(const std::string& id) {
    std::string out = id;
    std::replace(out.begin(), out.end(), ':', '-');
    return out;
}

std::string trim(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const int parsed = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ParameterError("config key '" + key + "' needs an integer, got '" + value +
                             "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::uint64_t parsed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ParameterError("config key '" + key + "' needs an unsigned integer, got '" +
                             value + "'");
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double parsed = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ParameterError("config key '" + key + "' needs a number, got '" + value +
                             "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
    if (value == "0" || value == "false" || value == "no" || value == "off") return false;
    throw ParameterError("config key '" + key + "' needs a boolean, got '" + value + "'");
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::istringstream in(text);
    std::string word;
    while (in >> word) words.push_back(word);
    return words;
}

std::string format_seconds(double seconds) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.3f", seconds);
    return buffer;
}

/// Reported p-values below this floor print as an inequality; the computed
/// value is never clamped.
std::string format_p_value(double p) {
    if (p < 1e-30) return "<1e-30";
    return format_double(p);
}

json scenario_to_json(const ScenarioSpec& spec) {
    return json{{"name", spec.name},
                {"dgp", to_string(spec.dgp)},
                {"scenario", to_string(spec.scenario)},
                {"series_length", spec.series_length},
                {"num_series", spec.num_series},
                {"horizon", spec.horizon},
                {"num_replicates", spec.num_replicates},
                {"base_seed", spec.base_seed},
                {"num_groups", spec.num_groups},
                {"ar_order", spec.ar_order},
                {"seasonal_period", spec.seasonal_period},
                {"root_max", spec.root_max},
                {"mase_period", spec.mase_period},
                {"length_sweep", spec.length_sweep},
                {"count_sweep", spec.count_sweep}};
}

ScenarioSpec scenario_from_json(const json& j) {
    ScenarioSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.dgp = parse_dgp_kind(j.at("dgp").get<std::string>());
    spec.scenario = parse_scenario_kind(j.at("scenario").get<std::string>());
    spec.series_length = j.at("series_length").get<int>();
    spec.num_series = j.at("num_series").get<int>();
    spec.horizon = j.at("horizon").get<int>();
    spec.num_replicates = j.at("num_replicates").get<int>();
    spec.base_seed = j.at("base_seed").get<std::uint64_t>();
    spec.num_groups = j.at("num_groups").get<int>();
    spec.ar_order = j.at("ar_order").get<int>();
    spec.seasonal_period = j.at("seasonal_period").get<int>();
    spec.root_max = j.at("root_max").get<double>();
    spec.mase_period = j.at("mase_period").get<int>();
    spec.length_sweep = j.at("length_sweep").get<std::vector<int>>();
    spec.count_sweep = j.at("count_sweep").get<std::vector<int>>();
    return spec;
}

SweepAxis parse_sweep_axis(const std::string& text) {
    if (text == "none") return SweepAxis::None;
    if (text == "length") return SweepAxis::Length;
    if (text == "num-series") return SweepAxis::Count;
    throw ParameterError("unknown sweep axis '" + text + "'");
}

} // namespace

std::string to_string(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::None: return "none";
    case SweepAxis::Length: return "length";
    case SweepAxis::Count: return "num-series";
    }
    throw InternalError("unknown sweep axis");
}

SweepAxis sweep_axis(const ScenarioSpec& spec) {
    if (!spec.length_sweep.empty()) return SweepAxis::Length;
    if (!spec.count_sweep.empty()) return SweepAxis::Count;
    return SweepAxis::None;
}

std::vector<int> sweep_values(const ScenarioSpec& spec) {
    switch (sweep_axis(spec)) {
    case SweepAxis::Length: return spec.length_sweep;
    case SweepAxis::Count: return spec.count_sweep;
    case SweepAxis::None:
        return {spec.scenario == ScenarioKind::MultiHomShort ? spec.num_series
                                                             : spec.series_length};
    }
    throw InternalError("unknown sweep axis");
}

std::uint64_t model_stream(std::uint64_t base_seed, const std::string& model_id) {
    std::uint64_t h = mix64(0xA5C1D3B7E9F01235ULL, base_seed);
    for (const unsigned char c : model_id) {
        h = mix64(h, c);
    }
    return h;
}

std::vector<ModelSpec> default_roster(const ScenarioSpec& spec) {
    const bool single = spec.scenario == ScenarioKind::Single;
    const bool short_multi = spec.scenario == ScenarioKind::MultiHomShort;
    std::vector<std::string> ids;
    switch (spec.dgp) {
    case DgpKind::Ar:
        ids = {"ar:2", "ar:3", "ar:10"};
        for (const char* family : {"pr", "ffnn", "gbt", "rnn"}) {
            for (const int order : {3, 10}) {
                const bool pooled = std::string(family) == "pr";
                if (single && pooled) continue;       // needs several series
                if (single && order == 10) continue;  // published grid leaves it blank
                if (short_multi && order == 10) continue;
                ids.push_back(std::string(family) + ":" + std::to_string(order));
            }
        }
        break;
    case DgpKind::Sar:
        ids = {"ar:3", "ar:12", "sar:1", "ffnn:12", "gbt:12", "rnn:12"};
        if (!single) ids.push_back("pr:12");
        break;
    case DgpKind::LogisticMap:
    case DgpKind::MackeyGlass:
    case DgpKind::Setar:
        ids = {"ar:15", "ffnn:15", "gbt:15", "rnn:15"};
        if (!single) ids.push_back("pr:15");
        if (spec.dgp == DgpKind::Setar) ids.push_back("setar");
        break;
    }
    std::vector<ModelSpec> roster;
    roster.reserve(ids.size());
    for (const std::string& id : ids) roster.push_back(parse_model_spec(id));
    std::sort(roster.begin(), roster.end(),
              [](const ModelSpec& a, const ModelSpec& b) { return a.id() < b.id(); });
    return roster;
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParameterError("config line " + std::to_string(line_number) +
                                 " is not 'key = value': '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ParameterError("config line " + std::to_string(line_number) +
                                 " has an empty key or value");
        }
        if (key == "preset") {
            config.scenario = find_preset(value);
        } else if (key == "name") {
            config.scenario.name = value;
        } else if (key == "dgp") {
            config.scenario.dgp = parse_dgp_kind(value);
        } else if (key == "scenario") {
            config.scenario.scenario = parse_scenario_kind(value);
        } else if (key == "series_length") {
            config.scenario.series_length = parse_int(key, value);
        } else if (key == "num_series") {
            config.scenario.num_series = parse_int(key, value);
        } else if (key == "horizon") {
            config.scenario.horizon = parse_int(key, value);
        } else if (key == "num_groups") {
            config.scenario.num_groups = parse_int(key, value);
        } else if (key == "ar_order") {
            config.scenario.ar_order = parse_int(key, value);
        } else if (key == "seasonal_period") {
            config.scenario.seasonal_period = parse_int(key, value);
        } else if (key == "mase_period") {
            config.scenario.mase_period = parse_int(key, value);
        } else if (key == "root_max") {
            config.scenario.root_max = parse_real(key, value);
        } else if (key == "length_sweep" || key == "count_sweep") {
            std::vector<int> values;
            for (const std::string& word : split_words(value)) {
                values.push_back(parse_int(key, word));
            }
            (key == "length_sweep" ? config.scenario.length_sweep
                                   : config.scenario.count_sweep) = values;
        } else if (key == "models") {
            config.models.clear();
            for (const std::string& word : split_words(value)) {
                config.models.push_back(parse_model_spec(word));
            }
        } else if (key == "replicates") {
            config.replicates = parse_int(key, value);
        } else if (key == "tuner_trials") {
            config.tuner_trials = parse_int(key, value);
        } else if (key == "ensemble_size") {
            config.ensemble_size = parse_int(key, value);
        } else if (key == "workers") {
            config.workers = parse_int(key, value);
        } else if (key == "scale") {
            config.scale = parse_int(key, value);
        } else if (key == "gbt_rounds") {
            config.gbt_rounds = parse_int(key, value);
        } else if (key == "seed") {
            config.base_seed = parse_u64(key, value);
        } else if (key == "out") {
            config.out_dir = value;
        } else if (key == "sweep") {
            config.sweep = parse_bool(key, value);
        } else {
            throw ParameterError("unknown config key '" + key + "'");
        }
    }
    return config;
}

ExperimentConfig load_config_file(const fs::path& path) {
    return parse_config_text(read_text_file(path));
}

ExperimentConfig resolve_config(ExperimentConfig config) {
    if (config.scale < 1) throw ParameterError("scale must be >= 1");
    if (config.workers < 1) throw ParameterError("workers must be >= 1");
    if (config.tuner_trials < 0) throw ParameterError("tuner_trials must be >= 0");
    if (config.ensemble_size < 1) throw ParameterError("ensemble_size must be >= 1");
    if (config.gbt_rounds < 0) throw ParameterError("gbt_rounds must be >= 0");
    if (config.out_dir.empty()) throw ParameterError("output directory must be set");
    if (config.scenario.name.empty()) {
        throw ParameterError("scenario needs a name (set 'preset' or 'name')");
    }
    if (config.scenario.name.find('/') != std::string::npos) {
        throw ParameterError("scenario name must not contain '/'");
    }
    if (config.base_seed != 0) config.scenario.base_seed = config.base_seed;
    config.base_seed = config.scenario.base_seed;
    if (!config.sweep) {
        config.scenario.length_sweep.clear();
        config.scenario.count_sweep.clear();
    }
    validate_spec(config.scenario);
    if (config.replicates <= 0) {
        config.replicates = std::max(1, config.scenario.num_replicates / config.scale);
    }
    if (config.models.empty()) config.models = default_roster(config.scenario);
    std::sort(config.models.begin(), config.models.end(),
              [](const ModelSpec& a, const ModelSpec& b) { return a.id() < b.id(); });
    for (std::size_t i = 1; i < config.models.size(); ++i) {
        if (config.models[i].id() == config.models[i - 1].id()) {
            throw ParameterError("duplicate model '" + config.models[i].id() + "'");
        }
    }
    for (const ModelSpec& model : config.models) {
        if (model.kind == ModelKind::Sar &&
            config.scenario.seasonal_period < 2) {
            throw ParameterError("seasonal model needs seasonal_period >= 2");
        }
    }
    return config;
}

long RunManifest::failure_count() const {
    long failures = 0;
    for (const CellStatus& status : statuses) {
        if (!status.ok) ++failures;
    }
    return failures;
}

int RunManifest::primary_axis_value() const {
    if (cells.empty()) throw InternalError("manifest has no cells");
    return cells.back();
}

std::string manifest_to_json(const RunManifest& manifest) {
    json statuses = json::array();
    for (const CellStatus& status : manifest.statuses) {
        statuses.push_back(json{{"model", status.model},
                                {"axis_value", status.axis_value},
                                {"replicate", status.replicate},
                                {"ok", status.ok},
                                {"reused", status.reused},
                                {"preprocess_seconds", status.preprocess_seconds},
                                {"train_seconds", status.train_seconds},
                                {"error", status.error}});
    }
    const json j{{"version", manifest.version},
                 {"scenario", scenario_to_json(manifest.scenario)},
                 {"models", manifest.models},
                 {"base_seed", manifest.base_seed},
                 {"replicates", manifest.replicates},
                 {"tuner_trials", manifest.tuner_trials},
                 {"ensemble_size", manifest.ensemble_size},
                 {"scale", manifest.scale},
                 {"gbt_rounds", manifest.gbt_rounds},
                 {"workers", manifest.workers},
                 {"axis", to_string(manifest.axis)},
                 {"cells", manifest.cells},
                 {"replicate_seeds", manifest.replicate_seeds},
                 {"tuned", manifest.tuned},
                 {"statuses", statuses}};
    return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
    RunManifest manifest;
    try {
        const json j = json::parse(text);
        manifest.version = j.at("version").get<std::string>();
        manifest.scenario = scenario_from_json(j.at("scenario"));
        manifest.models = j.at("models").get<std::vector<std::string>>();
        manifest.base_seed = j.at("base_seed").get<std::uint64_t>();
        manifest.replicates = j.at("replicates").get<int>();
        manifest.tuner_trials = j.at("tuner_trials").get<int>();
        manifest.ensemble_size = j.at("ensemble_size").get<int>();
        manifest.scale = j.at("scale").get<int>();
        manifest.gbt_rounds = j.at("gbt_rounds").get<int>();
        manifest.workers = j.at("workers").get<int>();
        manifest.axis = parse_sweep_axis(j.at("axis").get<std::string>());
        manifest.cells = j.at("cells").get<std::vector<int>>();
        manifest.replicate_seeds =
            j.at("replicate_seeds").get<std::vector<std::uint64_t>>();
        manifest.tuned = j.at("tuned").get<std::map<std::string, std::string>>();
        for (const json& s : j.at("statuses")) {
            CellStatus status;
            status.model = s.at("model").get<std::string>();
            status.axis_value = s.at("axis_value").get<int>();
            status.replicate = s.at("replicate").get<int>();
            status.ok = s.at("ok").get<bool>();
            status.reused = s.at("reused").get<bool>();
            status.preprocess_seconds = s.at("preprocess_seconds").get<double>();
            status.train_seconds = s.at("train_seconds").get<double>();
            status.error = s.at("error").get<std::string>();
            manifest.statuses.push_back(status);
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("bad manifest: ") + e.what());
    }
    return manifest;
}

fs::path run_directory(const ExperimentConfig& config) {
    return fs::path(config.out_dir) / config.scenario.name;
}

std::string cell_filename(const std::string& model_id, SweepAxis axis, int axis_value,
                          int replicate) {
    char rep[16];
    std::snprintf(rep, sizeof rep, "%04d", replicate);
    const std::string token = axis == SweepAxis::Count ? "n" : "len";
    return sanitize_model_id(model_id) + "__" + token + std::to_string(axis_value) +
           "__rep" + rep + ".json";
}

std::string stored_cell_to_json(const StoredCell& cell) {
    json series = json::array();
    for (std::size_t i = 0; i < cell.series_ids.size(); ++i) {
        std::vector<double> forecasts(cell.forecasts.cols());
        std::vector<double> actuals(cell.actuals.cols());
        for (Eigen::Index k = 0; k < cell.forecasts.cols(); ++k) {
            forecasts[static_cast<std::size_t>(k)] =
                cell.forecasts(static_cast<Eigen::Index>(i), k);
            actuals[static_cast<std::size_t>(k)] =
                cell.actuals(static_cast<Eigen::Index>(i), k);
        }
        series.push_back(json{{"id", cell.series_ids[i]},
                              {"smape", cell.smape[i]},
                              {"mase", cell.mase[i]},
                              {"forecasts", forecasts},
                              {"actuals", actuals}});
    }
    const json j{{"model", cell.model},
                 {"axis_value", cell.axis_value},
                 {"replicate", cell.replicate},
                 {"preprocess_seconds", cell.preprocess_seconds},
                 {"train_seconds", cell.train_seconds},
                 {"warnings", cell.warnings},
                 {"series", series}};
    return j.dump() + "\n";
}

StoredCell stored_cell_from_json(const std::string& text) {
    StoredCell cell;
    try {
        const json j = json::parse(text);
        cell.model = j.at("model").get<std::string>();
        cell.axis_value = j.at("axis_value").get<int>();
        cell.replicate = j.at("replicate").get<int>();
        cell.preprocess_seconds = j.at("preprocess_seconds").get<double>();
        cell.train_seconds = j.at("train_seconds").get<double>();
        cell.warnings = j.at("warnings").get<std::vector<std::string>>();
        const json& series = j.at("series");
        const Eigen::Index rows = static_cast<Eigen::Index>(series.size());
        Eigen::Index cols = 0;
        if (rows > 0) {
            cols = static_cast<Eigen::Index>(series.front().at("forecasts").size());
        }
        cell.forecasts.resize(rows, cols);
        cell.actuals.resize(rows, cols);
        Eigen::Index r = 0;
        for (const json& s : series) {
            cell.series_ids.push_back(s.at("id").get<std::string>());
            cell.smape.push_back(s.at("smape").get<double>());
            cell.mase.push_back(s.at("mase").get<double>());
            const auto forecasts = s.at("forecasts").get<std::vector<double>>();
            const auto actuals = s.at("actuals").get<std::vector<double>>();
            if (static_cast<Eigen::Index>(forecasts.size()) != cols ||
                static_cast<Eigen::Index>(actuals.size()) != cols) {
                throw IoError("ragged forecast rows in stored cell");
            }
            for (Eigen::Index k = 0; k < cols; ++k) {
                cell.forecasts(r, k) = forecasts[static_cast<std::size_t>(k)];
                cell.actuals(r, k) = actuals[static_cast<std::size_t>(k)];
            }
            ++r;
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("bad stored cell: ") + e.what());
    }
    return cell;
}

SeriesDataset dataset_for_cell(const ScenarioSpec& spec, int replicate, SweepAxis axis,
                               int axis_value) {
    SeriesDataset full = build_dataset(spec, replicate);
    switch (axis) {
    case SweepAxis::None:
        return full;
    case SweepAxis::Length:
        return prefix_dataset(full, axis_value, spec.num_series);
    case SweepAxis::Count:
        return prefix_dataset(full, spec.series_length, axis_value);
    }
    throw InternalError("unknown sweep axis");
}

namespace {

/// Frozen per-cell settings: tuned configs when available, scaled defaults
/// otherwise, and seeds derived from the model's own stream.
GlobalModelSettings make_settings(const RunManifest& manifest, const ModelSpec& model,
                                  int axis_value, int replicate) {
    GlobalModelSettings settings;
    if (!model_is_global(model.kind)) return settings;
    const std::uint64_t stream = model_stream(manifest.base_seed, model.id());
    if (model.kind == ModelKind::Gbt) {
        settings.gbt.seed = derive_seed(stream, static_cast<std::uint64_t>(replicate), 0,
                                        SeedPurpose::Shuffle);
        if (manifest.gbt_rounds > 0) settings.gbt.max_rounds = manifest.gbt_rounds;
        return settings;
    }
    if (!model_uses_ensemble(model.kind)) return settings;

    settings.member_seeds.clear();
    for (int member = 0; member < manifest.ensemble_size; ++member) {
        settings.member_seeds.push_back(
            derive_seed(stream, static_cast<std::uint64_t>(replicate),
                        static_cast<std::uint64_t>(member), SeedPurpose::ModelInit));
    }
    const std::string key = model.id() + "@" + std::to_string(axis_value);
    const auto tuned = manifest.tuned.find(key);
    if (tuned != manifest.tuned.end()) {
        if (tuned->second.rfind("FAILED:", 0) == 0) {
            throw FitError("hyperparameter search failed for " + key + ": " +
                           tuned->second.substr(7));
        }
        if (model.kind == ModelKind::Ffnn) {
            settings.ffnn = ffnn_config_from_json(tuned->second);
        } else {
            settings.rnn = rnn_config_from_json(tuned->second);
        }
        return settings;
    }
    // Untuned fallback: fixed defaults with epochs reduced by the scale divisor.
    const bool many = manifest.scenario.scenario != ScenarioKind::Single;
    const int epochs = std::max(1, (many ? 30 : 100) / manifest.scale);
    if (model.kind == ModelKind::Ffnn) {
        settings.ffnn.hidden_sizes = {std::max(3, model.order)};
        settings.ffnn.train.epochs = epochs;
        settings.ffnn.train.minibatch =
            many ? 30 : std::numeric_limits<int>::max();
    } else {
        settings.rnn.cell_dim = 20;
        settings.rnn.num_layers = 1;
        settings.rnn.train.epochs = epochs;
        settings.rnn.train.minibatch = many ? 10 : 1;
    }
    return settings;
}

void apply_scale_to_epochs(HyperRanges& ranges, int scale) {
    ranges.epochs.lo = std::max(1, ranges.epochs.lo / scale);
    ranges.epochs.hi = std::max(ranges.epochs.lo, ranges.epochs.hi / scale);
}

/// Training-region length per series at one sweep cell.
int cell_train_length(const ScenarioSpec& spec, SweepAxis axis, int axis_value) {
    const int length = axis == SweepAxis::Length ? axis_value : spec.series_length;
    return length - spec.horizon;
}

void log_line(std::mutex& mutex, const std::string& line) {
    const std::lock_guard<std::mutex> lock(mutex);
    std::cerr << line << "\n";
}

/// Runs the hyperparameter search for every tunable (model, cell) pair that
/// the manifest does not already carry, persisting after each search so an
/// interrupted run never repeats finished work.
void tune_models(RunManifest& manifest, const fs::path& manifest_path,
                 std::mutex& log_mutex) {
    if (manifest.tuner_trials <= 0) return;
    for (const std::string& model_id : manifest.models) {
        const ModelSpec model = parse_model_spec(model_id);
        if (!model_is_tunable(model.kind)) continue;
        const std::uint64_t stream = model_stream(manifest.base_seed, model_id);
        for (const int axis_value : manifest.cells) {
            const std::string key = model_id + "@" + std::to_string(axis_value);
            if (manifest.tuned.count(key) != 0) continue;
            const SeriesDataset dataset =
                dataset_for_cell(manifest.scenario, 0, manifest.axis, axis_value);
            const bool many = manifest.scenario.scenario != ScenarioKind::Single;
            const bool long_series =
                many && cell_train_length(manifest.scenario, manifest.axis,
                                          axis_value) >= 100;
            const bool grouped =
                manifest.scenario.scenario == ScenarioKind::GroupFeature;
            const int input_size =
                model.order + (grouped ? manifest.scenario.num_groups : 0);
            HyperRanges ranges =
                model.kind == ModelKind::Ffnn
                    ? default_ffnn_ranges(many, long_series, input_size)
                    : default_rnn_ranges(many, long_series);
            apply_scale_to_epochs(ranges, manifest.scale);
            const auto sampler = [&](Rng& rng) {
                return model.kind == ModelKind::Ffnn
                           ? ffnn_config_to_json(
                                 sample_ffnn_config(ranges, input_size, rng))
                           : rnn_config_to_json(sample_rnn_config(ranges, rng));
            };
            const auto evaluate = [&](const std::string& config_json, int trial) {
                GlobalModelSettings settings;
                settings.member_seeds = {derive_seed(
                    stream, static_cast<std::uint64_t>(axis_value),
                    static_cast<std::uint64_t>(trial) + 1, SeedPurpose::TuningDraw)};
                if (model.kind == ModelKind::Ffnn) {
                    settings.ffnn = ffnn_config_from_json(config_json);
                } else {
                    settings.rnn = rnn_config_from_json(config_json);
                }
                return validation_score(dataset, model, settings);
            };
            try {
                const TuningOutcome outcome = random_search_tune(
                    manifest.tuner_trials,
                    derive_seed(stream, static_cast<std::uint64_t>(axis_value), 0,
                                SeedPurpose::TuningDraw),
                    sampler, evaluate);
                manifest.tuned[key] = outcome.best_config_json;
                log_line(log_mutex, "tuned " + key + " (validation smape " +
                                        format_double(outcome.best_score) + ")");
            } catch (const std::exception& e) {
                manifest.tuned[key] = std::string("FAILED:") + e.what();
                log_line(log_mutex, "tuning failed for " + key + ": " + e.what());
            }
            write_text_file_atomic(manifest_path, manifest_to_json(manifest));
        }
    }
}

} // namespace

StoredCell compute_cell(const RunManifest& manifest, const ModelSpec& model,
                        int axis_value, int replicate) {
    const SeriesDataset dataset =
        dataset_for_cell(manifest.scenario, replicate, manifest.axis, axis_value);
    const GlobalModelSettings settings =
        make_settings(manifest, model, axis_value, replicate);
    const CellForecast forecast = run_model_on_dataset(dataset, model, settings);

    StoredCell cell;
    cell.model = model.id();
    cell.axis_value = axis_value;
    cell.replicate = replicate;
    cell.preprocess_seconds = forecast.preprocess_seconds;
    cell.train_seconds = forecast.train_seconds;
    cell.forecasts = forecast.forecasts;
    cell.actuals = forecast.actuals;
    cell.warnings = forecast.warnings;
    const std::vector<TrainTestView> views = train_test_split(dataset);
    for (std::size_t i = 0; i < forecast.series.size(); ++i) {
        const int s = forecast.series[i];
        cell.series_ids.push_back(dataset.series[static_cast<std::size_t>(s)].id);
        const Eigen::RowVectorXd f = forecast.forecasts.row(static_cast<Eigen::Index>(i));
        const Eigen::RowVectorXd y = forecast.actuals.row(static_cast<Eigen::Index>(i));
        const std::span<const double> fs(f.data(), static_cast<std::size_t>(f.size()));
        const std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));
        cell.smape.push_back(score_smape(fs, ys, dataset.spec.dgp));
        cell.mase.push_back(mase(fs, ys, views[static_cast<std::size_t>(s)].train,
                                 dataset.spec.mase_period));
    }
    return cell;
}

RunManifest run_experiment(const ExperimentConfig& raw_config) {
    const ExperimentConfig config = resolve_config(raw_config);
    const fs::path run_dir = run_directory(config);
    const fs::path forecasts_dir = run_dir / "forecasts";
    fs::create_directories(forecasts_dir);
    fs::create_directories(run_dir / "datasets");
    fs::create_directories(run_dir / "reports");
    const fs::path manifest_path = run_dir / "manifest.json";

    RunManifest manifest;
    manifest.scenario = config.scenario;
    for (const ModelSpec& model : config.models) manifest.models.push_back(model.id());
    manifest.base_seed = config.base_seed;
    manifest.replicates = config.replicates;
    manifest.tuner_trials = config.tuner_trials;
    manifest.ensemble_size = config.ensemble_size;
    manifest.scale = config.scale;
    manifest.gbt_rounds = config.gbt_rounds;
    manifest.workers = config.workers;
    manifest.axis = sweep_axis(config.scenario);
    manifest.cells = sweep_values(config.scenario);
    for (int r = 0; r < config.replicates; ++r) {
        manifest.replicate_seeds.push_back(
            derive_seed(config.base_seed, static_cast<std::uint64_t>(r), 0,
                        SeedPurpose::CoefficientDraw));
    }

    // Resume: adopt tuned configurations from a compatible previous manifest.
    if (fs::exists(manifest_path)) {
        const RunManifest previous = manifest_from_json(read_text_file(manifest_path));
        const bool compatible =
            scenario_to_json(previous.scenario) == scenario_to_json(manifest.scenario) &&
            previous.base_seed == manifest.base_seed &&
            previous.ensemble_size == manifest.ensemble_size &&
            previous.tuner_trials == manifest.tuner_trials &&
            previous.scale == manifest.scale &&
            previous.gbt_rounds == manifest.gbt_rounds;
        if (!compatible) {
            throw ParameterError("run directory '" + run_dir.string() +
                                 "' holds an incompatible earlier run; use a fresh "
                                 "output directory");
        }
        manifest.tuned = previous.tuned;
    }

    std::mutex log_mutex;
    tune_models(manifest, manifest_path, log_mutex);

    struct Task {
        int model_index;
        int cell_index;
        int replicate;
    };
    std::vector<Task> tasks;
    for (int m = 0; m < static_cast<int>(manifest.models.size()); ++m) {
        for (int c = 0; c < static_cast<int>(manifest.cells.size()); ++c) {
            for (int r = 0; r < manifest.replicates; ++r) {
                tasks.push_back(Task{m, c, r});
            }
        }
    }
    manifest.statuses.assign(tasks.size(), CellStatus{});

    std::atomic<std::size_t> next_task{0};
    std::atomic<long> completed{0};
    const auto worker = [&]() {
        for (;;) {
            const std::size_t index = next_task.fetch_add(1);
            if (index >= tasks.size()) return;
            const Task task = tasks[index];
            const std::string model_id =
                manifest.models[static_cast<std::size_t>(task.model_index)];
            const ModelSpec model = parse_model_spec(model_id);
            const int axis_value =
                manifest.cells[static_cast<std::size_t>(task.cell_index)];

            CellStatus status;
            status.model = model_id;
            status.axis_value = axis_value;
            status.replicate = task.replicate;
            const fs::path file =
                forecasts_dir /
                cell_filename(model_id, manifest.axis, axis_value, task.replicate);
            bool satisfied = false;
            if (fs::exists(file)) {
                try {
                    const StoredCell prev = stored_cell_from_json(read_text_file(file));
                    if (prev.model == model_id && prev.axis_value == axis_value &&
                        prev.replicate == task.replicate) {
                        status.ok = true;
                        status.reused = true;
                        status.preprocess_seconds = prev.preprocess_seconds;
                        status.train_seconds = prev.train_seconds;
                        satisfied = true;
                    }
                } catch (const std::exception&) {
                    // Unreadable artifact: fall through and recompute it.
                }
            }
            if (!satisfied) {
                try {
                    const StoredCell cell =
                        compute_cell(manifest, model, axis_value, task.replicate);
                    write_text_file_atomic(file, stored_cell_to_json(cell));
                    status.ok = true;
                    status.preprocess_seconds = cell.preprocess_seconds;
                    status.train_seconds = cell.train_seconds;
                } catch (const std::exception& e) {
                    status.ok = false;
                    status.error = e.what();
                }
            }
            manifest.statuses[index] = status;
            const long done = completed.fetch_add(1) + 1;
            if (!status.ok || status.reused || done % 50 == 0 ||
                done == static_cast<long>(tasks.size())) {
                std::string line = "[" + std::to_string(done) + "/" +
                                   std::to_string(tasks.size()) + "] " + model_id +
                                   " @" + std::to_string(axis_value) + " rep" +
                                   std::to_string(task.replicate) + ": ";
                if (status.ok) {
                    line += status.reused ? "reused" : "ok";
                } else {
                    line += "FAILED: " + status.error;
                }
                log_line(log_mutex, line);
            }
        }
    };

    if (config.workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < config.workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    write_text_file_atomic(manifest_path, manifest_to_json(manifest));

    const auto guarded = [&](const char* stage, const auto& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            log_line(log_mutex, std::string(stage) + " skipped: " + e.what());
        }
    };
    guarded("evaluation", [&] { evaluate_run(run_dir); });
    guarded("statistics", [&] { stats_run(run_dir); });
    guarded("reporting", [&] { report_run(run_dir); });
    return manifest;
}

namespace {

RunManifest load_manifest(const fs::path& run_dir) {
    return manifest_from_json(read_text_file(run_dir / "manifest.json"));
}

struct CollectedRows {
    std::vector<CellResult> primary;
    std::vector<CellResult> all;
};

/// Reads every present cell artifact in canonical order. Missing or failed
/// cells simply contribute no rows.
CollectedRows collect_rows(const fs::path& run_dir, const RunManifest& manifest) {
    CollectedRows rows;
    const int primary = manifest.primary_axis_value();
    const std::string scenario_tag = to_string(manifest.scenario.scenario);
    const std::string dgp_tag = to_string(manifest.scenario.dgp);
    for (const std::string& model_id : manifest.models) {
        for (const int axis_value : manifest.cells) {
            for (int r = 0; r < manifest.replicates; ++r) {
                const fs::path file =
                    run_dir / "forecasts" /
                    cell_filename(model_id, manifest.axis, axis_value, r);
                if (!fs::exists(file)) continue;
                const StoredCell cell = stored_cell_from_json(read_text_file(file));
                for (std::size_t i = 0; i < cell.series_ids.size(); ++i) {
                    CellResult row;
                    row.scenario = scenario_tag;
                    row.dgp = dgp_tag;
                    row.replicate = r;
                    row.model = model_id;
                    row.series_id = cell.series_ids[i];
                    row.axis_value = axis_value;
                    row.smape = cell.smape[i];
                    row.mase = cell.mase[i];
                    rows.all.push_back(row);
                    if (axis_value == primary) rows.primary.push_back(row);
                }
            }
        }
    }
    return rows;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    write_csv_row(out, header);
    for (const std::vector<std::string>& row : rows) write_csv_row(out, row);
    write_text_file_atomic(path, out.str());
}

} // namespace

ErrorReport evaluate_run(const fs::path& run_dir) {
    const RunManifest manifest = load_manifest(run_dir);
    CollectedRows rows = collect_rows(run_dir, manifest);
    if (rows.primary.empty()) {
        throw DataError("no completed primary cells under '" + run_dir.string() + "'");
    }
    const fs::path reports = run_dir / "reports";
    fs::create_directories(reports);

    std::sort(rows.primary.begin(), rows.primary.end(),
              [](const CellResult& a, const CellResult& b) {
                  return std::tie(a.model, a.replicate, a.series_id) <
                         std::tie(b.model, b.replicate, b.series_id);
              });
    std::vector<std::vector<std::string>> result_rows;
    result_rows.reserve(rows.primary.size());
    for (const CellResult& row : rows.primary) {
        result_rows.push_back({row.scenario, row.dgp, std::to_string(row.replicate),
                               row.model, row.series_id, format_double(row.smape),
                               format_double(row.mase)});
    }
    write_csv(reports / "results.csv",
              {"scenario", "dgp", "replicate", "model", "series_id", "smape", "mase"},
              result_rows);

    const ErrorReport report = aggregate(rows.primary);
    std::vector<std::vector<std::string>> summary_rows;
    for (const ModelSummary& model : report.models) {
        summary_rows.push_back({report.scenario, report.dgp, model.model,
                                format_double(model.mean_smape),
                                format_double(model.mean_mase),
                                format_double(model.pct_diff_smape),
                                format_double(model.pct_diff_mase)});
    }
    write_csv(reports / "summary.csv",
              {"scenario", "dgp", "model", "mean_smape", "mean_mase", "pct_diff_smape",
               "pct_diff_mase"},
              summary_rows);

    const std::vector<AvailabilityPoint> points = aggregate_by_axis(rows.all);
    std::vector<std::vector<std::string>> availability_rows;
    for (const AvailabilityPoint& point : points) {
        availability_rows.push_back({point.model, std::to_string(point.axis_value),
                                     format_double(point.mean_smape),
                                     format_double(point.mean_mase)});
    }
    write_csv(reports / "availability.csv",
              {"model", "axis_value", "mean_smape", "mean_mase"}, availability_rows);
    return report;
}

bool stats_run(const fs::path& run_dir) {
    const RunManifest manifest = load_manifest(run_dir);
    const CollectedRows rows = collect_rows(run_dir, manifest);
    const int primary = manifest.primary_axis_value();

    // Per-(model, replicate) mean SMAPE over the evaluated series.
    std::map<std::string, std::map<int, double>> means;
    {
        std::map<std::pair<std::string, int>, std::pair<double, long>> sums;
        for (const CellResult& row : rows.primary) {
            auto& slot = sums[{row.model, row.replicate}];
            slot.first += row.smape;
            slot.second += 1;
        }
        for (const auto& [key, sum] : sums) {
            means[key.first][key.second] = sum.first / static_cast<double>(sum.second);
        }
    }
    std::vector<std::string> models;
    for (const auto& [model, by_replicate] : means) {
        (void)by_replicate;
        models.push_back(model);
    }
    if (models.size() < 2) return false;

    // Complete cases: replicates every model finished.
    std::vector<int> shared;
    for (int r = 0; r < manifest.replicates; ++r) {
        const bool everywhere = std::all_of(
            models.begin(), models.end(),
            [&](const std::string& model) { return means[model].count(r) != 0; });
        if (everywhere) shared.push_back(r);
    }
    if (shared.size() < 2) return false;

    Eigen::MatrixXd matrix(static_cast<Eigen::Index>(shared.size()),
                           static_cast<Eigen::Index>(models.size()));
    for (std::size_t i = 0; i < shared.size(); ++i) {
        for (std::size_t j = 0; j < models.size(); ++j) {
            matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                means[models[j]][shared[i]];
        }
    }

    // Control selection from the shared-replicate aggregate.
    std::vector<CellResult> shared_rows;
    const std::set<int> shared_set(shared.begin(), shared.end());
    for (const CellResult& row : rows.primary) {
        if (shared_set.count(row.replicate) != 0) shared_rows.push_back(row);
    }
    const ErrorReport report = aggregate(shared_rows);
    const int control = select_control(report);
    // aggregate() sorts models by id, matching the map iteration order above.
    const FriedmanResult friedman = friedman_test(matrix);
    const PosthocResult posthoc = hochberg_posthoc(matrix, models,
                                                   static_cast<int>(control));

    const fs::path reports = run_dir / "reports";
    fs::create_directories(reports);
    const std::string scenario_tag = to_string(manifest.scenario.scenario);
    write_csv(reports / "friedman.csv",
              {"scenario", "dgp", "n", "k", "statistic", "df", "p_value"},
              {{scenario_tag, to_string(manifest.scenario.dgp),
                std::to_string(shared.size()), std::to_string(models.size()),
                format_double(friedman.statistic), std::to_string(friedman.df),
                format_p_value(friedman.p_value)}});

    std::vector<std::vector<std::string>> stat_rows;
    for (const HochbergEntry& entry : posthoc.entries) {
        stat_rows.push_back({scenario_tag, posthoc.control, entry.model,
                             format_p_value(entry.p_raw),
                             format_p_value(entry.p_adjusted),
                             entry.significant ? "true" : "false"});
    }
    write_csv(reports / "stats.csv",
              {"scenario", "control", "model", "raw_p", "adjusted_p",
               "significant_at_0.05"},
              stat_rows);
    (void)primary;
    return true;
}

namespace {

/// Minimal static line chart of the availability curves.
std::string availability_svg(const std::vector<AvailabilityPoint>& points,
                             const std::string& x_label) {
    std::vector<int> axes;
    std::vector<std::string> models;
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -y_min;
    for (const AvailabilityPoint& point : points) {
        if (std::find(axes.begin(), axes.end(), point.axis_value) == axes.end()) {
            axes.push_back(point.axis_value);
        }
        if (std::find(models.begin(), models.end(), point.model) == models.end()) {
            models.push_back(point.model);
        }
        y_min = std::min(y_min, point.mean_smape);
        y_max = std::max(y_max, point.mean_smape);
    }
    std::sort(axes.begin(), axes.end());
    if (y_max <= y_min) {
        y_min -= 1.0;
        y_max += 1.0;
    }
    const double pad = 0.05 * (y_max - y_min);
    y_min = std::max(0.0, y_min - pad);
    y_max += pad;

    const double width = 860, height = 520;
    const double left = 70, right = 190, top = 30, bottom = 60;
    const bool log_x = axes.front() > 0 && axes.back() >= 10 * axes.front();
    const auto x_of = [&](int value) {
        double t;
        if (log_x) {
            t = (std::log10(static_cast<double>(value)) -
                 std::log10(static_cast<double>(axes.front()))) /
                (std::log10(static_cast<double>(axes.back())) -
                 std::log10(static_cast<double>(axes.front())));
        } else if (axes.back() == axes.front()) {
            t = 0.5;
        } else {
            t = static_cast<double>(value - axes.front()) /
                static_cast<double>(axes.back() - axes.front());
        }
        return left + t * (width - left - right);
    };
    const auto y_of = [&](double value) {
        const double t = (value - y_min) / (y_max - y_min);
        return top + (1.0 - t) * (height - top - bottom);
    };
    const auto num = [](double v) {
        char buffer[32];
        std::snprintf(buffer, sizeof buffer, "%.1f", v);
        return std::string(buffer);
    };

    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                    "#bcbd22", "#17becf"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
        << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\""
        << width - right << "\" y2=\"" << height - bottom
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
        << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
    for (const int value : axes) {
        const double x = x_of(value);
        svg << "<line x1=\"" << x << "\" y1=\"" << height - bottom << "\" x2=\"" << x
            << "\" y2=\"" << height - bottom + 5 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << x << "\" y=\"" << height - bottom + 20
            << "\" font-size=\"11\" text-anchor=\"middle\">" << value << "</text>\n";
    }
    for (int tick = 0; tick <= 4; ++tick) {
        const double value = y_min + (y_max - y_min) * tick / 4.0;
        const double y = y_of(value);
        svg << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << left
            << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << num(value) << "</text>\n";
    }
    svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 15
        << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label << "</text>\n";
    svg << "<text x=\"" << left << "\" y=\"" << top - 10
        << "\" font-size=\"13\">mean error (%)</text>\n";
    for (std::size_t m = 0; m < models.size(); ++m) {
        const char* color = palette[m % (sizeof palette / sizeof palette[0])];
        std::ostringstream polyline;
        for (const int value : axes) {
            for (const AvailabilityPoint& point : points) {
                if (point.model == models[m] && point.axis_value == value) {
                    const double x = x_of(value);
                    const double y = y_of(point.mean_smape);
                    polyline << x << "," << y << " ";
                    svg << "<circle cx=\"" << x << "\" cy=\"" << y
                        << "\" r=\"3\" fill=\"" << color << "\"/>\n";
                }
            }
        }
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"" << polyline.str() << "\"/>\n";
        const double ly = top + 18.0 * static_cast<double>(m);
        svg << "<line x1=\"" << width - right + 12 << "\" y1=\"" << ly << "\" x2=\""
            << width - right + 32 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << width - right + 38 << "\" y=\"" << ly + 4
            << "\" font-size=\"12\">" << models[m] << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace

void report_run(const fs::path& run_dir) {
    const RunManifest manifest = load_manifest(run_dir);
    const CollectedRows rows = collect_rows(run_dir, manifest);
    const fs::path reports = run_dir / "reports";
    fs::create_directories(reports);

    // Wall-clock totals per model over every stored cell.
    std::map<std::string, std::pair<double, double>> totals; // model -> (pre, train)
    for (const std::string& model_id : manifest.models) {
        totals[model_id] = {0.0, 0.0};
    }
    for (const std::string& model_id : manifest.models) {
        for (const int axis_value : manifest.cells) {
            for (int r = 0; r < manifest.replicates; ++r) {
                const fs::path file =
                    run_dir / "forecasts" /
                    cell_filename(model_id, manifest.axis, axis_value, r);
                if (!fs::exists(file)) continue;
                const StoredCell cell = stored_cell_from_json(read_text_file(file));
                totals[model_id].first += cell.preprocess_seconds;
                totals[model_id].second += cell.train_seconds;
            }
        }
    }
    std::vector<std::vector<std::string>> timing_rows;
    for (const std::string& model_id : manifest.models) {
        const ModelSpec model = parse_model_spec(model_id);
        const auto [pre, train] = totals[model_id];
        const bool has_preprocessing = model_is_global(model.kind);
        timing_rows.push_back({model_id,
                               has_preprocessing ? format_seconds(pre) : "-",
                               format_seconds(train),
                               format_seconds(has_preprocessing ? pre + train : train)});
    }
    write_csv(reports / "timings.csv",
              {"model", "preprocessing_seconds", "train_test_seconds", "total_seconds"},
              timing_rows);

    std::set<int> distinct_axes;
    for (const CellResult& row : rows.all) distinct_axes.insert(row.axis_value);
    if (distinct_axes.size() >= 2) {
        const std::vector<AvailabilityPoint> points = aggregate_by_axis(rows.all);
        const std::string x_label = manifest.axis == SweepAxis::Count
                                        ? "number of series"
                                        : "series length";
        write_text_file_atomic(reports / "availability.svg",
                               availability_svg(points, x_label));
    }
}

void write_summary_grid(const std::vector<fs::path>& run_dirs, const fs::path& out) {
    if (run_dirs.empty()) throw ParameterError("no run directories given");
    struct Column {
        std::string label;
        std::map<std::string, ModelSummary> models;
    };
    std::vector<Column> columns;
    std::set<std::string> model_ids;
    for (const fs::path& dir : run_dirs) {
        const RunManifest manifest = load_manifest(dir);
        const CollectedRows rows = collect_rows(dir, manifest);
        Column column;
        column.label = manifest.scenario.name;
        if (!rows.primary.empty()) {
            for (const ModelSummary& model : aggregate(rows.primary).models) {
                column.models[model.model] = model;
                model_ids.insert(model.model);
            }
        }
        columns.push_back(std::move(column));
    }
    fs::create_directories(out);
    const auto emit = [&](const std::string& filename, const auto& pick) {
        std::vector<std::string> header{"model"};
        for (const Column& column : columns) header.push_back(column.label);
        std::vector<std::vector<std::string>> grid_rows;
        for (const std::string& model : model_ids) {
            std::vector<std::string> row{model};
            for (const Column& column : columns) {
                const auto it = column.models.find(model);
                row.push_back(it == column.models.end() ? "-"
                                                        : format_double(pick(it->second)));
            }
            grid_rows.push_back(std::move(row));
        }
        write_csv(out / filename, header, grid_rows);
    };
    emit("grid_smape.csv", [](const ModelSummary& m) { return m.mean_smape; });
    emit("grid_mase.csv", [](const ModelSummary& m) { return m.mean_mase; });
    emit("grid_pct_diff.csv", [](const ModelSummary& m) { return m.pct_diff_smape; });
}

void write_datasets(const ExperimentConfig& raw_config, int replicates) {
    const ExperimentConfig config = resolve_config(raw_config);
    if (replicates < 1) throw ParameterError("need at least one replicate to simulate");
    const fs::path dir = run_directory(config) / "datasets";
    fs::create_directories(dir);
    for (int r = 0; r < replicates; ++r) {
        const SeriesDataset dataset = build_dataset(config.scenario, r);
        std::ostringstream out;
        write_csv_row(out, {"series_id", "group", "t", "value"});
        for (std::size_t s = 0; s < dataset.series.size(); ++s) {
            const RawSeries& series = dataset.series[s];
            const int group = dataset.group_labels.empty()
                                  ? 0
                                  : dataset.group_labels[s];
            for (std::size_t t = 0; t < series.values.size(); ++t) {
                write_csv_row(out, {series.id, std::to_string(group), std::to_string(t),
                                    format_double(series.values[t])});
            }
        }
        char name[32];
        std::snprintf(name, sizeof name, "rep%04d.csv", r);
        write_text_file_atomic(dir / name, out.str());
    }
}

} // namespace simbench
