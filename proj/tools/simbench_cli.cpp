#include "simbench/errors.hpp"
#include "simbench/experiment.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace simbench;

struct CommonFlags {
    std::string preset;
    std::string config_file;
    std::uint64_t seed = 0;
    int replicates = 0;
    int workers = 0;
    int scale = 0;
    std::string out;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_run_flags) {
    cmd->add_option("--preset", flags.preset, "builtin scenario preset name");
    cmd->add_option("--config", flags.config_file,
                    "experiment config file (key = value lines)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", flags.seed, "base seed override");
    cmd->add_option("--replicates", flags.replicates, "replicate count override");
    if (with_run_flags) {
        cmd->add_option("--workers", flags.workers, "parallel worker threads");
        cmd->add_option("--scale", flags.scale,
                        "desk-scale divisor applied to replicates and epochs");
    }
    cmd->add_option("--out", flags.out, "output directory");
}

ExperimentConfig config_from_flags(const CommonFlags& flags) {
    ExperimentConfig config;
    if (!flags.config_file.empty()) {
        config = load_config_file(flags.config_file);
    }
    if (!flags.preset.empty()) {
        config.scenario = find_preset(flags.preset);
    }
    if (config.scenario.name.empty()) {
        throw ParameterError("select a scenario with --preset or --config");
    }
    if (flags.seed != 0) config.base_seed = flags.seed;
    if (flags.replicates > 0) config.replicates = flags.replicates;
    if (flags.workers > 0) config.workers = flags.workers;
    if (flags.scale > 0) config.scale = flags.scale;
    if (!flags.out.empty()) config.out_dir = flags.out;
    return config;
}

void print_presets() {
    std::cout << "name                          dgp           shape          length  "
                 "series  horizon  replicates\n";
    for (const ScenarioSpec& preset : builtin_presets()) {
        char line[160];
        std::snprintf(line, sizeof line, "%-29s %-13s %-14s %6d  %6d  %7d  %10d\n",
                      preset.name.c_str(), to_string(preset.dgp).c_str(),
                      to_string(preset.scenario).c_str(), preset.series_length,
                      preset.num_series, preset.horizon, preset.num_replicates);
        std::cout << line;
    }
}

void print_resolved(const ExperimentConfig& resolved) {
    const ScenarioSpec& spec = resolved.scenario;
    std::cout << "scenario:    " << spec.name << "\n"
              << "dgp:         " << to_string(spec.dgp) << "\n"
              << "shape:       " << to_string(spec.scenario) << "\n"
              << "size:        " << spec.num_series << " series x " << spec.series_length
              << " observations, horizon " << spec.horizon << "\n"
              << "replicates:  " << resolved.replicates << " (scale " << resolved.scale
              << ")\n"
              << "base seed:   " << resolved.base_seed << "\n"
              << "workers:     " << resolved.workers << "\n"
              << "tuning:      " << resolved.tuner_trials << " trials, ensemble of "
              << resolved.ensemble_size << "\n";
    std::cout << "sweep:       " << to_string(sweep_axis(spec));
    const std::vector<int> cells = sweep_values(spec);
    if (cells.size() > 1) {
        std::cout << " [";
        for (std::size_t i = 0; i < cells.size(); ++i) {
            std::cout << (i ? " " : "") << cells[i];
        }
        std::cout << "]";
    }
    std::cout << "\nmodels:     ";
    for (const ModelSpec& model : resolved.models) std::cout << " " << model.id();
    std::cout << "\nrun dir:     " << run_directory(resolved).string() << "\n";
}

int cmd_describe(const CommonFlags& flags) {
    if (flags.preset.empty() && flags.config_file.empty()) {
        print_presets();
        return 0;
    }
    print_resolved(resolve_config(config_from_flags(flags)));
    return 0;
}

int cmd_simulate(const CommonFlags& flags) {
    ExperimentConfig config = config_from_flags(flags);
    const int replicates = flags.replicates > 0 ? flags.replicates : 1;
    config.replicates = replicates;
    write_datasets(config, replicates);
    const fs::path dir = run_directory(resolve_config(config)) / "datasets";
    std::cout << "wrote " << replicates << " replicate dataset(s) under " << dir.string()
              << "\n";
    return 0;
}

int cmd_run(const CommonFlags& flags) {
    const ExperimentConfig config = config_from_flags(flags);
    const RunManifest manifest = run_experiment(config);
    const long failures = manifest.failure_count();
    const fs::path dir = run_directory(resolve_config(config));
    std::cout << "completed " << manifest.statuses.size() - failures << "/"
              << manifest.statuses.size() << " cells";
    if (failures > 0) std::cout << " (" << failures << " failed)";
    std::cout << "; artifacts under " << dir.string() << "\n";
    return failures > 0 ? 1 : 0;
}

int cmd_evaluate(const std::string& run_dir) {
    const ErrorReport report = evaluate_run(run_dir);
    std::cout << "model            mean_smape    mean_mase   pct_diff\n";
    for (const ModelSummary& model : report.models) {
        char line[160];
        std::snprintf(line, sizeof line, "%-16s %10.4f %12.4f %10.2f\n",
                      model.model.c_str(), model.mean_smape, model.mean_mase,
                      model.pct_diff_smape);
        std::cout << line;
    }
    std::cout << "wrote " << (fs::path(run_dir) / "reports").string()
              << "/{results,summary,availability}.csv\n";
    return 0;
}

int cmd_stats(const std::string& run_dir) {
    if (!stats_run(run_dir)) {
        std::cout << "not enough shared replicates across models for rank tests\n";
        return 0;
    }
    std::cout << "wrote " << (fs::path(run_dir) / "reports").string()
              << "/{friedman,stats}.csv\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out) {
    std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
    for (const fs::path& dir : dirs) {
        report_run(dir);
        std::cout << "wrote " << (dir / "reports" / "timings.csv").string() << "\n";
    }
    if (dirs.size() >= 2) {
        const fs::path grid_dir = out.empty() ? fs::path(".") : fs::path(out);
        write_summary_grid(dirs, grid_dir);
        std::cout << "wrote " << (grid_dir / "grid_smape.csv").string()
                  << " (+mase, +pct_diff)\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simbench — forecasting benchmark harness for simulated series"};
    app.require_subcommand(1);

    CommonFlags describe_flags;
    CLI::App* describe =
        app.add_subcommand("describe", "list presets or show a resolved config");
    add_common_flags(describe, describe_flags, false);

    CommonFlags simulate_flags;
    CLI::App* simulate =
        app.add_subcommand("simulate", "write simulated datasets as CSV");
    add_common_flags(simulate, simulate_flags, false);

    CommonFlags run_flags;
    CLI::App* run = app.add_subcommand(
        "run", "tune, train, forecast, evaluate and report a full experiment");
    add_common_flags(run, run_flags, true);

    std::string evaluate_dir;
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "recompute result CSVs from stored forecasts");
    evaluate->add_option("run_dir", evaluate_dir, "run directory with manifest.json")
        ->required();

    std::string stats_dir;
    CLI::App* stats =
        app.add_subcommand("stats", "rank tests against the best model");
    stats->add_option("run_dir", stats_dir, "run directory with manifest.json")
        ->required();

    std::vector<std::string> report_dirs;
    std::string report_out;
    CLI::App* report =
        app.add_subcommand("report", "timing tables, charts and cross-run grids");
    report->add_option("run_dirs", report_dirs, "one or more run directories")
        ->required();
    report->add_option("--out", report_out, "directory for cross-run grid CSVs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (describe->parsed()) return cmd_describe(describe_flags);
        if (simulate->parsed()) return cmd_simulate(simulate_flags);
        if (run->parsed()) return cmd_run(run_flags);
        if (evaluate->parsed()) return cmd_evaluate(evaluate_dir);
        if (stats->parsed()) return cmd_stats(stats_dir);
        if (report->parsed()) return cmd_report(report_dirs, report_out);
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
