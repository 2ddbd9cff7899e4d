#include "simbench/tuning.hpp"

#include "simbench/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace simbench {

namespace {

int sample_int(const IntRange& range, Rng& rng) {
    if (range.hi < range.lo) {
        throw ParameterError("empty integer range");
    }
    return static_cast<int>(rng.uniform_int(range.lo, range.hi));
}

double sample_real(const RealRange& range, Rng& rng) {
    return rng.uniform(range.lo, range.hi);
}

double sample_log_real(const RealRange& range, Rng& rng) {
    return std::exp(rng.uniform(std::log(range.lo), std::log(range.hi)));
}

} // namespace

HyperRanges default_rnn_ranges(bool many_series, bool long_series) {
    HyperRanges ranges;
    ranges.many_series = many_series;
    ranges.epochs = many_series ? IntRange{5, 30} : IntRange{20, 300};
    ranges.minibatch = long_series ? IntRange{10, 100} : IntRange{1, 100};
    return ranges;
}

HyperRanges default_ffnn_ranges(bool many_series, bool long_series,
                                int input_size) {
    HyperRanges ranges;
    ranges.many_series = many_series;
    ranges.epochs = many_series ? IntRange{5, 60} : IntRange{20, 300};
    ranges.minibatch = long_series ? IntRange{10, 100} : IntRange{1, 100};
    ranges.hidden_nodes = IntRange{3, std::max(3, input_size)};
    return ranges;
}

FfnnConfig sample_ffnn_config(const HyperRanges& ranges, int input_size,
                              Rng& rng) {
    FfnnConfig config;
    const int layers = sample_int(ranges.ffnn_layers, rng);
    IntRange nodes = ranges.hidden_nodes;
    nodes.hi = std::min(nodes.hi, std::max(nodes.lo, input_size));
    for (int l = 0; l < layers; ++l) {
        config.hidden_sizes.push_back(sample_int(nodes, rng));
    }
    config.train.epochs = sample_int(ranges.epochs, rng);
    if (ranges.many_series) {
        config.train.epoch_size = sample_int(ranges.epoch_size, rng);
        config.train.minibatch = sample_int(ranges.minibatch, rng);
    } else {
        // one series: no minibatching, full-batch steps
        config.train.epoch_size = 1;
        config.train.minibatch = std::numeric_limits<int>::max();
    }
    config.train.learning_rate = sample_log_real(ranges.learning_rate, rng);
    config.train.l2_lambda = sample_real(ranges.l2, rng);
    config.train.input_noise_std = sample_real(ranges.noise_std, rng);
    config.train.init_std = sample_real(ranges.init_std, rng);
    return config;
}

RnnConfig sample_rnn_config(const HyperRanges& ranges, Rng& rng) {
    RnnConfig config;
    config.cell_dim = sample_int(ranges.cell_dim, rng);
    config.num_layers = sample_int(ranges.rnn_layers, rng);
    config.train.epochs = sample_int(ranges.epochs, rng);
    if (ranges.many_series) {
        config.train.epoch_size = sample_int(ranges.epoch_size, rng);
        config.train.minibatch = sample_int(ranges.minibatch, rng);
    } else {
        config.train.epoch_size = 1;
        config.train.minibatch = 1; // a single sequence per step
    }
    config.train.learning_rate = sample_log_real(ranges.learning_rate, rng);
    config.train.l2_lambda = sample_real(ranges.l2, rng);
    config.train.input_noise_std = sample_real(ranges.noise_std, rng);
    config.train.init_std = sample_real(ranges.init_std, rng);
    return config;
}

TuningOutcome random_search_tune(
    int trials, std::uint64_t seed,
    const std::function<std::string(Rng&)>& sampler,
    const std::function<double(const std::string&, int)>& evaluate) {
    if (trials < 1) {
        throw ParameterError("tuning needs at least one trial");
    }
    Rng rng(seed);
    TuningOutcome outcome;
    outcome.best_score = std::numeric_limits<double>::infinity();
    for (int i = 0; i < trials; ++i) {
        TuningTrial trial;
        trial.index = i;
        trial.config_json = sampler(rng);
        try {
            trial.score = evaluate(trial.config_json, i);
            if (!std::isfinite(trial.score)) {
                throw NumericError("non-finite validation score");
            }
        } catch (const std::exception& e) {
            trial.failed = true;
            trial.score = std::numeric_limits<double>::infinity();
            trial.error = e.what();
        }
        if (!trial.failed && trial.score < outcome.best_score) {
            outcome.best_score = trial.score;
            outcome.best_index = i;
            outcome.best_config_json = trial.config_json;
        }
        outcome.trials.push_back(std::move(trial));
    }
    if (outcome.best_index < 0) {
        throw FitError("every tuning trial failed or diverged");
    }
    return outcome;
}

} // namespace simbench
