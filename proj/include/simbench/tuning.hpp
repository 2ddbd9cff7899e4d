#pragma once

#include "simbench/ffnn.hpp"
#include "simbench/rnn.hpp"
#include "simbench/rng.hpp"

#include <functional>
#include <string>
#include <vector>

namespace simbench {

struct IntRange {
    int lo = 0;
    int hi = 0;
};

struct RealRange {
    double lo = 0.0;
    double hi = 0.0;
};

/// Search bounds for the gradient-trained models. Defaults mirror the
/// published ranges; the epoch and minibatch bounds depend on whether the
/// experiment holds one series or many.
struct HyperRanges {
    bool many_series = true;
    IntRange cell_dim{20, 50};
    IntRange rnn_layers{1, 2};
    IntRange ffnn_layers{1, 5};
    IntRange hidden_nodes{3, 3}; // hi is the model input width
    IntRange minibatch{1, 100};
    IntRange epochs{5, 30};
    IntRange epoch_size{1, 10};
    RealRange learning_rate{0.0001, 0.1};
    RealRange l2{0.0001, 0.0008};
    RealRange noise_std{0.0001, 0.0008};
    RealRange init_std{0.0001, 0.0008};
};

/// `long_series` raises the minibatch lower bound to 10 (the rule used for
/// the long multi-series experiments). Single-series settings widen epochs
/// to 20-300 and drop minibatch/epoch-size from the search.
HyperRanges default_rnn_ranges(bool many_series, bool long_series);
HyperRanges default_ffnn_ranges(bool many_series, bool long_series, int input_size);

/// Uniform draws inside the declared bounds; the learning rate is sampled
/// log-uniformly since its range spans three decades.
FfnnConfig sample_ffnn_config(const HyperRanges& ranges, int input_size, Rng& rng);
RnnConfig sample_rnn_config(const HyperRanges& ranges, Rng& rng);

struct TuningTrial {
    int index = 0;
    std::string config_json;
    double score = 0.0;
    bool failed = false;
    std::string error;
};

struct TuningOutcome {
    int best_index = -1;
    double best_score = 0.0;
    std::string best_config_json;
    std::vector<TuningTrial> trials;
};

/// Bounded random search: draws `trials` configurations with the sampler and
/// keeps the one with the lowest validation score. A trial whose evaluation
/// throws is recorded as failed; if every trial fails the search itself
/// throws. Ties keep the earliest trial.
TuningOutcome random_search_tune(
    int trials, std::uint64_t seed,
    const std::function<std::string(Rng&)>& sampler,
    const std::function<double(const std::string& config_json, int trial_index)>&
        evaluate);

} // namespace simbench
