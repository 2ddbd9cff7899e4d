#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace simbench {

/// The five data generating processes in the benchmark.
enum class DgpKind {
    Ar,          // linear autoregressive
    Sar,         // seasonal autoregressive
    LogisticMap, // chaotic logistic map
    Setar,       // self-exciting threshold autoregressive
    MackeyGlass, // Mackey-Glass delay recursion
};

std::string to_string(DgpKind kind);
DgpKind parse_dgp_kind(const std::string& text);

/// AR(p) parameters: y_t = intercept + sum_i phi[i] * y_{t-1-i} + e_t,
/// e_t ~ N(0, noise_std^2).
struct ArCoefficients {
    double intercept = 0.0;
    std::vector<double> phi;
    double noise_std = 1.0;
};

/// SAR(P, S) parameters: y_t = intercept + sum_k seasonal_phi[k] * y_{t-(k+1)S} + e_t.
struct SarCoefficients {
    double intercept = 0.0;
    std::vector<double> seasonal_phi;
    int period = 12;
    double noise_std = 1.0;
};

/// Noisy logistic map: y_t = max(r * y_{t-1} * (1 - y_{t-1}) + e_t / 10, 0).
struct LogisticMapParams {
    double r = 3.6;
    double y0 = 0.5;
    double noise_std = 1.0;
};

/// Two-regime (or more) threshold AR. Regime j applies when the delayed value
/// y_{t-delay} falls in (thresholds[j-1], thresholds[j]]; the last regime is
/// the open upper interval. initial_values are in temporal order (oldest first)
/// and seed the recursion directly (they are part of the process definition).
struct SetarParams {
    std::vector<ArCoefficients> regimes;
    std::vector<double> thresholds;
    int delay = 1;
    std::vector<double> initial_values;
};

/// Unit-step Mackey-Glass recursion:
///   y_{t+1} = y_t + beta * y_{t-tau} / (1 + y_{t-tau}^exponent) - gamma * y_t.
/// The history over the delay window starts at the constant initial_level;
/// when initial_level is NaN the simulator resolves it to 0.5 plus a single
/// Gaussian jitter (std 0.01) drawn from the series seed, and records the
/// resolved value back into the stored parameters.
struct MackeyGlassParams {
    double beta = 0.2;
    double gamma = 0.1;
    double exponent = 10.0;
    int tau = 23;
    double initial_level = 0.5;
};

using DgpParams = std::variant<ArCoefficients, SarCoefficients, LogisticMapParams,
                               SetarParams, MackeyGlassParams>;

/// One simulated series plus everything needed to regenerate or audit it.
struct RawSeries {
    std::string id;
    DgpKind dgp = DgpKind::Ar;
    std::uint64_t seed = 0;
    DgpParams params;
    std::vector<double> values;
    std::vector<std::string> warnings; // e.g. non-stationary coefficient sets
};

} // namespace simbench
